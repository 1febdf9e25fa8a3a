"""Game log files, replay verification, ASCII boards and tournament reports.

A game log is line-oriented JSON in the same style as the wire protocol::

    {"type":"header","game_id":"g1","rules":"othello/1",...}
    {"type":"ply","ply":0,"player":"black",...,"move":"d3","verdict":"ok"}
    ...
    {"type":"result","winner":"black","black_count":40,...}

One header line, one ``ply`` line per move request, one ``result`` line.
"""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Dict, Iterable, List, Optional, Sequence, Union

from othello_arena.game import (
    Color,
    GameState,
    IllegalMoveError,
    apply_move,
    final_result,
    forfeit_turn,
    format_move,
    initial_state,
    is_terminal,
    parse_move,
    status,
)
from othello_arena.protocol import ProtocolError, parse_state, serialize_state
from othello_arena.records import RULES_VERSION, GameRecord, MoveRecord, Termination, Verdict
from othello_arena.standings import StandingsRow, compute_standings

PathLike = Union[str, os.PathLike]


class LogParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def _color_text(color: Optional[Color]) -> Optional[str]:
    return None if color is None else color.value


def game_log_lines(record: GameRecord) -> List[str]:
    lines = [
        _dumps({
            "type": "header",
            "game_id": record.game_id,
            "rules": RULES_VERSION,
            "black_id": record.black_id,
            "black_name": record.black_name,
            "white_id": record.white_id,
            "white_name": record.white_name,
            "started_at": record.started_at,
            "time_limit_ms": record.time_limit_ms,
            "bad_move_cap": record.bad_move_cap,
        })
    ]
    for rec in record.moves:
        lines.append(_dumps({
            "type": "ply",
            "ply": rec.ply,
            "player": rec.player.value,
            "requested_at": rec.requested_at,
            "replied_at": rec.replied_at,
            "move": None if rec.move is None else format_move(rec.move),
            "verdict": rec.verdict.value,
        }))
    bad = record.bad_move_counts
    result = {
        "type": "result",
        "winner": "draw" if record.winner is None else record.winner.value,
        "black_count": record.black_count,
        "white_count": record.white_count,
        "black_bad_moves": bad[Color.BLACK],
        "white_bad_moves": bad[Color.WHITE],
        "termination": record.termination.value,
        "forfeited_by": _color_text(record.forfeited_by),
        "ended_at": record.ended_at,
    }
    if record.final_state is not None:
        result.update(serialize_state(record.final_state))
    lines.append(_dumps(result))
    return lines


def write_game_log(record: GameRecord, sink: Union[PathLike, IO[str]]) -> None:
    """Write ``record`` to a path or an open text stream."""
    text = "".join(line + "\n" for line in game_log_lines(record))
    if hasattr(sink, "write"):
        sink.write(text)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)


def _field(obj: dict, key: str, line_no: int):
    if key not in obj:
        raise LogParseError(line_no, f"missing field {key!r}")
    return obj[key]


def _color(value, line_no: int) -> Color:
    try:
        return Color(value)
    except ValueError:
        raise LogParseError(line_no, f"bad color {value!r}") from None


def parse_game_log(text: str) -> GameRecord:
    lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if len(lines) < 2:
        raise LogParseError(len(lines) + 1, "log needs a header and a result line")
    objs = []
    for n, line in lines:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(n, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict) or "type" not in obj:
            raise LogParseError(n, "line is not a typed object")
        objs.append((n, obj))

    n, head = objs[0]
    if head["type"] != "header":
        raise LogParseError(n, "first line must be the header")
    try:
        record = GameRecord(
            game_id=_field(head, "game_id", n),
            black_id=_field(head, "black_id", n),
            black_name=_field(head, "black_name", n),
            white_id=_field(head, "white_id", n),
            white_name=_field(head, "white_name", n),
            started_at=_field(head, "started_at", n),
            time_limit_ms=_field(head, "time_limit_ms", n),
            bad_move_cap=_field(head, "bad_move_cap", n),
        )
        for n, obj in objs[1:-1]:
            if obj["type"] != "ply":
                raise LogParseError(n, f"unexpected {obj['type']!r} line")
            move_text = _field(obj, "move", n)
            try:
                move = None if move_text is None else parse_move(move_text)
                verdict = Verdict(_field(obj, "verdict", n))
            except ValueError as exc:
                raise LogParseError(n, str(exc)) from None
            record.moves.append(MoveRecord(
                ply=_field(obj, "ply", n),
                player=_color(_field(obj, "player", n), n),
                requested_at=_field(obj, "requested_at", n),
                replied_at=_field(obj, "replied_at", n),
                move=move,
                verdict=verdict,
            ))
        n, res = objs[-1]
        if res["type"] != "result":
            raise LogParseError(n, "last line must be the result")
        winner = _field(res, "winner", n)
        record.winner = None if winner == "draw" else _color(winner, n)
        record.black_count = _field(res, "black_count", n)
        record.white_count = _field(res, "white_count", n)
        try:
            record.termination = Termination(_field(res, "termination", n))
        except ValueError as exc:
            raise LogParseError(n, str(exc)) from None
        forfeited = res.get("forfeited_by")
        record.forfeited_by = None if forfeited is None else _color(forfeited, n)
        record.ended_at = res.get("ended_at")
        if "board" in res:
            try:
                record.final_state = parse_state(res)
            except (KeyError, ProtocolError) as exc:
                raise LogParseError(n, f"bad final state: {exc}") from None
        record.declared_bad_moves = {
            Color.BLACK: res.get("black_bad_moves"),
            Color.WHITE: res.get("white_bad_moves"),
        }
    except (KeyError, TypeError) as exc:
        raise LogParseError(n, f"bad field: {exc}") from None
    return record


def load_game_log(source: Union[PathLike, IO[str]]) -> GameRecord:
    if hasattr(source, "read"):
        return parse_game_log(source.read())
    with open(source, encoding="utf-8") as fh:
        return parse_game_log(fh.read())


# --------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class Discrepancy:
    ply: Optional[int]  # None for whole-game checks
    kind: str
    detail: str

    def __str__(self) -> str:
        where = "result" if self.ply is None else f"ply {self.ply}"
        return f"{where}: {self.kind}: {self.detail}"


@dataclass
class VerificationReport:
    game_id: str
    discrepancies: List[Discrepancy] = field(default_factory=list)
    plies_replayed: int = 0

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def replay_states(record: GameRecord) -> List[GameState]:
    """States after each recorded exchange, starting with the initial state.

    Bad moves become forfeited turns.  Raises ``IllegalMoveError`` on the first
    ``ok`` move that is not legal in context.
    """
    state = initial_state()
    states = [state]
    for rec in record.moves:
        if rec.verdict is Verdict.OK:
            state = apply_move(state, rec.move)
        else:
            state = forfeit_turn(state)
        states.append(state)
    return states


def verify_replay(record: GameRecord) -> VerificationReport:
    """Re-simulate ``record`` from the opening and list every inconsistency.

    Simulation stops at the first move that cannot be replayed; the moves after
    it were played from a position that can no longer be reconstructed.
    """
    report = VerificationReport(record.game_id)
    found = report.discrepancies
    state = initial_state()
    bad = {Color.BLACK: 0, Color.WHITE: 0}
    diverged = False
    for i, rec in enumerate(record.moves):
        if rec.ply != i:
            found.append(Discrepancy(rec.ply, "ply-sequence", f"expected ply {i}"))
        if is_terminal(state):
            found.append(Discrepancy(rec.ply, "move-after-end", "game was already over"))
            diverged = True
            break
        if rec.player is not state.to_move:
            found.append(Discrepancy(rec.ply, "wrong-player", f"{rec.player.value} moved, {state.to_move.value} to play"))
            diverged = True
            break
        if rec.verdict is Verdict.OK:
            if rec.move is None:
                found.append(Discrepancy(rec.ply, "missing-move", "ok verdict without a move"))
                diverged = True
                break
            try:
                state = apply_move(state, rec.move)
            except IllegalMoveError as exc:
                found.append(Discrepancy(rec.ply, "illegal-move", f"{format_move(rec.move)}: {exc.reason}"))
                diverged = True
                break
        else:
            bad[rec.player] += 1
            if rec.verdict is Verdict.ILLEGAL:
                legal = True
                if rec.move is None:
                    legal = False
                else:
                    try:
                        apply_move(state, rec.move)
                    except IllegalMoveError:
                        legal = False
                if legal:
                    found.append(Discrepancy(rec.ply, "verdict", f"{format_move(rec.move)} is legal"))
            elif rec.verdict is Verdict.TIMEOUT:
                limit = record.time_limit_ms / 1000.0
                if rec.replied_at is not None and rec.replied_at - rec.requested_at <= limit:
                    found.append(Discrepancy(rec.ply, "verdict", "reply was within the deadline"))
            elif rec.verdict is Verdict.MALFORMED and rec.move is not None:
                found.append(Discrepancy(rec.ply, "verdict", "malformed verdict with a parsed move"))
            state = forfeit_turn(state)
        report.plies_replayed += 1

    if diverged:
        return report

    declared = record.declared_bad_moves
    counts = record.bad_move_counts
    if declared is not None:
        for color in (Color.BLACK, Color.WHITE):
            if declared[color] is not None and declared[color] != counts[color]:
                found.append(Discrepancy(None, "bad-move-count", f"{color.value}: logged {declared[color]}, counted {counts[color]}"))

    if record.final_state is not None and record.final_state != state:
        found.append(Discrepancy(None, "final-state", "logged final position differs from replay"))

    result = final_result(state)
    if record.termination is Termination.FINISHED:
        if not is_terminal(state):
            found.append(Discrepancy(None, "not-finished", "game recorded as finished but is still ongoing"))
        expected_winner = result.winner
    else:
        if record.forfeited_by is None:
            found.append(Discrepancy(None, "forfeit", "forfeit without an offending side"))
            expected_winner = record.winner
        else:
            expected_winner = record.forfeited_by.opponent
            if record.termination is Termination.BAD_MOVE_CAP and counts[record.forfeited_by] < record.bad_move_cap:
                found.append(Discrepancy(None, "forfeit", f"{record.forfeited_by.value} has only {counts[record.forfeited_by]} bad moves"))
    if (record.black_count, record.white_count) != (result.black_count, result.white_count):
        found.append(Discrepancy(None, "counts", f"logged {record.black_count}-{record.white_count}, replay {result.black_count}-{result.white_count}"))
    if record.winner is not expected_winner:
        found.append(Discrepancy(None, "result", f"logged winner {_color_text(record.winner) or 'draw'}, expected {_color_text(expected_winner) or 'draw'}"))
    return report


# --------------------------------------------------------------------------
# Rendering


def render_ascii(state: GameState) -> str:
    """Fixed-width board with file letters, rank numbers and a status footer."""
    lines = ["  a b c d e f g h"]
    for row in range(8):
        cells = []
        for col in range(8):
            bit = 1 << (row * 8 + col)
            cells.append("B" if state.black & bit else "W" if state.white & bit else "·")
        lines.append(f"{row + 1} " + " ".join(cells))
    st = status(state)
    if is_terminal(state):
        outcome = "draw" if st.winner is None else f"{st.winner.value} wins"
        lines.append(f"game over: black {st.black_count} white {st.white_count}, {outcome}")
    else:
        lines.append(f"{state.to_move.value} to move (passes {state.passes}); black {state.black_count} white {state.white_count}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Reports


@dataclass
class TournamentReport:
    standings: List[StandingsRow]
    players: List[str]  # client ids in standings order
    names: Dict[str, str]
    matrix: Dict[tuple, str]  # (black_id, white_id) -> cell text
    random_agent_id: Optional[str] = None

    def render(self) -> str:
        out = io.StringIO()
        out.write("Standings\n")
        out.write(f"{'rank':>4}  {'name':<20} {'games':>5} {'W':>3} {'D':>3} {'L':>3} {'pts':>5} {'bad':>4} {'discs':>6}  beat_random\n")
        for row in self.standings:
            flag = "-" if row.client_id == self.random_agent_id else ("yes" if row.beat_random else "no")
            out.write(
                f"{row.rank:>4}  {row.name[:20]:<20} {row.games:>5} {row.wins:>3} {row.draws:>3} {row.losses:>3} "
                f"{row.points:>5.1f} {row.total_bad_moves:>4} {row.disc_differential:>+6}  {flag}\n"
            )
        if self.players:
            out.write("\nResults (row plays black against column)\n")
            width = max(8, *(len(self.names[p][:12]) for p in self.players)) + 1
            out.write(" " * width + "".join(f"{self.names[p][:12]:>{width}}" for p in self.players) + "\n")
            for b in self.players:
                cells = []
                for w in self.players:
                    cells.append("" if b == w else self.matrix.get((b, w), "."))
                out.write(f"{self.names[b][:12]:<{width}}" + "".join(f"{c:>{width}}" for c in cells) + "\n")
        return out.getvalue()


def build_report(records: Sequence[GameRecord], random_agent_id: Optional[str] = None) -> TournamentReport:
    standings = compute_standings(records, random_agent_id)
    names = {row.client_id: row.name for row in standings}
    matrix = {}
    for rec in records:
        if rec.winner is None:
            mark = "D"
        else:
            mark = "W" if rec.winner is Color.BLACK else "L"
        matrix[(rec.black_id, rec.white_id)] = f"{mark} {rec.black_count}-{rec.white_count}"
    return TournamentReport(standings, [r.client_id for r in standings], names, matrix, random_agent_id)


def write_report(records: Sequence[GameRecord], random_agent_id: Optional[str] = None,
                 sink: Union[PathLike, IO[str], None] = None) -> TournamentReport:
    """Build the report and optionally write its text rendering to ``sink``."""
    report = build_report(records, random_agent_id)
    if sink is not None:
        text = report.render()
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            Path(sink).write_text(text, encoding="utf-8")
    return report


def load_tournament(directory: PathLike) -> tuple[List[GameRecord], Optional[str]]:
    """Load every ``*.log`` in a tournament directory, in game order.

    The random agent's id comes from ``tournament.json`` when present.
    """
    directory = Path(directory)
    paths = sorted(directory.glob("*.log"), key=_game_sort_key)
    records = [load_game_log(p) for p in paths]
    random_id = None
    meta = directory / "tournament.json"
    if meta.exists():
        random_id = json.loads(meta.read_text(encoding="utf-8")).get("random_agent_id")
    return records, random_id


def _game_sort_key(path: Path):
    stem = path.stem
    digits = "".join(ch for ch in stem if ch.isdigit())
    return (int(digits) if digits else 0, stem)
