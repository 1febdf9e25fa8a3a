"""Asyncio tournament server.

Connections are serviced concurrently (registration, ping/pong, frame
decoding) while games run one at a time from a queue on a single game-loop
task.  Connection handlers only ever hand messages to the game loop through
each session's inbox; the game loop is the sole owner of game state.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
import sys
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Deque, Dict, Iterable, List, Optional, TextIO

from othello_arena.agents import RandomStrategy, Strategy
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
)
from othello_arena.protocol import (
    BadMove,
    Error,
    FrameBuffer,
    GameEnd,
    GameStart,
    Message,
    MoveReply,
    MoveRequest,
    Ping,
    Pong,
    ProtocolError,
    Register,
    Registered,
    decode_message,
    encode_message,
)
from othello_arena.records import GameRecord, MoveRecord, Pairing, Termination, Verdict
from othello_arena.replay import render_ascii, write_game_log, write_report
from othello_arena.standings import compute_standings

log = logging.getLogger(__name__)

MAX_NAME_LENGTH = 32


@dataclass
class ServerConfig:
    host: str = "0.0.0.0"
    port: int = 8000
    time_limit_ms: int = 5000
    log_dir: Optional[Path] = Path("tournament")
    include_random_agent: bool = False
    random_agent_seed: Optional[int] = None
    bad_move_cap: int = 10
    verbosity: int = 0
    register_timeout_s: float = 10.0
    ping_interval_s: float = 30.0

    def __post_init__(self):
        if self.time_limit_ms < 100:
            raise ValueError("time_limit_ms must be at least 100")
        if not 0 <= self.port <= 65535:
            raise ValueError("port must be in 1..65535 (0 picks a free port)")
        if self.bad_move_cap < 1:
            raise ValueError("bad_move_cap must be at least 1")
        if self.log_dir is not None:
            self.log_dir = Path(self.log_dir)


class AgentDisconnected(Exception):
    def __init__(self, client_id: str):
        super().__init__(client_id)
        self.client_id = client_id


@dataclass(frozen=True)
class Disconnected:
    """Inbox marker: ``client_id`` dropped its connection."""

    client_id: str


class ClientSession:
    def __init__(self, client_id: str, name: str):
        self.client_id = client_id
        self.name = name
        self.connected_at = time.time()
        self.alive = True
        self.inbox: asyncio.Queue = asyncio.Queue()

    async def send(self, message: Message) -> None:
        raise NotImplementedError

    async def close(self) -> None:
        self.alive = False

    def drain_inbox(self) -> int:
        dropped = 0
        while not self.inbox.empty():
            item = self.inbox.get_nowait()
            if isinstance(item, Disconnected):
                self.inbox.put_nowait(item)
                break
            dropped += 1
        return dropped


class RemoteSession(ClientSession):
    def __init__(self, client_id: str, name: str, writer: asyncio.StreamWriter):
        super().__init__(client_id, name)
        self.writer = writer
        self._lock = asyncio.Lock()

    async def send(self, message: Message) -> None:
        if not self.alive:
            return
        async with self._lock:
            try:
                self.writer.write(encode_message(message))
                await self.writer.drain()
            except (ConnectionError, RuntimeError) as exc:
                log.info("send to %s failed: %s", self.client_id, exc)
                self.alive = False

    async def close(self) -> None:
        self.alive = False
        try:
            self.writer.close()
            await self.writer.wait_closed()
        except (ConnectionError, RuntimeError):
            pass


class LocalSession(ClientSession):
    """In-process agent (the built-in random player); answers requests at once."""

    def __init__(self, client_id: str, name: str, strategy: Strategy):
        super().__init__(client_id, name)
        self.strategy = strategy

    async def send(self, message: Message) -> None:
        if isinstance(message, MoveRequest):
            move = self.strategy.choose(message.state, message.deadline_ms)
            self.inbox.put_nowait(MoveReply(message.game_id, move, message.ply))
        elif isinstance(message, GameStart):
            self.strategy.new_game()


def schedule_pairings(client_ids: Iterable[str], game_ids: Iterable[str]) -> List[Pairing]:
    """Double round-robin: one game per ordered pair, the first id playing black."""
    ids = list(client_ids)
    if len(ids) < 2:
        return []
    games = iter(game_ids)
    return [Pairing(next(games), b, w) for b in ids for w in ids if b != w]


def pairings_for_newcomer(existing: Iterable[str], newcomer: str, game_ids: Iterable[str]) -> List[Pairing]:
    """Games a late joiner owes every client already present, both colours each."""
    games = iter(game_ids)
    out = []
    for other in existing:
        if other == newcomer:
            continue
        out.append(Pairing(next(games), other, newcomer))
        out.append(Pairing(next(games), newcomer, other))
    return out


@dataclass
class Game:
    record: GameRecord
    state: GameState
    black: ClientSession
    white: ClientSession
    ply: int = 0

    def session(self, color: Color) -> ClientSession:
        return self.black if color is Color.BLACK else self.white

    def color_of(self, client_id: str) -> Color:
        return Color.BLACK if client_id == self.black.client_id else Color.WHITE


class TournamentServer:
    def __init__(self, config: ServerConfig, spectator: Optional[TextIO] = None):
        self.config = config
        self.spectator = spectator if spectator is not None else sys.stdout
        self.sessions: Dict[str, ClientSession] = {}
        self.queue: Deque[Pairing] = deque()
        self.records: List[GameRecord] = []
        self.cancelled: List[Pairing] = []
        self.current: Optional[Game] = None
        self.random_agent_id: Optional[str] = None
        self.port: Optional[int] = None
        self._client_ids = (f"c{i}" for i in itertools.count(1))
        self._game_ids = (f"g{i}" for i in itertools.count(1))
        self._wakeup: Optional[asyncio.Event] = None
        self._game_done: Optional[asyncio.Condition] = None
        self._stopping = False
        self._server: Optional[asyncio.AbstractServer] = None
        self._loop_task: Optional[asyncio.Task] = None
        self._ping_task: Optional[asyncio.Task] = None
        self._conn_tasks: set = set()

    # -- lifecycle ---------------------------------------------------------

    async def start(self) -> None:
        self._wakeup = asyncio.Event()
        self._game_done = asyncio.Condition()
        if self.config.log_dir is not None:
            self.config.log_dir.mkdir(parents=True, exist_ok=True)
        self._server = await asyncio.start_server(self._handle_connection, self.config.host, self.config.port)
        self.port = self._server.sockets[0].getsockname()[1]
        log.info("listening on %s:%s", self.config.host, self.port)
        if self.config.include_random_agent:
            cid = next(self._client_ids)
            session = LocalSession(cid, "random", RandomStrategy(self.config.random_agent_seed))
            self.random_agent_id = cid
            self._add_session(session)
        self._loop_task = asyncio.create_task(self._game_loop())
        if self.config.ping_interval_s > 0:
            self._ping_task = asyncio.create_task(self._ping_loop())

    async def stop(self) -> None:
        """Finish the running game, cancel the queue, write the summary."""
        self._stopping = True
        if self._server is not None:
            self._server.close()
        if self._wakeup is not None:
            self._wakeup.set()
        if self._loop_task is not None:
            await self._loop_task
        if self._ping_task is not None:
            self._ping_task.cancel()
        self.cancelled.extend(self.queue)
        self.queue.clear()
        self._write_summary()
        for session in list(self.sessions.values()):
            await session.close()
        for task in list(self._conn_tasks):
            task.cancel()
        if self._server is not None:
            await self._server.wait_closed()

    async def serve_until(self, stop_event: asyncio.Event) -> None:
        await self.start()
        try:
            await stop_event.wait()
        finally:
            await self.stop()

    async def wait_for_records(self, count: int, timeout: Optional[float] = None) -> None:
        async def _wait():
            async with self._game_done:
                await self._game_done.wait_for(lambda: len(self.records) >= count)
        await asyncio.wait_for(_wait(), timeout)

    async def wait_idle(self, timeout: Optional[float] = None) -> None:
        """Wait until no game is running or queued."""
        async def _wait():
            async with self._game_done:
                await self._game_done.wait_for(lambda: self.current is None and not self.queue)
        await asyncio.wait_for(_wait(), timeout)

    # -- connections -------------------------------------------------------

    def _add_session(self, session: ClientSession) -> None:
        existing = [cid for cid, s in self.sessions.items() if s.alive]
        self.sessions[session.client_id] = session
        new_games = pairings_for_newcomer(existing, session.client_id, self._game_ids)
        self.queue.extend(new_games)
        if new_games:
            log.info("%s joined: %d games queued", session.name, len(new_games))
        self._wakeup.set()

    def _unique_name(self, requested: str) -> str:
        base = "".join(ch for ch in requested.strip() if ch.isprintable())[:MAX_NAME_LENGTH] or "agent"
        taken = {s.name for s in self.sessions.values()}
        if base not in taken:
            return base
        for n in itertools.count(2):
            candidate = f"{base}-{n}"
            if candidate not in taken:
                return candidate

    async def _handle_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        task = asyncio.current_task()
        self._conn_tasks.add(task)
        try:
            await self._serve_client(reader, writer)
        except asyncio.CancelledError:
            pass
        finally:
            self._conn_tasks.discard(task)

    async def _serve_client(self, reader, writer) -> None:
        buf = FrameBuffer()
        pending: Deque[bytes] = deque()

        async def next_frame() -> Optional[bytes]:
            while not pending:
                data = await reader.read(65536)
                if not data:
                    return None
                pending.extend(buf.feed(data))
            return pending.popleft()

        async def reject(code: str, text: str) -> None:
            try:
                writer.write(encode_message(Error(code, text)))
                await writer.drain()
                writer.close()
                await writer.wait_closed()
            except (ConnectionError, RuntimeError):
                pass

        try:
            frame = await asyncio.wait_for(next_frame(), self.config.register_timeout_s)
        except asyncio.TimeoutError:
            await reject("registration-timeout", "first frame must be register")
            return
        except ConnectionError:
            return
        if frame is None:
            writer.close()
            return
        try:
            first = decode_message(frame)
        except ProtocolError as exc:
            await reject("expected-register", f"could not decode first frame: {exc}")
            return
        if not isinstance(first, Register):
            await reject("expected-register", f"first frame must be register, got {first.TYPE}")
            return

        session = RemoteSession(next(self._client_ids), self._unique_name(first.name), writer)
        await session.send(Registered(session.client_id))
        log.info("registered %s as %s", session.name, session.client_id)
        if self.config.verbosity:
            print(f"* {session.name} connected ({session.client_id})", file=self.spectator)
        self._add_session(session)

        try:
            while True:
                frame = await next_frame()
                if frame is None:
                    break
                try:
                    msg = decode_message(frame)
                except ProtocolError as exc:
                    await session.send(Error("malformed", str(exc)))
                    session.inbox.put_nowait(exc)
                    continue
                if isinstance(msg, Ping):
                    await session.send(Pong())
                elif isinstance(msg, Pong):
                    pass
                elif isinstance(msg, MoveReply):
                    session.inbox.put_nowait(msg)
                else:
                    await session.send(Error("unexpected", f"unexpected {msg.TYPE} message"))
        except ConnectionError:
            pass
        finally:
            self._on_disconnect(session)
            await session.close()

    def _on_disconnect(self, session: ClientSession) -> None:
        session.alive = False
        log.info("%s (%s) disconnected", session.name, session.client_id)
        if self.config.verbosity:
            print(f"* {session.name} disconnected", file=self.spectator)
        game = self.current
        if game is not None and session.client_id in (game.black.client_id, game.white.client_id):
            other = game.white if session is game.black else game.black
            session.inbox.put_nowait(Disconnected(session.client_id))
            other.inbox.put_nowait(Disconnected(session.client_id))
        keep = deque()
        for p in self.queue:
            if session.client_id in (p.black, p.white):
                self.cancelled.append(p)
            else:
                keep.append(p)
        self.queue = keep

    async def _ping_loop(self) -> None:
        while True:
            await asyncio.sleep(self.config.ping_interval_s)
            for session in list(self.sessions.values()):
                if session.alive and isinstance(session, RemoteSession):
                    await session.send(Ping())

    # -- games -------------------------------------------------------------

    async def _game_loop(self) -> None:
        while not self._stopping:
            if not self.queue:
                self._wakeup.clear()
                await self._wakeup.wait()
                continue
            pairing = self.queue.popleft()
            black, white = self.sessions.get(pairing.black), self.sessions.get(pairing.white)
            if black is None or white is None or not black.alive or not white.alive:
                self.cancelled.append(pairing)
                continue
            record = await self.run_game(pairing)
            self.records.append(record)
            self._persist(record)
            async with self._game_done:
                self._game_done.notify_all()
        async with self._game_done:
            self._game_done.notify_all()

    async def run_game(self, pairing: Pairing) -> GameRecord:
        black, white = self.sessions[pairing.black], self.sessions[pairing.white]
        record = GameRecord(
            game_id=pairing.game_id,
            black_id=black.client_id,
            black_name=black.name,
            white_id=white.client_id,
            white_name=white.name,
            started_at=time.time(),
            time_limit_ms=self.config.time_limit_ms,
            bad_move_cap=self.config.bad_move_cap,
        )
        game = Game(record, initial_state(), black, white)
        self.current = game
        black.drain_inbox()
        white.drain_inbox()
        if self.config.verbosity:
            print(f"=== {record.game_id}: {black.name} (black) vs {white.name} (white)", file=self.spectator)
        await black.send(GameStart(record.game_id, Color.BLACK, white.name))
        await white.send(GameStart(record.game_id, Color.WHITE, black.name))

        try:
            while not is_terminal(game.state):
                for color in (Color.BLACK, Color.WHITE):
                    if not game.session(color).alive:
                        raise AgentDisconnected(game.session(color).client_id)
                mover = game.state.to_move
                move_record = await self.handle_turn(game)
                if self.config.verbosity >= 2:
                    shown = "-" if move_record.move is None else format_move(move_record.move)
                    print(f"{record.game_id} ply {move_record.ply}: {mover.value} {shown} [{move_record.verdict.value}]",
                          file=self.spectator)
                    print(render_ascii(game.state), file=self.spectator)
                if move_record.verdict.is_bad and record.bad_move_counts[mover] >= self.config.bad_move_cap:
                    record.termination = Termination.BAD_MOVE_CAP
                    record.forfeited_by = mover
                    break
        except AgentDisconnected as exc:
            record.termination = Termination.DISCONNECT
            record.forfeited_by = game.color_of(exc.client_id)

        result = final_result(game.state)
        record.final_state = game.state
        record.black_count, record.white_count = result.black_count, result.white_count
        if record.forfeited_by is not None:
            record.winner = record.forfeited_by.opponent
        else:
            record.winner = result.winner
        record.ended_at = time.time()
        end = GameEnd(record.game_id, record.winner, record.black_count, record.white_count)
        for session in (black, white):
            if session.alive:
                await session.send(end)
        self.current = None
        if self.config.verbosity:
            outcome = "draw" if record.winner is None else f"{record.player_name(record.winner)} wins"
            print(f"=== {record.game_id} over: {outcome} {record.black_count}-{record.white_count}"
                  f" ({record.termination.value})", file=self.spectator)
        return record

    async def handle_turn(self, game: Game) -> MoveRecord:
        """Request one move from the side to move and apply the verdict to ``game``."""
        loop = asyncio.get_running_loop()
        state = game.state
        color = state.to_move
        mover = game.session(color)
        limit_s = self.config.time_limit_ms / 1000.0
        ply = game.ply
        game.ply += 1

        mover.drain_inbox()
        requested_at = time.time()
        t0 = loop.time()
        await mover.send(MoveRequest(game.record.game_id, ply, state, self.config.time_limit_ms))

        reply = None
        elapsed = None
        while True:
            remaining = t0 + limit_s - loop.time()
            if remaining <= 0:
                break
            try:
                item = await asyncio.wait_for(mover.inbox.get(), remaining)
            except asyncio.TimeoutError:
                break
            if isinstance(item, Disconnected):
                raise AgentDisconnected(item.client_id)
            if isinstance(item, MoveReply) and (item.game_id != game.record.game_id or
                                                (item.ply is not None and item.ply != ply)):
                continue  # stale reply to an earlier request
            reply = item
            elapsed = loop.time() - t0
            break

        replied_at = None if elapsed is None else requested_at + elapsed
        move = None
        if reply is None or elapsed > limit_s:
            verdict, reason = Verdict.TIMEOUT, "timeout"
            if isinstance(reply, MoveReply):
                move = reply.move
        elif isinstance(reply, ProtocolError):
            verdict, reason = Verdict.MALFORMED, f"malformed: {reply}"
        else:
            move = reply.move
            try:
                game.state = apply_move(state, move)
                verdict, reason = Verdict.OK, ""
            except IllegalMoveError as exc:
                verdict, reason = Verdict.ILLEGAL, f"illegal: {exc.reason}"

        if verdict.is_bad:
            game.state = forfeit_turn(state)
            await mover.send(BadMove(game.record.game_id, reason))
            log.info("%s: bad move by %s at ply %d (%s)", game.record.game_id, mover.name, ply, reason)
        rec = MoveRecord(ply, color, requested_at, replied_at, move, verdict)
        game.record.moves.append(rec)
        return rec

    # -- persistence -------------------------------------------------------

    def standings(self):
        return compute_standings(self.records, self.random_agent_id)

    def _persist(self, record: GameRecord) -> None:
        if self.config.log_dir is None:
            return
        write_game_log(record, self.config.log_dir / f"{record.game_id}.log")
        self._write_summary()

    def _write_summary(self) -> None:
        if self.config.log_dir is None:
            return
        directory = self.config.log_dir
        write_report(self.records, self.random_agent_id, directory / "summary.txt")
        meta = {
            "random_agent_id": self.random_agent_id,
            "clients": {cid: s.name for cid, s in self.sessions.items()},
            "games_played": [r.game_id for r in self.records],
            "games_cancelled": [p.game_id for p in self.cancelled],
            "time_limit_ms": self.config.time_limit_ms,
            "bad_move_cap": self.config.bad_move_cap,
            "standings": [
                {
                    "rank": row.rank,
                    "client_id": row.client_id,
                    "name": row.name,
                    "games": row.games,
                    "wins": row.wins,
                    "draws": row.draws,
                    "losses": row.losses,
                    "points": row.points,
                    "total_bad_moves": row.total_bad_moves,
                    "disc_differential": row.disc_differential,
                    "beat_random": row.beat_random,
                }
                for row in self.standings()
            ],
        }
        (directory / "tournament.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
