"""Tournament standings from finished game records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

from othello_arena.game import Color
from othello_arena.records import GameRecord


@dataclass
class StandingsRow:
    client_id: str
    name: str
    games: int = 0
    wins: int = 0
    draws: int = 0
    losses: int = 0
    total_bad_moves: int = 0
    disc_differential: int = 0
    beat_random: bool = False
    rank: int = 0

    @property
    def points(self) -> float:
        return self.wins + 0.5 * self.draws


def compute_standings(records: Iterable[GameRecord], random_agent_id: Optional[str] = None) -> List[StandingsRow]:
    """Rank every client appearing in ``records``.

    Order: points (1 per win, 0.5 per draw), then fewer bad moves, then
    larger total disc differential, then name, then client id.  A client
    ``beat_random`` when it ranks strictly above the random agent.
    """
    rows: Dict[str, StandingsRow] = {}
    for rec in records:
        bad = rec.bad_move_counts
        for color in (Color.BLACK, Color.WHITE):
            cid = rec.player_id(color)
            row = rows.get(cid)
            if row is None:
                row = rows[cid] = StandingsRow(cid, rec.player_name(color))
            row.games += 1
            row.total_bad_moves += bad[color]
            own = rec.black_count if color is Color.BLACK else rec.white_count
            opp = rec.white_count if color is Color.BLACK else rec.black_count
            row.disc_differential += own - opp
            if rec.winner is None:
                row.draws += 1
            elif rec.winner is color:
                row.wins += 1
            else:
                row.losses += 1

    ordered = sorted(
        rows.values(),
        key=lambda r: (-r.points, r.total_bad_moves, -r.disc_differential, r.name, r.client_id),
    )
    for rank, row in enumerate(ordered, start=1):
        row.rank = rank
    random_row = rows.get(random_agent_id) if random_agent_id is not None else None
    for row in ordered:
        row.beat_random = random_row is not None and row is not random_row and row.rank < random_row.rank
    return ordered
