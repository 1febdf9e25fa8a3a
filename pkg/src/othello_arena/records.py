"""Game records shared by the server, the replay checker and the standings."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from othello_arena.game import Color, GameState, Move

RULES_VERSION = "othello/1"


class Verdict(enum.Enum):
    OK = "ok"
    ILLEGAL = "bad_move_illegal"
    TIMEOUT = "bad_move_timeout"
    MALFORMED = "bad_move_malformed"

    @property
    def is_bad(self) -> bool:
        return self is not Verdict.OK


class Termination(enum.Enum):
    FINISHED = "finished"
    BAD_MOVE_CAP = "bad_move_cap"
    DISCONNECT = "disconnect"


@dataclass(frozen=True)
class Pairing:
    game_id: str
    black: str
    white: str

    def __post_init__(self):
        if self.black == self.white:
            raise ValueError("a client cannot play itself")


@dataclass(frozen=True)
class MoveRecord:
    """One request/reply exchange.  ``replied_at`` is None when no reply came."""

    ply: int
    player: Color
    requested_at: float
    replied_at: Optional[float]
    move: Optional[Move]
    verdict: Verdict


@dataclass
class GameRecord:
    game_id: str
    black_id: str
    black_name: str
    white_id: str
    white_name: str
    started_at: float
    moves: List[MoveRecord] = field(default_factory=list)
    final_state: Optional[GameState] = None
    winner: Optional[Color] = None  # None is a draw
    black_count: int = 0
    white_count: int = 0
    termination: Termination = Termination.FINISHED
    forfeited_by: Optional[Color] = None
    ended_at: Optional[float] = None
    time_limit_ms: int = 5000
    bad_move_cap: int = 10
    # Per-colour totals as written in a log's result line; not part of equality.
    declared_bad_moves: Optional[Dict[Color, Optional[int]]] = field(default=None, compare=False, repr=False)

    @property
    def bad_move_counts(self) -> Dict[Color, int]:
        counts = {Color.BLACK: 0, Color.WHITE: 0}
        for rec in self.moves:
            if rec.verdict.is_bad:
                counts[rec.player] += 1
        return counts

    def player_id(self, color: Color) -> str:
        return self.black_id if color is Color.BLACK else self.white_id

    def player_name(self, color: Color) -> str:
        return self.black_name if color is Color.BLACK else self.white_name

    @property
    def pairing(self) -> Pairing:
        return Pairing(self.game_id, self.black_id, self.white_id)
