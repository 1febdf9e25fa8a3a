"""Othello rules on a pair of 64-bit occupancy masks.

Square numbering is row-major: index = row * 8 + column, so ``a1`` is bit 0,
``h1`` is bit 7 and ``h8`` is bit 63.  Rows are printed top to bottom as
1..8, columns left to right as a..h.

Every function here is pure; ``GameState`` values are immutable and may be
shared freely between threads.
"""

from __future__ import annotations

import enum
from typing import Iterator, List, NamedTuple, Union

FULL = (1 << 64) - 1
NOT_A_FILE = 0xFEFEFEFEFEFEFEFE
NOT_H_FILE = 0x7F7F7F7F7F7F7F7F
INNER_COLUMNS = 0x7E7E7E7E7E7E7E7E

# (shift, mask) pairs; left shifts move towards higher indices.
_LEFT = ((1, NOT_A_FILE), (7, NOT_H_FILE), (8, FULL), (9, NOT_A_FILE))
_RIGHT = ((1, NOT_H_FILE), (7, NOT_A_FILE), (8, FULL), (9, NOT_H_FILE))

COLUMNS = "abcdefgh"


class IllegalMoveError(ValueError):
    """Raised when a move cannot be applied to a state.

    ``reason`` is one of ``"occupied"``, ``"no-flips"``, ``"pass-with-moves"``
    or ``"game-over"``.
    """

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class GameOverError(IllegalMoveError):
    def __init__(self, message: str = "game is over"):
        super().__init__("game-over", message)


class Color(enum.Enum):
    BLACK = "black"
    WHITE = "white"

    @property
    def opponent(self) -> "Color":
        return Color.WHITE if self is Color.BLACK else Color.BLACK

    @property
    def letter(self) -> str:
        return "B" if self is Color.BLACK else "W"

    @classmethod
    def from_letter(cls, letter: str) -> "Color":
        if letter == "B":
            return cls.BLACK
        if letter == "W":
            return cls.WHITE
        raise ValueError(f"not a color letter: {letter!r}")


class Coord(NamedTuple):
    """A board square; ``Coord(3, 2)`` is ``d3``."""

    col: int
    row: int

    @property
    def index(self) -> int:
        return self.row * 8 + self.col

    @property
    def bit(self) -> int:
        return 1 << (self.row * 8 + self.col)

    @classmethod
    def from_index(cls, index: int) -> "Coord":
        if not 0 <= index < 64:
            raise ValueError(f"square index out of range: {index}")
        return cls(index % 8, index // 8)

    @classmethod
    def parse(cls, text: str) -> "Coord":
        if (
            len(text) != 2
            or text[0] not in COLUMNS
            or text[1] not in "12345678"
        ):
            raise ValueError(f"not an algebraic square: {text!r}")
        return cls(COLUMNS.index(text[0]), int(text[1]) - 1)

    def __str__(self) -> str:
        return f"{COLUMNS[self.col]}{self.row + 1}"


SQUARES = tuple(Coord(i % 8, i // 8) for i in range(64))


class _Pass:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PASS"

    def __str__(self) -> str:
        return "pass"

    def __reduce__(self):
        return (_Pass, ())


PASS = _Pass()
Move = Union[Coord, _Pass]


def parse_move(text: str) -> Move:
    """Parse ``"pass"`` or an algebraic square such as ``"d3"``."""
    if text == "pass":
        return PASS
    return Coord.parse(text)


def format_move(move: Move) -> str:
    return str(move)


class GameState(NamedTuple):
    """Immutable position: two occupancy masks, side to move, pass counter."""

    black: int
    white: int
    to_move: Color
    passes: int = 0

    def discs(self, color: Color) -> int:
        return self.black if color is Color.BLACK else self.white

    def cell(self, coord: Coord) -> Color | None:
        bit = coord.bit
        if self.black & bit:
            return Color.BLACK
        if self.white & bit:
            return Color.WHITE
        return None

    @property
    def black_count(self) -> int:
        return self.black.bit_count()

    @property
    def white_count(self) -> int:
        return self.white.bit_count()

    @property
    def empty_count(self) -> int:
        return 64 - (self.black | self.white).bit_count()


class Finished(NamedTuple):
    winner: Color | None  # None means a draw
    black_count: int
    white_count: int


class Ongoing(NamedTuple):
    pass


ONGOING = Ongoing()
GameStatus = Union[Ongoing, Finished]


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit indices in ascending (row-major) order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def initial_state() -> GameState:
    white = (1 << 27) | (1 << 36)  # d4, e5
    black = (1 << 28) | (1 << 35)  # e4, d5
    return GameState(black, white, Color.BLACK, 0)


def placement_mask(own: int, opp: int) -> int:
    """Mask of empty squares where ``own`` may place a disc."""
    # Interior-column mask stops runs from wrapping across the a/h files;
    # the doubled step covers runs of up to six discs in four fills.
    m = opp & INNER_COLUMNS
    t = m & (own << 1); t |= m & (t << 1); p = m & (m << 1); t |= p & (t << 2); t |= p & (t << 2)
    moves = t << 1
    t = m & (own >> 1); t |= m & (t >> 1); p = m & (m >> 1); t |= p & (t >> 2); t |= p & (t >> 2)
    moves |= t >> 1
    t = opp & (own << 8); t |= opp & (t << 8); p = opp & (opp << 8); t |= p & (t << 16); t |= p & (t << 16)
    moves |= t << 8
    t = opp & (own >> 8); t |= opp & (t >> 8); p = opp & (opp >> 8); t |= p & (t >> 16); t |= p & (t >> 16)
    moves |= t >> 8
    t = m & (own << 7); t |= m & (t << 7); p = m & (m << 7); t |= p & (t << 14); t |= p & (t << 14)
    moves |= t << 7
    t = m & (own >> 7); t |= m & (t >> 7); p = m & (m >> 7); t |= p & (t >> 14); t |= p & (t >> 14)
    moves |= t >> 7
    t = m & (own << 9); t |= m & (t << 9); p = m & (m << 9); t |= p & (t << 18); t |= p & (t << 18)
    moves |= t << 9
    t = m & (own >> 9); t |= m & (t >> 9); p = m & (m >> 9); t |= p & (t >> 18); t |= p & (t >> 18)
    moves |= t >> 9
    return moves & ~(own | opp) & FULL


def flip_mask(own: int, opp: int, bit: int) -> int:
    """Opponent discs turned over by placing at ``bit``; 0 if illegal."""
    flips = 0
    for shift, mask in _LEFT:
        run = 0
        x = (bit << shift) & mask
        while x & opp:
            run |= x
            x = (x << shift) & mask
        if x & own:
            flips |= run
    for shift, mask in _RIGHT:
        run = 0
        x = (bit >> shift) & mask
        while x & opp:
            run |= x
            x = (x >> shift) & mask
        if x & own:
            flips |= run
    return flips


def _own_opp(state: GameState) -> tuple[int, int]:
    if state.to_move is Color.BLACK:
        return state.black, state.white
    return state.white, state.black


def flips_for(state: GameState, coord: Coord) -> List[Coord]:
    """Squares the side to move would turn over by placing at ``coord``.

    An empty list means the placement is illegal.  Raises
    ``IllegalMoveError("occupied")`` when ``coord`` already holds a disc.
    """
    bit = coord.bit
    if (state.black | state.white) & bit:
        raise IllegalMoveError("occupied", f"{coord} is occupied")
    own, opp = _own_opp(state)
    return [Coord.from_index(i) for i in iter_bits(flip_mask(own, opp, bit))]


def is_full(state: GameState) -> bool:
    return (state.black | state.white) == FULL


def is_terminal(state: GameState) -> bool:
    return state.passes >= 2 or (state.black | state.white) == FULL


def legal_moves(state: GameState) -> List[Move]:
    """Legal moves in row-major order, or ``[PASS]`` when no placement exists."""
    black, white = state.black, state.white
    if state.passes >= 2 or (black | white) == FULL:
        raise GameOverError()
    if state.to_move is Color.BLACK:
        mask = placement_mask(black, white)
    else:
        mask = placement_mask(white, black)
    if not mask:
        return [PASS]
    moves = []
    while mask:
        low = mask & -mask
        moves.append(SQUARES[low.bit_length() - 1])
        mask ^= low
    return moves


def apply_move(state: GameState, move: Move) -> GameState:
    if state.passes >= 2 or (state.black | state.white) == FULL:
        raise GameOverError()
    if state.to_move is Color.BLACK:
        own, opp = state.black, state.white
    else:
        own, opp = state.white, state.black
    if move is PASS:
        if placement_mask(own, opp):
            raise IllegalMoveError(
                "pass-with-moves", "cannot pass while a placement is available"
            )
        return GameState(
            state.black, state.white, state.to_move.opponent, state.passes + 1
        )
    bit = 1 << (move.row * 8 + move.col)
    if (own | opp) & bit:
        raise IllegalMoveError("occupied", f"{move} is occupied")
    flips = flip_mask(own, opp, bit)
    if not flips:
        raise IllegalMoveError("no-flips", f"{move} turns over no discs")
    own |= bit | flips
    opp &= ~flips
    if state.to_move is Color.BLACK:
        return GameState(own, opp, Color.WHITE, 0)
    return GameState(opp, own, Color.BLACK, 0)


def forfeit_turn(state: GameState) -> GameState:
    """Hand the turn to the opponent after a bad move.

    The board is unchanged and the pass counter is cleared, so a forfeited
    turn never contributes to double-pass termination.
    """
    return GameState(state.black, state.white, state.to_move.opponent, 0)


def status(state: GameState) -> GameStatus:
    if not is_terminal(state):
        return ONGOING
    return final_result(state)


def final_result(state: GameState) -> Finished:
    """Disc counts and majority winner of ``state``, terminal or not."""
    b, w = state.black.bit_count(), state.white.bit_count()
    if b > w:
        winner = Color.BLACK
    elif w > b:
        winner = Color.WHITE
    else:
        winner = None
    return Finished(winner, b, w)


def perft(state: GameState, depth: int) -> int:
    """Count move sequences of exactly ``depth`` plies (passes included).

    Lines that reach a terminal state before ``depth`` plies contribute 0.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth == 0:
        return 1
    if is_terminal(state):
        return 0
    moves = legal_moves(state)
    if depth == 1:
        return len(moves)
    return sum(perft(apply_move(state, m), depth - 1) for m in moves)
