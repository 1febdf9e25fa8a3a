"""Adversarial search over othello positions.

Values are integers in centidisk-scale units and always refer to the side to
move at the root.  Ties between equally valued root moves are resolved in
favour of the earliest move in row-major ``legal_moves`` order, by every
search routine, so all of them agree on the chosen move as well as the value.
"""

from __future__ import annotations

import enum
import random
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, NamedTuple, Optional, Sequence

from othello_arena.game import (
    FULL,
    PASS,
    Color,
    GameState,
    Move,
    apply_move,
    is_terminal,
    iter_bits,
    legal_moves,
    placement_mask,
)

LARGE = 10**6
INF = 10**9

CORNER_MASK = (1 << 0) | (1 << 7) | (1 << 56) | (1 << 63)


def _default_cell_weights() -> tuple[tuple[int, ...], ...]:
    corners = {(0, 0), (0, 7), (7, 0), (7, 7)}
    x_squares = {(1, 1), (1, 6), (6, 1), (6, 6)}
    c_squares = {
        (0, 1), (1, 0), (0, 6), (1, 7),
        (6, 0), (7, 1), (6, 7), (7, 6),
    }
    rows = []
    for r in range(8):
        row = []
        for c in range(8):
            if (r, c) in corners:
                row.append(100)
            elif (r, c) in x_squares:
                row.append(-50)
            elif (r, c) in c_squares:
                row.append(-20)
            elif r in (0, 7) or c in (0, 7):
                row.append(10)
            else:
                row.append(0)
        rows.append(tuple(row))
    return tuple(rows)


@dataclass(frozen=True)
class Heuristic:
    """Linear board evaluation weights.

    ``cell_weights[row][col]`` is the bonus for owning that square.  The
    defaults are conventional othello lore (corners good, squares next to
    corners bad) and are meant to be tuned through a config file.
    """

    cell_weights: tuple[tuple[int, ...], ...] = field(default_factory=_default_cell_weights)
    mobility_weight: int = 8
    disc_weight: int = 1
    corner_weight: int = 25

    def __post_init__(self):
        rows = tuple(tuple(int(w) for w in row) for row in self.cell_weights)
        if len(rows) != 8 or any(len(row) != 8 for row in rows):
            raise ValueError("cell_weights must be an 8x8 matrix")
        object.__setattr__(self, "cell_weights", rows)

    @cached_property
    def weight_masks(self) -> tuple[tuple[int, int], ...]:
        """(weight, square mask) pairs grouping squares of equal weight."""
        groups: dict[int, int] = {}
        for r, row in enumerate(self.cell_weights):
            for c, w in enumerate(row):
                if w:
                    groups[w] = groups.get(w, 0) | (1 << (r * 8 + c))
        return tuple(sorted(groups.items()))

    @cached_property
    def eval_cache(self) -> dict:
        """Memo of Black-perspective static values keyed by (black, white)."""
        return {}

    @classmethod
    def zero(cls) -> "Heuristic":
        return cls(tuple((0,) * 8 for _ in range(8)), 0, 0, 0)

    @classmethod
    def from_mapping(cls, data: dict) -> "Heuristic":
        kwargs = {}
        for name in ("mobility_weight", "disc_weight", "corner_weight"):
            if name in data:
                kwargs[name] = int(data[name])
        if "cell_weights" in data:
            kwargs["cell_weights"] = tuple(tuple(row) for row in data["cell_weights"])
        return cls(**kwargs)


DEFAULT_HEURISTIC = Heuristic()


@dataclass(frozen=True)
class SearchLimits:
    max_depth: Optional[int] = None
    time_budget_ms: Optional[float] = None
    node_budget: Optional[int] = None

    def __post_init__(self):
        if self.max_depth is None and self.time_budget_ms is None and self.node_budget is None:
            raise ValueError("at least one search limit is required")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.time_budget_ms is not None and self.time_budget_ms < 0:
            raise ValueError("time_budget_ms must be >= 0")
        if self.node_budget is not None and self.node_budget < 1:
            raise ValueError("node_budget must be >= 1")


@dataclass(frozen=True)
class SearchResult:
    best_move: Move
    value: int
    depth_completed: int
    nodes: int
    elapsed_ms: float


# --------------------------------------------------------------------------
# Evaluation


def _terminal_value(own: int, opp: int) -> int:
    margin = own.bit_count() - opp.bit_count()
    if margin > 0:
        return LARGE + 100 * margin
    if margin < 0:
        return -LARGE + 100 * margin
    return 0


EVAL_CACHE_LIMIT = 1 << 18


def evaluate(state: GameState, h: Heuristic, perspective: Color) -> int:
    """Static value of ``state`` for ``perspective``.

    A position where neither side can place a disc is scored as finished:
    ``LARGE`` plus 100 per disc of margin, negated for a loss, 0 for a draw.
    """
    black, white = state.black, state.white
    if state.passes >= 2 or (black | white) == FULL:
        value = _terminal_value(black, white)
    else:
        # Cached from Black's side; antisymmetry gives White's value.
        cache = h.eval_cache
        value = cache.get((black, white))
        if value is None:
            value = _static_value(black, white, h)
            if len(cache) >= EVAL_CACHE_LIMIT:
                cache.clear()
            cache[(black, white)] = value
    return value if perspective is Color.BLACK else -value


def _static_value(own: int, opp: int, h: Heuristic) -> int:
    own_mob = placement_mask(own, opp).bit_count()
    opp_mob = placement_mask(opp, own).bit_count()
    if not own_mob and not opp_mob:
        return _terminal_value(own, opp)
    value = h.disc_weight * (own.bit_count() - opp.bit_count())
    value += h.mobility_weight * (own_mob - opp_mob)
    value += h.corner_weight * ((own & CORNER_MASK).bit_count() - (opp & CORNER_MASK).bit_count())
    for weight, mask in h.weight_masks:
        value += weight * ((own & mask).bit_count() - (opp & mask).bit_count())
    return value


# --------------------------------------------------------------------------
# Zobrist hashing

ZOBRIST_SEED = 0x5EED0F0E11
_zrng = random.Random(ZOBRIST_SEED)
ZOBRIST_BLACK = tuple(_zrng.getrandbits(64) for _ in range(64))
ZOBRIST_WHITE = tuple(_zrng.getrandbits(64) for _ in range(64))
ZOBRIST_WHITE_TO_MOVE = _zrng.getrandbits(64)
_ZOBRIST_FLIP = tuple(b ^ w for b, w in zip(ZOBRIST_BLACK, ZOBRIST_WHITE))
# Mixed into transposition keys only: states differing in pass count differ in value.
_PASS_SALT = (0, _zrng.getrandbits(64), _zrng.getrandbits(64))
del _zrng


def zobrist_hash(state: GameState) -> int:
    h = 0
    for i in iter_bits(state.black):
        h ^= ZOBRIST_BLACK[i]
    for i in iter_bits(state.white):
        h ^= ZOBRIST_WHITE[i]
    if state.to_move is Color.WHITE:
        h ^= ZOBRIST_WHITE_TO_MOVE
    return h


def zobrist_update(h: int, before: GameState, after: GameState) -> int:
    """Hash of ``after`` derived from the hash of ``before`` by XORing the changes."""
    if before.to_move is not after.to_move:
        h ^= ZOBRIST_WHITE_TO_MOVE
    before_occ = before.black | before.white
    for i in iter_bits(after.black & ~before.black):
        h ^= _ZOBRIST_FLIP[i] if before_occ >> i & 1 else ZOBRIST_BLACK[i]
    for i in iter_bits(after.white & ~before.white):
        h ^= _ZOBRIST_FLIP[i] if before_occ >> i & 1 else ZOBRIST_WHITE[i]
    return h


# --------------------------------------------------------------------------
# Transposition table


class Bound(enum.Enum):
    EXACT = "exact"
    LOWER = "lower"
    UPPER = "upper"


class TranspositionEntry(NamedTuple):
    key: int
    depth: int
    value: int
    bound: Bound
    best_move: Move
    generation: int = 0


class TranspositionTable:
    """Fixed-size, depth-preferred transposition table.

    A slot is overwritten when it is empty, holds the same key, belongs to an
    older generation (see ``new_search``), or holds a shallower entry.
    """

    def __init__(self, size_log2: int = 18):
        if not 1 <= size_log2 <= 26:
            raise ValueError("size_log2 out of range")
        self.size = 1 << size_log2
        self._mask = self.size - 1
        self._slots: List[Optional[TranspositionEntry]] = [None] * self.size
        self.generation = 0
        self.hits = 0
        self.stores = 0

    def new_search(self) -> None:
        self.generation += 1

    def clear(self) -> None:
        self._slots = [None] * self.size
        self.generation = 0

    def probe(self, key: int) -> Optional[TranspositionEntry]:
        entry = self._slots[key & self._mask]
        if entry is not None and entry.key == key:
            return entry
        return None

    def store(self, key: int, depth: int, value: int, bound: Bound, best_move: Move) -> None:
        idx = key & self._mask
        old = self._slots[idx]
        if (
            old is None
            or old.key == key
            or old.generation != self.generation
            or depth >= old.depth
        ):
            self._slots[idx] = TranspositionEntry(key, depth, value, bound, best_move, self.generation)
            self.stores += 1

    def __len__(self) -> int:
        return sum(1 for e in self._slots if e is not None)


# --------------------------------------------------------------------------
# Tree search


class SearchAborted(Exception):
    """A time or node budget ran out in the middle of an iteration."""


class _Context:
    def __init__(self, h: Heuristic, tt: Optional[TranspositionTable] = None,
                 deadline: Optional[float] = None, node_budget: Optional[int] = None):
        self.h = h
        self.tt = tt
        self.deadline = deadline
        self.node_budget = node_budget
        self.nodes = 0
        self.can_abort = False
        self.hit_horizon = False

    def tick(self) -> None:
        self.nodes += 1
        if self.can_abort:
            if self.node_budget is not None and self.nodes > self.node_budget:
                raise SearchAborted
            if self.deadline is not None and self.nodes & 63 == 0 and time.perf_counter() >= self.deadline:
                raise SearchAborted


def _require_ongoing(state: GameState, depth: int) -> None:
    if is_terminal(state):
        raise ValueError("cannot search a finished game")
    if depth < 1:
        raise ValueError("depth must be >= 1")


def _minimax_value(ctx: _Context, state: GameState, depth: int, root: Color) -> int:
    ctx.nodes += 1
    if depth == 0 or is_terminal(state):
        return evaluate(state, ctx.h, root)
    values = [_minimax_value(ctx, apply_move(state, m), depth - 1, root) for m in legal_moves(state)]
    return max(values) if state.to_move is root else min(values)


def minimax(state: GameState, depth: int, h: Heuristic = DEFAULT_HEURISTIC) -> SearchResult:
    """Exhaustive depth-limited minimax with explicit max and min levels."""
    _require_ongoing(state, depth)
    start = time.perf_counter()
    ctx = _Context(h)
    ctx.nodes = 1
    root = state.to_move
    best_move, best = None, -INF
    for move in legal_moves(state):
        v = _minimax_value(ctx, apply_move(state, move), depth - 1, root)
        if v > best:
            best_move, best = move, v
    return SearchResult(best_move, best, depth, ctx.nodes, (time.perf_counter() - start) * 1000)


def _negamax_value(ctx: _Context, state: GameState, depth: int) -> int:
    ctx.nodes += 1
    if depth == 0 or is_terminal(state):
        return evaluate(state, ctx.h, state.to_move)
    return max(-_negamax_value(ctx, apply_move(state, m), depth - 1) for m in legal_moves(state))


def negamax(state: GameState, depth: int, h: Heuristic = DEFAULT_HEURISTIC) -> SearchResult:
    _require_ongoing(state, depth)
    start = time.perf_counter()
    ctx = _Context(h)
    ctx.nodes = 1
    best_move, best = None, -INF
    for move in legal_moves(state):
        v = -_negamax_value(ctx, apply_move(state, move), depth - 1)
        if v > best:
            best_move, best = move, v
    return SearchResult(best_move, best, depth, ctx.nodes, (time.perf_counter() - start) * 1000)


def _ordered(moves: List[Move], first: Optional[Move]) -> List[Move]:
    if first is None or first not in moves or moves[0] == first:
        return moves
    return [first] + [m for m in moves if m != first]


def _alphabeta_value(ctx: _Context, state: GameState, key: int, depth: int, alpha: int, beta: int) -> int:
    """Fail-soft negamax alpha-beta; ``key`` is the Zobrist hash of ``state``."""
    ctx.tick()
    if is_terminal(state):
        return evaluate(state, ctx.h, state.to_move)
    if depth == 0:
        ctx.hit_horizon = True
        return evaluate(state, ctx.h, state.to_move)

    tt = ctx.tt
    tt_move = None
    if tt is not None:
        entry = tt.probe(key ^ _PASS_SALT[state.passes])
        if entry is not None:
            tt_move = entry.best_move
            # Only same-depth entries are reused for values so the table never
            # changes the result of a fixed-depth search.
            if entry.depth == depth:
                v = entry.value
                if (
                    entry.bound is Bound.EXACT
                    or (entry.bound is Bound.LOWER and v >= beta)
                    or (entry.bound is Bound.UPPER and v <= alpha)
                ):
                    tt.hits += 1
                    ctx.hit_horizon = True
                    return v

    alpha_orig = alpha
    best, best_move = -INF, None
    for move in _ordered(legal_moves(state), tt_move):
        child = apply_move(state, move)
        child_key = zobrist_update(key, state, child) if tt is not None else 0
        v = -_alphabeta_value(ctx, child, child_key, depth - 1, -beta, -max(alpha, best))
        if v > best:
            best, best_move = v, move
            if v >= beta:
                break

    if tt is not None:
        if best <= alpha_orig:
            bound = Bound.UPPER
        elif best >= beta:
            bound = Bound.LOWER
        else:
            bound = Bound.EXACT
        tt.store(key ^ _PASS_SALT[state.passes], depth, best, bound, best_move)
    return best


def _alphabeta_root(ctx: _Context, state: GameState, depth: int, alpha: int, beta: int) -> tuple[Move, int]:
    moves = legal_moves(state)
    key = zobrist_hash(state) if ctx.tt is not None else 0
    tt_move = None
    if ctx.tt is not None:
        entry = ctx.tt.probe(key ^ _PASS_SALT[state.passes])
        if entry is not None:
            tt_move = entry.best_move
    ctx.tick()
    alpha_orig = alpha
    best, best_idx = -INF, -1
    for move in _ordered(moves, tt_move):
        idx = moves.index(move)
        if best_idx < 0:
            lo = alpha
        elif idx < best_idx:
            # An earlier move that ties the best must be detected, so search
            # one unit below the current best.
            lo = max(alpha, best - 1)
        else:
            lo = max(alpha, best)
        child = apply_move(state, move)
        child_key = zobrist_update(key, state, child) if ctx.tt is not None else 0
        v = -_alphabeta_value(ctx, child, child_key, depth - 1, -beta, -lo)
        if best_idx < 0 or v > best or (v == best and idx < best_idx and v > lo):
            best, best_idx = v, idx
            if v >= beta:
                break
    best_move = moves[best_idx]
    if ctx.tt is not None:
        if best <= alpha_orig:
            bound = Bound.UPPER
        elif best >= beta:
            bound = Bound.LOWER
        else:
            bound = Bound.EXACT
        ctx.tt.store(key ^ _PASS_SALT[state.passes], depth, best, bound, best_move)
    return best_move, best


def alphabeta(
    state: GameState,
    depth: int,
    h: Heuristic = DEFAULT_HEURISTIC,
    alpha: int = -INF,
    beta: int = INF,
    tt: Optional[TranspositionTable] = None,
) -> SearchResult:
    """Alpha-beta search in negamax form, optionally backed by a transposition table.

    With the default full window the root value and move equal ``minimax``.
    """
    if alpha >= beta:
        raise ValueError("empty alpha-beta window")
    _require_ongoing(state, depth)
    start = time.perf_counter()
    ctx = _Context(h, tt)
    move, value = _alphabeta_root(ctx, state, depth, alpha, beta)
    return SearchResult(move, value, depth, ctx.nodes, (time.perf_counter() - start) * 1000)


MAX_PLIES = 64


def iterative_deepening(
    state: GameState,
    limits: SearchLimits,
    h: Heuristic = DEFAULT_HEURISTIC,
    tt: Optional[TranspositionTable] = None,
    on_iteration: Optional[Callable[[SearchResult], None]] = None,
) -> SearchResult:
    """Full-window alpha-beta at depths 1, 2, ... until a limit trips.

    Depth 1 always runs to completion, whatever the budget, so a legal move is
    always returned.  Results of an interrupted iteration are discarded.
    """
    if is_terminal(state):
        raise ValueError("cannot search a finished game")
    start = time.perf_counter()
    if tt is None:
        tt = TranspositionTable()
    tt.new_search()
    deadline = None
    if limits.time_budget_ms is not None:
        deadline = start + limits.time_budget_ms / 1000.0
    max_depth = min(limits.max_depth or MAX_PLIES, MAX_PLIES)
    ctx = _Context(h, tt, deadline, limits.node_budget)

    best: Optional[SearchResult] = None
    for depth in range(1, max_depth + 1):
        ctx.can_abort = depth > 1
        ctx.hit_horizon = False
        try:
            move, value = _alphabeta_root(ctx, state, depth, -INF, INF)
        except SearchAborted:
            break
        best = SearchResult(move, value, depth, ctx.nodes, (time.perf_counter() - start) * 1000)
        if on_iteration is not None:
            on_iteration(best)
        if not ctx.hit_horizon:
            break  # every line reached the end of the game
        if deadline is not None and time.perf_counter() >= deadline:
            break
        if limits.node_budget is not None and ctx.nodes >= limits.node_budget:
            break
    assert best is not None
    return SearchResult(
        best.best_move, best.value, best.depth_completed, ctx.nodes,
        (time.perf_counter() - start) * 1000,
    )
