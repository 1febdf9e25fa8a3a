"""UCT Monte-Carlo tree search with uniform random playouts."""

from __future__ import annotations

import math
import random
import time
from typing import List, Optional

from othello_arena.game import (
    FULL,
    Color,
    GameState,
    Move,
    apply_move,
    flip_mask,
    is_terminal,
    legal_moves,
    placement_mask,
)
from othello_arena.search import SearchLimits, SearchResult

DEFAULT_EXPLORATION = math.sqrt(2)


class _Node:
    __slots__ = ("state", "parent", "move", "order", "children", "untried", "visits", "reward")

    def __init__(self, state: GameState, parent: Optional["_Node"], move: Optional[Move], order: int,
                 rng: random.Random):
        self.state = state
        self.parent = parent
        self.move = move
        self.order = order  # position of ``move`` in the parent's legal_moves
        self.children: List[_Node] = []
        if is_terminal(state):
            self.untried: List[tuple[int, Move]] = []
        else:
            self.untried = list(enumerate(legal_moves(state)))
            rng.shuffle(self.untried)
        self.visits = 0
        # Sum of rewards for the player who made ``move`` (the parent's mover).
        self.reward = 0.0


def _ucb_child(node: _Node, c: float) -> _Node:
    log_n = math.log(node.visits)
    best, best_score = None, -math.inf
    for child in node.children:
        score = child.reward / child.visits + c * math.sqrt(log_n / child.visits)
        if score > best_score:
            best, best_score = child, score
    return best


def random_playout(state: GameState, rng: random.Random) -> Color | None:
    """Play uniformly random moves to the end; return the winner (None for a draw)."""
    if state.to_move is Color.BLACK:
        own, opp = state.black, state.white
    else:
        own, opp = state.white, state.black
    mover_is_black = state.to_move is Color.BLACK
    passes = state.passes
    while passes < 2 and (own | opp) != FULL:
        moves = placement_mask(own, opp)
        if moves:
            k = rng.randrange(moves.bit_count())
            for _ in range(k):
                moves &= moves - 1
            bit = moves & -moves
            flips = flip_mask(own, opp, bit)
            own |= bit | flips
            opp &= ~flips
            passes = 0
        else:
            passes += 1
        own, opp = opp, own
        mover_is_black = not mover_is_black
    black, white = (own, opp) if mover_is_black else (opp, own)
    b, w = black.bit_count(), white.bit_count()
    if b > w:
        return Color.BLACK
    if w > b:
        return Color.WHITE
    return None


def _run_uct(state: GameState, limits: SearchLimits, exploration: float,
             rng: random.Random) -> tuple[_Node, int]:
    if is_terminal(state):
        raise ValueError("cannot search a finished game")
    if limits.node_budget is None and limits.time_budget_ms is None:
        raise ValueError("MCTS needs a playout or time budget")
    deadline = None
    if limits.time_budget_ms is not None:
        deadline = time.perf_counter() + limits.time_budget_ms / 1000.0
    budget = limits.node_budget

    root = _Node(state, None, None, -1, rng)
    playouts = 0
    while True:
        node = root
        while not node.untried and node.children:
            node = _ucb_child(node, exploration)
        if node.untried:
            order, move = node.untried.pop()
            child = _Node(apply_move(node.state, move), node, move, order, rng)
            node.children.append(child)
            node = child
        winner = random_playout(node.state, rng)
        while node.parent is not None:
            node.visits += 1
            if winner is None:
                node.reward += 0.5
            elif winner is node.parent.state.to_move:
                node.reward += 1.0
            node = node.parent
        root.visits += 1
        playouts += 1
        if budget is not None and playouts >= budget:
            break
        if deadline is not None and time.perf_counter() >= deadline:
            break
    return root, playouts


def mcts_choose(
    state: GameState,
    limits: SearchLimits,
    exploration: float = DEFAULT_EXPLORATION,
    rng: Optional[random.Random] = None,
) -> SearchResult:
    """Pick a move by UCT search.

    ``limits.node_budget`` counts playouts; ``limits.time_budget_ms`` bounds
    wall time.  One playout always runs.  The most visited root child wins,
    ties going to the earlier move in ``legal_moves`` order.  The reported
    value is that child's mean reward mapped onto -100..100.
    """
    start = time.perf_counter()
    root, playouts = _run_uct(state, limits, exploration, rng or random.Random())
    best = max(root.children, key=lambda ch: (ch.visits, -ch.order))
    value = round(100 * (2 * best.reward / best.visits - 1))
    return SearchResult(best.move, value, 1, playouts, (time.perf_counter() - start) * 1000)


def root_visits(
    state: GameState,
    limits: SearchLimits,
    exploration: float = DEFAULT_EXPLORATION,
    rng: Optional[random.Random] = None,
) -> dict:
    """Visit count per expanded root move after one search."""
    root, _ = _run_uct(state, limits, exploration, rng or random.Random())
    return {child.move: child.visits for child in root.children}
