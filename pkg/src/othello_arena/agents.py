"""Reference agents: move-selection strategies and the protocol client loop."""

from __future__ import annotations

import logging
import random
import socket
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from othello_arena.game import PASS, GameState, Move, flip_mask, legal_moves
from othello_arena.mcts import DEFAULT_EXPLORATION, mcts_choose
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
    ProtocolError,
    Register,
    Registered,
    Pong,
    decode_message,
    encode_message,
)
from othello_arena.search import (
    DEFAULT_HEURISTIC,
    Heuristic,
    SearchLimits,
    TranspositionTable,
    iterative_deepening,
)

log = logging.getLogger(__name__)

DEFAULT_SAFETY_MARGIN_MS = 500


def choose_move_random(state: GameState, rng: random.Random) -> Move:
    return rng.choice(legal_moves(state))


def choose_move_greedy(state: GameState) -> Move:
    """Placement turning over the most discs; earliest square wins ties."""
    moves = legal_moves(state)
    if moves[0] is PASS:
        return PASS
    own, opp = state.discs(state.to_move), state.discs(state.to_move.opponent)
    best, best_flips = moves[0], -1
    for m in moves:
        n = flip_mask(own, opp, m.bit).bit_count()
        if n > best_flips:
            best, best_flips = m, n
    return best


def choose_move_search(
    state: GameState,
    limits: SearchLimits,
    heuristic: Heuristic = DEFAULT_HEURISTIC,
    tt: Optional[TranspositionTable] = None,
) -> Move:
    return iterative_deepening(state, limits, heuristic, tt).best_move


class Strategy:
    """Base class: ``choose`` must return a legal move for a live state."""

    name = "strategy"

    def new_game(self) -> None:
        pass

    def choose(self, state: GameState, budget_ms: Optional[float] = None) -> Move:
        raise NotImplementedError


class RandomStrategy(Strategy):
    name = "random"

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed
        self.rng = random.Random(seed)

    def choose(self, state, budget_ms=None):
        return choose_move_random(state, self.rng)


class GreedyStrategy(Strategy):
    name = "greedy"

    def choose(self, state, budget_ms=None):
        return choose_move_greedy(state)


class AlphaBetaStrategy(Strategy):
    """Iterative-deepening alpha-beta; the table is kept for one game."""

    name = "alphabeta"

    def __init__(self, limits: SearchLimits, heuristic: Heuristic = DEFAULT_HEURISTIC, tt_size_log2: int = 18):
        self.limits = limits
        self.heuristic = heuristic
        self.tt = TranspositionTable(tt_size_log2)

    def new_game(self):
        self.tt.clear()

    def choose(self, state, budget_ms=None):
        limits = self.limits
        if budget_ms is not None:
            budget = max(0.0, budget_ms)
            if limits.time_budget_ms is not None:
                budget = min(budget, limits.time_budget_ms)
            limits = SearchLimits(limits.max_depth, budget, limits.node_budget)
        return choose_move_search(state, limits, self.heuristic, self.tt)


class MctsStrategy(Strategy):
    name = "mcts"

    def __init__(self, limits: SearchLimits, exploration: float = DEFAULT_EXPLORATION, seed: Optional[int] = None):
        self.limits = limits
        self.exploration = exploration
        self.rng = random.Random(seed)

    def choose(self, state, budget_ms=None):
        limits = self.limits
        if budget_ms is not None:
            budget = max(0.0, budget_ms)
            if limits.time_budget_ms is not None:
                budget = min(budget, limits.time_budget_ms)
            limits = SearchLimits(limits.max_depth, budget, limits.node_budget)
        return mcts_choose(state, limits, self.exploration, self.rng).best_move


@dataclass
class AgentConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    name: str = "agent"
    strategy: Strategy = field(default_factory=RandomStrategy)
    reply_safety_margin_ms: int = DEFAULT_SAFETY_MARGIN_MS
    connect_timeout_s: float = 10.0

    def __post_init__(self):
        if not 0 <= self.reply_safety_margin_ms < 5000:
            raise ValueError("reply_safety_margin_ms must be in [0, 5000)")


def reply_for(request: MoveRequest, strategy: Strategy, margin_ms: float,
              received_at: Optional[float] = None) -> MoveReply:
    """Compute the reply to ``request`` within ``deadline_ms - margin_ms``."""
    received_at = time.perf_counter() if received_at is None else received_at
    budget = request.deadline_ms - margin_ms - (time.perf_counter() - received_at) * 1000
    move = strategy.choose(request.state, budget)
    return MoveReply(request.game_id, move, request.ply)


def agent_loop(config: AgentConfig, on_message: Optional[Callable[[Message], None]] = None) -> int:
    """Play on a server until it closes the connection.

    Returns 0 when the server closes the connection, 1 when the connection is
    refused or lost.  ``on_message`` sees every decoded server message.
    """
    try:
        sock = socket.create_connection((config.host, config.port), timeout=config.connect_timeout_s)
    except OSError as exc:
        log.error("cannot connect to %s:%s: %s", config.host, config.port, exc)
        return 1
    sock.settimeout(None)
    buf = FrameBuffer()
    try:
        with sock:
            sock.sendall(encode_message(Register(config.name)))
            while True:
                data = sock.recv(65536)
                if not data:
                    log.info("server closed the connection")
                    return 0
                received_at = time.perf_counter()
                for frame in buf.feed(data):
                    try:
                        msg = decode_message(frame)
                    except ProtocolError as exc:
                        log.warning("undecodable frame from server: %s", exc)
                        continue
                    if on_message is not None:
                        on_message(msg)
                    if isinstance(msg, MoveRequest):
                        reply = reply_for(msg, config.strategy, config.reply_safety_margin_ms, received_at)
                        sock.sendall(encode_message(reply))
                    elif isinstance(msg, Ping):
                        sock.sendall(encode_message(Pong()))
                    elif isinstance(msg, GameStart):
                        config.strategy.new_game()
                        log.info("game %s: playing %s against %s", msg.game_id, msg.your_color.value, msg.opponent_name)
                    elif isinstance(msg, BadMove):
                        log.warning("game %s: bad move (%s)", msg.game_id, msg.reason)
                    elif isinstance(msg, GameEnd):
                        result = "draw" if msg.result is None else f"{msg.result.value} wins"
                        log.info("game %s over: %s %d-%d", msg.game_id, result, msg.black_count, msg.white_count)
                    elif isinstance(msg, Registered):
                        log.info("registered as %s", msg.client_id)
                    elif isinstance(msg, Error):
                        log.error("server error %s: %s", msg.code, msg.text)
    except OSError as exc:
        log.error("connection lost: %s", exc)
        return 1
