import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from othello_arena.game import (
    Color,
    GameState,
    apply_move,
    initial_state,
    is_terminal,
    legal_moves,
)

sys.path.insert(0, str(Path(__file__).parent))


def state_to_text(state: GameState) -> str:
    cells = []
    for i in range(64):
        bit = 1 << i
        cells.append("B" if state.black & bit else "W" if state.white & bit else ".")
    return "".join(cells)


def state_from_text(text: str, to_move: Color = Color.BLACK, passes: int = 0) -> GameState:
    black = sum(1 << i for i, ch in enumerate(text) if ch == "B")
    white = sum(1 << i for i, ch in enumerate(text) if ch == "W")
    return GameState(black, white, to_move, passes)


def random_playout_states(rng: random.Random, plies: int) -> list[GameState]:
    """States visited by a random game truncated at ``plies`` moves."""
    state = initial_state()
    seen = [state]
    for _ in range(plies):
        if is_terminal(state):
            break
        state = apply_move(state, rng.choice(legal_moves(state)))
        seen.append(state)
    return seen


def random_reachable_state(rng: random.Random, min_ply: int = 0, max_ply: int = 60) -> GameState:
    """A non-terminal state reached by uniformly random play."""
    while True:
        target = rng.randint(min_ply, max_ply)
        states = random_playout_states(rng, target)
        candidates = [s for s in states[min_ply:] if not is_terminal(s)]
        if candidates:
            return candidates[-1]


@st.composite
def reachable_states(draw, max_ply: int = 60):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_reachable_state(random.Random(seed), 0, max_ply)


@pytest.fixture
def rng():
    return random.Random(20240521)


def synthetic_record(rng: random.Random, game_id: str = "g1", bad_rate: float = 0.1,
                     black=("c1", "alice"), white=("c2", "bob")):
    """A consistent finished GameRecord from random play with injected bad moves."""
    from othello_arena.game import SQUARES, final_result, forfeit_turn
    from othello_arena.records import GameRecord, MoveRecord, Verdict

    rec = GameRecord(game_id, black[0], black[1], white[0], white[1], started_at=1000.0 + rng.random())
    state = initial_state()
    clock = rec.started_at
    ply = 0
    while not is_terminal(state):
        mover = state.to_move
        clock += rng.random()
        roll = rng.random()
        if roll < bad_rate / 3:
            occupied = [sq for sq in SQUARES if (state.black | state.white) & sq.bit]
            move, verdict = rng.choice(occupied), Verdict.ILLEGAL
            state = forfeit_turn(state)
            replied = clock + 0.01
        elif roll < 2 * bad_rate / 3:
            move, verdict, replied = None, Verdict.TIMEOUT, None
            state = forfeit_turn(state)
        elif roll < bad_rate:
            move, verdict, replied = None, Verdict.MALFORMED, clock + 0.02
            state = forfeit_turn(state)
        else:
            move, verdict, replied = rng.choice(legal_moves(state)), Verdict.OK, clock + 0.03
            state = apply_move(state, move)
        rec.moves.append(MoveRecord(ply, mover, clock, replied, move, verdict))
        ply += 1
    result = final_result(state)
    rec.final_state = state
    rec.winner = result.winner
    rec.black_count, rec.white_count = result.black_count, result.white_count
    rec.ended_at = clock + 1
    return rec


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance PASS/FAIL lines, which fd capture hides during the run."""
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
