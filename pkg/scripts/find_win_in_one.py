"""Search random games for a position with exactly one winning placement.

The placement must end the game at once with the mover ahead, and every other
legal move must lose against perfect play.  Prints the board in wire format.

    python scripts/find_win_in_one.py --seed 1 --max-empty 6
"""

import argparse
import random

from othello_arena.game import Color, apply_move, initial_state, is_terminal, legal_moves, placement_mask
from othello_arena.protocol import board_string
from othello_arena.search import Heuristic, alphabeta


def exact_margin(state):
    """Sign-correct game value for the side to move (solved with alpha-beta)."""
    if is_terminal(state):
        margin = state.black_count - state.white_count
        return margin if state.to_move is Color.BLACK else -margin
    return alphabeta(state, 64, Heuristic.zero()).value


def game_decided(state):
    return is_terminal(state) or (
        not placement_mask(state.black, state.white) and not placement_mask(state.white, state.black)
    )


def classify(state, min_moves):
    mover = state.to_move
    winners, losers = [], []
    moves = legal_moves(state)
    if len(moves) < min_moves:
        return None
    for m in moves:
        child = apply_move(state, m)
        margin = -exact_margin(child)
        lead = child.discs(mover).bit_count() - child.discs(mover.opponent).bit_count()
        if game_decided(child) and lead > 0:
            winners.append(m)
        elif margin < 0:
            losers.append(m)
        else:
            return None
    if len(winners) == 1 and len(losers) == len(moves) - 1:
        return winners[0]
    return None


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--max-empty", type=int, default=6)
    parser.add_argument("--tries", type=int, default=20000)
    parser.add_argument("--min-moves", type=int, default=3)
    args = parser.parse_args()
    rng = random.Random(args.seed)
    for _ in range(args.tries):
        state = initial_state()
        while not is_terminal(state):
            if state.empty_count <= args.max_empty:
                win = classify(state, args.min_moves)
                if win is not None:
                    print(board_string(state), state.to_move.letter, state.passes, win)
                    return
            state = apply_move(state, rng.choice(legal_moves(state)))
    print("nothing found")


if __name__ == "__main__":
    main()
