"""Colour-balanced self-play: an alpha-beta agent against the random agent.

    python scripts/strength_check.py --depth 3 --games 100 --seed 6000
"""

import argparse
import time

from othello_arena.agents import AlphaBetaStrategy, RandomStrategy
from othello_arena.game import Color, apply_move, final_result, initial_state, is_terminal
from othello_arena.search import SearchLimits


def play(depth: int, ab_color: Color, seed: int) -> int:
    """Disc margin for the alpha-beta side."""
    ab = AlphaBetaStrategy(SearchLimits(max_depth=depth))
    rnd = RandomStrategy(seed)
    s = initial_state()
    while not is_terminal(s):
        s = apply_move(s, (ab if s.to_move is ab_color else rnd).choose(s))
    r = final_result(s)
    margin = r.black_count - r.white_count
    return margin if ab_color is Color.BLACK else -margin


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--depth", type=int, default=3)
    parser.add_argument("--games", type=int, default=100)
    parser.add_argument("--seed", type=int, default=6000, help="first random-agent seed")
    args = parser.parse_args()

    t0 = time.perf_counter()
    wins = draws = 0
    margins = []
    for g in range(args.games):
        color = Color.BLACK if g % 2 == 0 else Color.WHITE
        m = play(args.depth, color, args.seed + g)
        margins.append(m)
        wins += m > 0
        draws += m == 0
    losses = args.games - wins - draws
    print(f"depth {args.depth}: {wins} wins, {draws} draws, {losses} losses over {args.games} games "
          f"(mean margin {sum(margins) / len(margins):+.1f}, {time.perf_counter() - t0:.0f}s)")


if __name__ == "__main__":
    main()
