"""Run a local tournament: one server plus reference agents as separate processes.

    python scripts/run_tournament.py --logs runs/t1 --agents greedy alphabeta:4 mcts:2000 --random-agent

Agent specs are ``strategy[:param]`` where the parameter is the depth for
alphabeta and the playout budget for mcts.  Prints the report at the end.
"""

import argparse
import asyncio
import sys
from pathlib import Path

from othello_arena.replay import load_tournament, verify_replay, write_report
from othello_arena.server import ServerConfig, TournamentServer


def agent_argv(choice: str, index: int, port: int) -> list:
    strategy, _, param = choice.partition(":")
    argv = [sys.executable, "-m", "othello_arena", "agent", "--connect", f"127.0.0.1:{port}",
            "--name", f"{strategy}{index}", "--strategy", strategy, "--seed", str(index)]
    if param and strategy == "alphabeta":
        argv += ["--max-depth", param]
    elif param and strategy == "mcts":
        argv += ["--node-budget", param]
    return argv


async def run(args) -> None:
    n = len(args.agents) + bool(args.random_agent)
    config = ServerConfig(host="127.0.0.1", port=0, log_dir=Path(args.logs), time_limit_ms=args.time_limit_ms,
                          include_random_agent=args.random_agent, random_agent_seed=0, verbosity=args.verbose)
    server = TournamentServer(config)
    await server.start()
    procs = [await asyncio.create_subprocess_exec(*agent_argv(choice, i, server.port))
             for i, choice in enumerate(args.agents, start=1)]
    try:
        await server.wait_for_records(n * (n - 1))
    finally:
        await server.stop()
        for p in procs:
            await p.wait()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--logs", default="runs/tournament")
    parser.add_argument("--agents", nargs="+", default=["greedy", "alphabeta:4", "alphabeta:3"])
    parser.add_argument("--random-agent", action="store_true")
    parser.add_argument("--time-limit-ms", type=int, default=5000)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    args = parser.parse_args()

    asyncio.run(run(args))
    records, random_id = load_tournament(args.logs)
    bad = [r.game_id for r in records if not verify_replay(r).ok]
    write_report(records, random_id, sys.stdout)
    print(f"\n{len(records)} games logged in {args.logs}; replay check: "
          f"{'all ok' if not bad else 'FAILED ' + ', '.join(bad)}")


if __name__ == "__main__":
    main()
