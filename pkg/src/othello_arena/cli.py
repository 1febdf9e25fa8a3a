"""Command-line entry points: ``othello-server``, ``othello-agent``, ``othello-replay``.

Settings are resolved as built-in defaults, then the environment (log
directory only), then a TOML config file, then explicit flags.
"""

from __future__ import annotations

import argparse
import asyncio
import dataclasses
import json
import logging
import os
import signal
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from othello_arena.agents import (
    DEFAULT_SAFETY_MARGIN_MS,
    AgentConfig,
    AlphaBetaStrategy,
    GreedyStrategy,
    MctsStrategy,
    RandomStrategy,
    Strategy,
    agent_loop,
)
from othello_arena.game import IllegalMoveError, format_move
from othello_arena.mcts import DEFAULT_EXPLORATION
from othello_arena.replay import (
    LogParseError,
    load_game_log,
    load_tournament,
    render_ascii,
    replay_states,
    verify_replay,
    write_report,
)
from othello_arena.search import DEFAULT_HEURISTIC, MAX_PLIES, Heuristic, SearchLimits
from othello_arena.server import ServerConfig, TournamentServer

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

LOG_DIR_ENV = "OTHELLO_LOG_DIR"
STRATEGIES = ("random", "greedy", "alphabeta", "mcts")


class ConfigError(ValueError):
    pass


def load_toml(path: Path) -> Dict[str, Any]:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_heuristic(path: Path) -> Heuristic:
    """Read heuristic weights from a ``.toml`` or ``.json`` file."""
    path = Path(path)
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        data = load_toml(path)
    data = data.get("heuristic", data)
    try:
        return Heuristic.from_mapping(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad heuristic: {exc}") from exc


def _section(path: Optional[str], name: str, allowed: Sequence[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    data = load_toml(Path(path)).get(name, {})
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"{path}: unknown [{name}] keys: {', '.join(unknown)}")
    return data


def _merge(defaults: Dict[str, Any], *layers: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(defaults)
    for layer in layers:
        out.update({k: v for k, v in layer.items() if v is not None})
    return out


def _setup_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


# -- server ------------------------------------------------------------------

_SERVER_KEYS = {
    "bind": "host",
    "port": "port",
    "time_limit_ms": "time_limit_ms",
    "logs": "log_dir",
    "random_agent": "include_random_agent",
    "random_seed": "random_agent_seed",
    "bad_move_cap": "bad_move_cap",
    "verbosity": "verbosity",
    "register_timeout_s": "register_timeout_s",
    "ping_interval_s": "ping_interval_s",
}


def server_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="othello-server", description="Run an othello tournament server.")
    p.add_argument("--config", help="TOML file with a [server] table")
    p.add_argument("--bind", help="address to listen on (default 0.0.0.0)")
    p.add_argument("--port", type=int, help="TCP port (default 8000)")
    p.add_argument("--time-limit-ms", type=int, help="per-move deadline in ms (default 5000)")
    p.add_argument("--logs", help=f"log directory (default ./tournament, or ${LOG_DIR_ENV})")
    p.add_argument("--random-agent", action=argparse.BooleanOptionalAction, default=None,
                   help="register the built-in random agent (default off)")
    p.add_argument("--random-seed", type=int, help="seed for the built-in random agent")
    p.add_argument("--bad-move-cap", type=int, help="bad moves that forfeit a game (default 10)")
    p.add_argument("--register-timeout-s", type=float, help="time allowed for the register frame (default 10)")
    p.add_argument("--ping-interval-s", type=float, help="keepalive ping period, 0 disables (default 30)")
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="spectator output: -v game results, -vv every board")
    p.add_argument("--log-level", default="WARNING", help="Python logging level (default WARNING)")
    return p


def resolve_server_config(args: argparse.Namespace, environ=os.environ) -> ServerConfig:
    flags = {key: getattr(args, key) for key in _SERVER_KEYS if key != "verbosity"}
    flags["verbosity"] = args.verbose or None
    env = {"logs": environ.get(LOG_DIR_ENV)}
    merged = _merge({}, env, _section(args.config, "server", _SERVER_KEYS), flags)
    return ServerConfig(**{_SERVER_KEYS[k]: v for k, v in merged.items()})


async def run_server(config: ServerConfig, stop: Optional[asyncio.Event] = None) -> int:
    stop = stop or asyncio.Event()
    server = TournamentServer(config)
    try:
        await server.start()
    except OSError as exc:
        print(f"othello-server: cannot listen on {config.host}:{config.port}: {exc}", file=sys.stderr)
        return 1
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop.set)
        except (NotImplementedError, RuntimeError):
            pass
    print(f"listening on {config.host}:{server.port}; logs in {config.log_dir}", flush=True)
    try:
        await stop.wait()
    finally:
        print("shutting down: finishing the current game", flush=True)
        await server.stop()
    return 0


def server_main(argv: Optional[List[str]] = None) -> int:
    parser = server_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_server_config(args)
    except (ConfigError, ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        parser.error(str(exc))
    return asyncio.run(run_server(config))


# -- agent -------------------------------------------------------------------


@dataclass
class AgentCliConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    name: str = "agent"
    strategy: str = "random"
    seed: Optional[int] = None
    max_depth: Optional[int] = None
    time_budget_ms: Optional[float] = None
    node_budget: Optional[int] = None
    exploration: float = DEFAULT_EXPLORATION
    heuristic_file: Optional[Path] = None
    margin_ms: int = DEFAULT_SAFETY_MARGIN_MS

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r} (choose from {', '.join(STRATEGIES)})")
        if not 1 <= self.port <= 65535:
            raise ConfigError("port must be in 1..65535")

    def limits(self) -> SearchLimits:
        if self.max_depth is None and self.time_budget_ms is None and self.node_budget is None:
            if self.strategy == "alphabeta":
                return SearchLimits(max_depth=MAX_PLIES)
            return SearchLimits(time_budget_ms=5000 - self.margin_ms)
        return SearchLimits(self.max_depth, self.time_budget_ms, self.node_budget)

    def build_strategy(self) -> Strategy:
        if self.strategy == "random":
            return RandomStrategy(self.seed)
        if self.strategy == "greedy":
            return GreedyStrategy()
        if self.strategy == "alphabeta":
            heuristic = DEFAULT_HEURISTIC if self.heuristic_file is None else load_heuristic(self.heuristic_file)
            return AlphaBetaStrategy(self.limits(), heuristic)
        return MctsStrategy(self.limits(), self.exploration, self.seed)

    def agent_config(self) -> AgentConfig:
        return AgentConfig(self.host, self.port, self.name, self.build_strategy(), self.margin_ms)


def parse_address(text: str) -> tuple:
    host, sep, port = text.rpartition(":")
    if not sep:
        return text, None
    try:
        return host or "127.0.0.1", int(port)
    except ValueError:
        raise ConfigError(f"bad address {text!r}, expected host:port") from None


def agent_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="othello-agent", description="Connect a reference agent to a server.")
    p.add_argument("--config", help="TOML file with an [agent] table")
    p.add_argument("--connect", help="server address host:port (default 127.0.0.1:8000)")
    p.add_argument("--name", help="name to register under (default 'agent')")
    p.add_argument("--strategy", help=f"one of {', '.join(STRATEGIES)} (default random)")
    p.add_argument("--seed", type=int, help="RNG seed for random and mcts")
    p.add_argument("--max-depth", type=int, help="alpha-beta depth limit")
    p.add_argument("--time-budget-ms", type=float, help="search time cap per move")
    p.add_argument("--node-budget", type=int, help="node cap (alpha-beta) or playouts (mcts)")
    p.add_argument("--exploration", type=float, help="UCT exploration constant (default sqrt 2)")
    p.add_argument("--heuristic", help="TOML or JSON file of evaluation weights")
    p.add_argument("--margin-ms", type=int, help=f"reply safety margin (default {DEFAULT_SAFETY_MARGIN_MS})")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log games (-vv for debug)")
    return p


_AGENT_KEYS = tuple(f.name for f in dataclasses.fields(AgentCliConfig)) + ("connect", "heuristic")


def resolve_agent_config(args: argparse.Namespace) -> AgentCliConfig:
    file_layer = _section(args.config, "agent", _AGENT_KEYS)
    flags = {
        "name": args.name,
        "strategy": args.strategy,
        "seed": args.seed,
        "max_depth": args.max_depth,
        "time_budget_ms": args.time_budget_ms,
        "node_budget": args.node_budget,
        "exploration": args.exploration,
        "heuristic_file": args.heuristic,
        "margin_ms": args.margin_ms,
    }
    layers = []
    for layer, connect, heuristic in ((file_layer, file_layer.pop("connect", None), file_layer.pop("heuristic", None)),
                                      (flags, args.connect, None)):
        extra = {}
        if connect is not None:
            extra["host"], extra["port"] = parse_address(connect)
        if heuristic is not None:
            extra["heuristic_file"] = heuristic
        layers.append({**layer, **extra})
    merged = _merge({}, *layers)
    if merged.get("heuristic_file") is not None:
        merged["heuristic_file"] = Path(merged["heuristic_file"])
    return AgentCliConfig(**merged)


def agent_main(argv: Optional[List[str]] = None) -> int:
    parser = agent_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    try:
        cli_config = resolve_agent_config(args)
        config = cli_config.agent_config()
    except (ConfigError, ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        parser.error(str(exc))
    try:
        return agent_loop(config)
    except KeyboardInterrupt:
        return 130


# -- replay ------------------------------------------------------------------


def _log_paths(paths: Sequence[str]) -> List[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.log")))
        else:
            out.append(p)
    return out


def cmd_verify(paths: Sequence[str]) -> int:
    files = _log_paths(paths)
    if not files:
        print("no log files given", file=sys.stderr)
        return 1
    status = 0
    for path in files:
        try:
            record = load_game_log(path)
        except (OSError, LogParseError) as exc:
            print(f"{path}: ERROR {exc}")
            status = 1
            continue
        report = verify_replay(record)
        if report.ok:
            print(f"{path}: ok ({report.plies_replayed} plies)")
        else:
            status = 1
            print(f"{path}: {len(report.discrepancies)} discrepancies")
            for d in report.discrepancies:
                print(f"  {d}")
    return status


def cmd_show(path: str, ply: Optional[int]) -> int:
    try:
        record = load_game_log(path)
    except (OSError, LogParseError) as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return 1
    try:
        states = replay_states(record)
    except IllegalMoveError as exc:
        print(f"{path}: log does not replay: {exc}", file=sys.stderr)
        return 1
    if ply is not None:
        if not 0 <= ply < len(states):
            print(f"--ply must be in 0..{len(states) - 1}", file=sys.stderr)
            return 1
        print(f"{record.game_id} after ply {ply}")
        print(render_ascii(states[ply]))
        return 0
    print(f"{record.game_id}: {record.black_name} (black) vs {record.white_name} (white)")
    print(render_ascii(states[0]))
    for i, rec in enumerate(record.moves[: len(states) - 1], start=1):
        shown = "-" if rec.move is None else format_move(rec.move)
        print(f"\nply {i}: {rec.player.value} {shown} [{rec.verdict.value}]")
        print(render_ascii(states[i]))
    return 0


def cmd_report(directory: str, out: Optional[str]) -> int:
    if not Path(directory).is_dir():
        print(f"{directory}: not a directory", file=sys.stderr)
        return 1
    try:
        records, random_id = load_tournament(directory)
    except (OSError, LogParseError) as exc:
        print(f"{directory}: {exc}", file=sys.stderr)
        return 1
    write_report(records, random_id, sys.stdout if out is None else Path(out))
    return 0


def replay_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="othello-replay", description="Inspect and verify game logs.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="re-simulate logs; exit 1 on any discrepancy")
    v.add_argument("paths", nargs="+", help="log files or directories of logs")
    s = sub.add_parser("show", help="render a game as ASCII boards")
    s.add_argument("path")
    s.add_argument("--ply", type=int, help="only the board after this many plies")
    r = sub.add_parser("report", help="standings and results matrix for a log directory")
    r.add_argument("directory")
    r.add_argument("--out", help="write the report here instead of stdout")
    return p


def replay_main(argv: Optional[List[str]] = None) -> int:
    args = replay_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args.paths)
    if args.command == "show":
        return cmd_show(args.path, args.ply)
    return cmd_report(args.directory, args.out)


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    commands = {"server": server_main, "agent": agent_main, "replay": replay_main}
    if not argv or argv[0] not in commands:
        print("usage: python -m othello_arena {server,agent,replay} ...", file=sys.stderr)
        return 2
    return commands[argv[0]](argv[1:])
