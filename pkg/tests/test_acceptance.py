"""Acceptance criteria, one test each, each printing a single PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` or as a script with
``python tests/test_acceptance.py``.
"""

import asyncio
import os
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import naive_othello as naive  # noqa: E402
from arena_helpers import ScriptedClient, illegal_policy, random_policy  # noqa: E402
from conftest import random_reachable_state, state_from_text  # noqa: E402
from positions import WIN_IN_ONE_BOARD, WIN_IN_ONE_MOVE  # noqa: E402
from othello_arena.agents import AlphaBetaStrategy, RandomStrategy  # noqa: E402
from othello_arena.game import (  # noqa: E402
    PASS,
    Color,
    Coord,
    apply_move,
    final_result,
    initial_state,
    is_terminal,
    legal_moves,
    perft,
)
from othello_arena.mcts import mcts_choose  # noqa: E402
from othello_arena.protocol import (  # noqa: E402
    BadMove,
    Error,
    FrameBuffer,
    GameEnd,
    GameStart,
    MoveReply,
    MoveRequest,
    Ping,
    Pong,
    Register,
    Registered,
    decode_message,
    encode_message,
)
from othello_arena.records import Termination, Verdict  # noqa: E402
from othello_arena.replay import load_game_log, load_tournament, verify_replay  # noqa: E402
from othello_arena.search import SearchLimits, TranspositionTable, alphabeta, minimax, negamax  # noqa: E402
from othello_arena.server import ServerConfig, TournamentServer  # noqa: E402

_lines = []


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    _lines.append(line)
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    assert ok, line


def _server(tmp_path, **kw):
    kw.setdefault("ping_interval_s", 0)
    return TournamentServer(ServerConfig(host="127.0.0.1", port=0, log_dir=tmp_path, **kw), spectator=open(os.devnull, "w"))


# 1 -------------------------------------------------------------------------


def test_1_perft_matches_naive_generator():
    t0 = time.perf_counter()
    board = naive.start_board()
    pairs = [(perft(initial_state(), d), naive.perft(board, "B", 0, d)) for d in range(1, 6)]
    elapsed = time.perf_counter() - t0
    ok = all(a == b for a, b in pairs) and pairs[0][0] == 4 and elapsed < 10
    report(1, "perft d=1..5 vs naive generator", ok,
           f"{[a for a, _ in pairs]} vs {[b for _, b in pairs]} in {elapsed:.1f}s (< 10s)")


# 2 -------------------------------------------------------------------------


def _depth_for(i):
    # every position at depths 1-3, every 4th also at 4, every 8th also at 5
    return [d for d in (1, 2, 3, 4, 5) if d <= 3 or (d == 4 and i % 4 == 0) or (d == 5 and i % 8 == 0)]


def test_2_search_equivalence():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    mismatches = []
    checks = 0
    positions = 200
    for i in range(positions):
        s = random_reachable_state(rng, 0, 59)
        for d in _depth_for(i):
            mm, nm, ab = minimax(s, d), negamax(s, d), alphabeta(s, d)
            tt = alphabeta(s, d, tt=TranspositionTable(14))
            checks += 1
            if not (mm.value == nm.value == ab.value == tt.value
                    and mm.best_move == nm.best_move == ab.best_move == tt.best_move):
                mismatches.append((i, d))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 120
    report(2, "minimax = negamax = alpha-beta = alpha-beta+TT", ok,
           f"{positions} positions, {checks} searches (depths 1-5), {len(mismatches)} mismatches, "
           f"{elapsed:.0f}s (< 120s)")


# 3 -------------------------------------------------------------------------


def _text(rng):
    alphabet = "abcdefXYZ0123 _-\"\\/\n\t{}[]:,é漢😀 "
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 24)))


def _random_message(rng):
    gid, color = _text(rng), rng.choice([Color.BLACK, Color.WHITE])
    move = PASS if rng.random() < 0.1 else Coord(rng.randrange(8), rng.randrange(8))
    kind = rng.randrange(10)
    if kind == 0:
        return Register(_text(rng))
    if kind == 1:
        return MoveReply(gid, move, rng.choice([None, rng.randrange(200)]))
    if kind == 2:
        return Registered(_text(rng))
    if kind == 3:
        return Ping()
    if kind == 4:
        return Pong()
    if kind == 5:
        return GameStart(gid, color, _text(rng))
    if kind == 6:
        return MoveRequest(gid, rng.randrange(200), random_reachable_state(rng, 0, 60), rng.randrange(10**6))
    if kind == 7:
        return BadMove(gid, _text(rng))
    if kind == 8:
        return GameEnd(gid, rng.choice([None, color]), rng.randrange(65), rng.randrange(65))
    return Error(_text(rng), _text(rng))


def test_3_protocol_fuzz_round_trip():
    rng = random.Random(3)
    cases = 10_000
    batch = [_random_message(rng) for _ in range(cases)]
    direct = sum(decode_message(encode_message(m)) == m for m in batch)
    stream = b"".join(encode_message(m) for m in batch)
    buf = FrameBuffer()
    frames = []
    for i in range(len(stream)):
        frames.extend(buf.feed(stream[i:i + 1]))
    streamed = [decode_message(f) for f in frames]
    same_stream = streamed == batch and buf.pending == 0
    ok = direct == cases and same_stream
    report(3, "protocol round trip", ok,
           f"{direct}/{cases} direct, 1-byte-chunk stream of {len(stream)} bytes "
           f"{'identical' if same_stream else 'DIFFERS'}")


# 4 -------------------------------------------------------------------------


def test_4_deadline_and_bad_move_rules(tmp_path):
    limit_ms = 5000
    eps = 0.15

    def slow_once(req):
        # only the very first request of the tournament is late
        if req.ply == 0 and not slow_once.done:
            slow_once.done = True
            return limit_ms / 1000 + eps, MoveReply(req.game_id, legal_moves(req.state)[0], req.ply)
        return random_policy(1)(req)
    slow_once.done = False

    async def run(policy, cap_dir):
        server = _server(cap_dir, time_limit_ms=limit_ms)
        await server.start()
        a = await ScriptedClient("offender", policy).connect(server.port)
        b = await ScriptedClient("fair", random_policy(2)).connect(server.port)
        try:
            await server.wait_for_records(1, 120)
        finally:
            await server.stop()
            await a.close()
            await b.close()
        return server.records[0], a

    slow_dir, bad_dir = tmp_path / "slow", tmp_path / "illegal"
    rec, _ = asyncio.run(run(slow_once, slow_dir))
    first, second = rec.moves[0], rec.moves[1]
    slow_ok = (first.verdict is Verdict.TIMEOUT and first.player is Color.BLACK
               and second.player is Color.WHITE and second.verdict is Verdict.OK
               and verify_replay(load_game_log(slow_dir / "g1.log")).ok)

    rec, offender = asyncio.run(run(illegal_policy(), bad_dir))
    black_moves = [m for m in rec.moves if m.player is Color.BLACK]
    cap_ok = (all(m.verdict is Verdict.ILLEGAL for m in black_moves) and len(black_moves) == 10
              and any(m.player is Color.WHITE and m.verdict is Verdict.OK for m in rec.moves)
              and rec.termination is Termination.BAD_MOVE_CAP and rec.winner is Color.WHITE
              and sum(1 for m in offender.received if isinstance(m, BadMove) and m.game_id == "g1") == 10
              and verify_replay(load_game_log(bad_dir / "g1.log")).ok)
    report(4, "deadline and bad-move semantics", slow_ok and cap_ok,
           f"reply at deadline+{int(eps * 1000)}ms -> {first.verdict.value}, next mover {second.player.value}; "
           f"illegal agent -> {len(black_moves)} x bad_move_illegal, {rec.termination.value}")


# 5 -------------------------------------------------------------------------


def test_5_end_to_end_tournament(tmp_path):
    env = dict(os.environ, PYTHONUNBUFFERED="1")
    t0 = time.perf_counter()

    async def main():
        server = _server(tmp_path, include_random_agent=True, random_agent_seed=5)
        await server.start()
        agents = [("greedy", []), ("alphabeta-a", ["--max-depth", "4"]), ("alphabeta-b", ["--max-depth", "4"])]
        procs = []
        for name, extra in agents:
            strategy = "greedy" if name == "greedy" else "alphabeta"
            procs.append(await asyncio.create_subprocess_exec(
                sys.executable, "-m", "othello_arena", "agent", "--connect", f"127.0.0.1:{server.port}",
                "--name", name, "--strategy", strategy, *extra, env=env,
                stdout=asyncio.subprocess.DEVNULL, stderr=asyncio.subprocess.DEVNULL))
        try:
            await server.wait_for_records(12, 600)
            await server.wait_idle(60)
        finally:
            await server.stop()
            codes = [await asyncio.wait_for(p.wait(), 30) for p in procs]
        return server, codes

    server, codes = asyncio.run(main())
    elapsed = time.perf_counter() - t0
    logs = sorted(tmp_path.glob("*.log"))
    records, random_id = load_tournament(tmp_path)
    verified = sum(verify_replay(r).ok for r in records)
    ranks = sorted(r.rank for r in server.standings())
    ok = (len(logs) == 12 and verified == 12 and ranks == [1, 2, 3, 4] and elapsed < 600
          and random_id == server.random_agent_id and codes == [0, 0, 0])
    order = ", ".join(f"{r.rank}:{r.name}" for r in server.standings())
    report(5, "4-agent double round robin", ok,
           f"{len(logs)} logs, {verified} verified, ranks {order}, {elapsed:.0f}s (< 600s)")


# 6 -------------------------------------------------------------------------


def test_6_alphabeta_beats_random():
    rng_seed = 6
    games, wins = 100, 0
    t0 = time.perf_counter()
    for g in range(games):
        ab = AlphaBetaStrategy(SearchLimits(max_depth=4))
        rnd = RandomStrategy(rng_seed * 1000 + g)
        ab_color = Color.BLACK if g % 2 == 0 else Color.WHITE
        s = initial_state()
        while not is_terminal(s):
            s = apply_move(s, (ab if s.to_move is ab_color else rnd).choose(s))
        wins += final_result(s).winner is ab_color
    report(6, "alpha-beta depth 4 vs random", wins >= 95,
           f"{wins}/{games} wins, colors balanced 50/50, {time.perf_counter() - t0:.0f}s (need >= 95)")


# 7 -------------------------------------------------------------------------


def test_7_mcts_finds_win_in_one():
    board = naive.board_from_text(WIN_IN_ONE_BOARD)
    win = Coord.parse(WIN_IN_ONE_MOVE)
    verified = True
    for r, c in naive.placements(board, "B"):
        after = naive.play(board, "B", r, c)
        if (r, c) == (win.row, win.col):
            verified &= (not naive.placements(after, "W") and not naive.placements(after, "B")
                         and naive.margin(after, "B") > 0)
        else:
            verified &= -naive.solve(after, "W", 0) < 0
    s = state_from_text(WIN_IN_ONE_BOARD, Color.BLACK)
    rng = random.Random(7)
    hits = sum(mcts_choose(s, SearchLimits(node_budget=10_000), rng=rng).best_move == win for _ in range(100))
    report(7, "MCTS on a verified win-in-1", verified and hits >= 95,
           f"position verified by exhaustive search: {verified}; {hits}/100 trials chose {win} (need >= 95)")


# 8 -------------------------------------------------------------------------


def test_8_replay_integrity(tmp_path):
    def reference_random(seed):
        strategy = RandomStrategy(seed)
        return lambda req: (0, MoveReply(req.game_id, strategy.choose(req.state), req.ply))

    async def main():
        server = _server(tmp_path, time_limit_ms=2000)
        await server.start()
        try:
            for k in range(25):
                a = await ScriptedClient(f"rand{2 * k}", reference_random(2 * k)).connect(server.port)
                b = await ScriptedClient(f"rand{2 * k + 1}", reference_random(2 * k + 1)).connect(server.port)
                await server.wait_for_records(2 * (k + 1), 60)
                await a.close()
                await b.close()
        finally:
            await server.stop()
        return server

    server = asyncio.run(main())
    logs = sorted(tmp_path.glob("*.log"))
    discrepancies = sum(len(verify_replay(load_game_log(p)).discrepancies) for p in logs)
    finished = sum(r.termination is Termination.FINISHED for r in server.records)
    ok = len(logs) == 50 and discrepancies == 0 and finished == 50
    report(8, "replay integrity of random-vs-random server games", ok,
           f"{len(logs)} logs, {finished} finished normally, {discrepancies} discrepancies")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
