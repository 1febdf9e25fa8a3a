import random

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synthetic_record
from othello_arena.game import Color
from othello_arena.records import GameRecord, MoveRecord, Verdict
from othello_arena.standings import compute_standings


def result(gid, black, white, winner, counts=(33, 31), bad=(0, 0)):
    rec = GameRecord(gid, black, black.upper(), white, white.upper(), 0.0)
    for color, n in zip((Color.BLACK, Color.WHITE), bad):
        rec.moves.extend(MoveRecord(len(rec.moves), color, 0.0, None, None, Verdict.TIMEOUT) for _ in range(n))
    rec.winner = winner
    rec.black_count, rec.white_count = counts
    return rec


def test_empty():
    assert compute_standings([]) == []


def test_two_wins():
    rows = compute_standings([
        result("g1", "a", "b", Color.BLACK),
        result("g2", "b", "a", Color.WHITE, (20, 44)),
    ])
    assert [(r.client_id, r.points, r.rank) for r in rows] == [("a", 2.0, 1), ("b", 0.0, 2)]


def test_bad_moves_break_ties():
    rows = compute_standings([
        result("g1", "a", "b", None, (32, 32), bad=(3, 0)),
    ])
    assert [r.client_id for r in rows] == ["b", "a"]
    assert rows[1].total_bad_moves == 3


def test_disc_differential_then_name_break_ties():
    rows = compute_standings([
        result("g1", "x", "y", Color.BLACK, (40, 24)),
        result("g2", "y", "x", Color.BLACK, (33, 31)),
    ])
    assert [r.client_id for r in rows] == ["x", "y"]
    rows = compute_standings([result("g1", "b", "a", None, (32, 32))])
    assert [r.name for r in rows] == ["A", "B"]


def test_beat_random_flag():
    rows = compute_standings([
        result("g1", "a", "r", Color.BLACK),
        result("g2", "r", "c", Color.BLACK),
    ], random_agent_id="r")
    flags = {r.client_id: r.beat_random for r in rows}
    assert flags == {"a": True, "r": False, "c": False}


ids = st.sampled_from(["c1", "c2", "c3", "c4", "c5"])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(ids, ids, st.integers(0, 10**6)), max_size=12), st.booleans())
def test_ranks_are_permutation_and_deterministic(pairs, shuffle):
    records = [
        synthetic_record(random.Random(seed), f"g{i}", 0.1, (b, b.upper()), (w, w.upper()))
        for i, (b, w, seed) in enumerate(pairs) if b != w
    ]
    rows = compute_standings(records, "c1")
    assert sorted(r.rank for r in rows) == list(range(1, len(rows) + 1))
    for r in rows:
        assert r.points == r.wins + 0.5 * r.draws
        assert r.games == r.wins + r.draws + r.losses
    again = list(records)
    if shuffle:
        random.Random(0).shuffle(again)
    assert [(r.client_id, r.rank) for r in compute_standings(again, "c1")] == [(r.client_id, r.rank) for r in rows]
