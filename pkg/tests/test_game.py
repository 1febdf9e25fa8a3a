import random

import pytest
from hypothesis import given, settings

import naive_othello as naive
from conftest import reachable_states, random_playout_states, state_from_text, state_to_text
from othello_arena.game import (
    PASS,
    Color,
    Coord,
    Finished,
    IllegalMoveError,
    ONGOING,
    apply_move,
    flips_for,
    forfeit_turn,
    initial_state,
    legal_moves,
    parse_move,
    perft,
    status,
)


def sq(text):
    return Coord.parse(text)


def test_coord_text_round_trip():
    for i in range(64):
        c = Coord.from_index(i)
        assert Coord.parse(str(c)) == c
    assert str(Coord(3, 2)) == "d3"
    assert Coord.parse("a1").index == 0
    assert Coord.parse("h8").index == 63


@pytest.mark.parametrize("bad", ["", "i1", "a9", "a0", "A1", "d33", "pass"])
def test_coord_parse_rejects(bad):
    with pytest.raises(ValueError):
        Coord.parse(bad)


def test_parse_move_pass_literal():
    assert parse_move("pass") is PASS
    assert str(PASS) == "pass"
    assert parse_move("e6") == sq("e6")


def test_color_opponent_involution():
    for c in Color:
        assert c.opponent.opponent is c
        assert c.opponent is not c


def test_initial_state():
    s = initial_state()
    assert (s.black_count, s.white_count, s.empty_count) == (2, 2, 60)
    assert s.to_move is Color.BLACK
    assert s.passes == 0
    assert s.cell(sq("d5")) is Color.BLACK and s.cell(sq("e4")) is Color.BLACK
    assert s.cell(sq("d4")) is Color.WHITE and s.cell(sq("e5")) is Color.WHITE


def test_initial_legal_moves_match_naive_scan():
    moves = legal_moves(initial_state())
    assert moves == [sq("d3"), sq("c4"), sq("f5"), sq("e6")]
    oracle = naive.placements(naive.start_board(), "B")
    assert [Coord(c, r) for r, c in oracle] == moves


def test_flips_for_examples():
    s = initial_state()
    assert flips_for(s, sq("d3")) == [sq("d4")]
    assert flips_for(s, sq("a1")) == []
    with pytest.raises(IllegalMoveError) as err:
        flips_for(s, sq("d4"))
    assert err.value.reason == "occupied"


def test_apply_d3_from_start():
    s = apply_move(initial_state(), sq("d3"))
    assert (s.black_count, s.white_count) == (4, 1)
    assert s.to_move is Color.WHITE
    assert state_to_text(s) == naive.board_to_text(naive.play(naive.start_board(), "B", 2, 3))


def test_apply_move_error_reasons():
    s = initial_state()
    for move, reason in [(sq("d4"), "occupied"), (sq("a1"), "no-flips"), (PASS, "pass-with-moves")]:
        with pytest.raises(IllegalMoveError) as err:
            apply_move(s, move)
        assert err.value.reason == reason


def blocked_state():
    # Black to move, only black discs' neighbours are black: no flip line.
    text = ["."] * 64
    text[0] = "W"
    text[63] = "B"
    return state_from_text("".join(text), Color.BLACK)


def test_no_placements_means_pass():
    s = blocked_state()
    assert legal_moves(s) == [PASS]
    after = apply_move(s, PASS)
    assert (after.black, after.white) == (s.black, s.white)
    assert after.passes == 1 and after.to_move is Color.WHITE
    assert legal_moves(after) == [PASS]
    done = apply_move(after, PASS)
    assert status(done) == Finished(None, 1, 1)
    with pytest.raises(IllegalMoveError):
        legal_moves(done)


def test_status_majority_on_full_board():
    text = "B" * 33 + "W" * 31
    s = state_from_text(text)
    assert status(s) == Finished(Color.BLACK, 33, 31)
    assert status(initial_state()) == ONGOING


def test_forfeit_turn_keeps_board_and_clears_passes():
    s = state_from_text(state_to_text(initial_state()), Color.BLACK, passes=1)
    f = forfeit_turn(s)
    assert (f.black, f.white) == (s.black, s.white)
    assert f.to_move is Color.WHITE and f.passes == 0


def test_perft_small_depths():
    s = initial_state()
    assert perft(s, 0) == 1
    assert perft(s, 1) == 4
    assert perft(s, 2) == 12


@pytest.mark.parametrize("depth", [1, 2, 3, 4, 5])
def test_perft_matches_naive_oracle(depth):
    expected = naive.perft(naive.start_board(), "B", 0, depth)
    assert perft(initial_state(), depth) == expected


def test_oracle_equivalence_within_four_plies():
    frontier = [initial_state()]
    checked = 0
    for _ in range(5):
        nxt = []
        for s in frontier:
            board = naive.board_from_text(state_to_text(s))
            oracle = [Coord(c, r) for r, c in naive.placements(board, s.to_move.letter)]
            moves = legal_moves(s)
            assert moves == (oracle or [PASS])
            checked += 1
            nxt.extend(apply_move(s, m) for m in moves)
        frontier = nxt
    assert checked == 1 + 4 + 12 + 56 + 244


@settings(max_examples=200, deadline=None)
@given(reachable_states())
def test_moves_match_naive_on_random_states(s):
    board = naive.board_from_text(state_to_text(s))
    player = s.to_move.letter
    oracle = [Coord(c, r) for r, c in naive.placements(board, player)]
    assert legal_moves(s) == (oracle or [PASS])
    for m in legal_moves(s):
        if m is PASS:
            continue
        flipped = flips_for(s, m)
        assert flipped and m not in flipped
        assert sorted(flipped) == sorted(Coord(c, r) for r, c in naive.flips(board, m.row, m.col, player))
        after = apply_move(s, m)
        assert state_to_text(after) == naive.board_to_text(naive.play(board, player, m.row, m.col))


@settings(max_examples=200, deadline=None)
@given(reachable_states())
def test_conservation_and_color_sanity(s):
    mover = s.to_move
    for m in legal_moves(s):
        after = apply_move(s, m)
        assert after.black_count + after.white_count + after.empty_count == 64
        if m is PASS:
            assert (after.black, after.white) == (s.black, s.white)
            continue
        assert after.black_count + after.white_count == s.black_count + s.white_count + 1
        before_occ = s.black | s.white
        assert (after.black | after.white) & before_occ == before_occ
        changed_to_mover = after.discs(mover) & ~s.discs(mover) & before_occ
        assert changed_to_mover == s.discs(mover.opponent) & ~after.discs(mover.opponent)
        assert after.discs(mover.opponent) & ~s.discs(mover.opponent) == 0


def test_flips_never_contain_empty_or_self(rng):
    for s in random_playout_states(rng, 40)[:-1]:
        for i in range(64):
            c = Coord.from_index(i)
            if s.cell(c) is not None:
                continue
            for f in flips_for(s, c):
                assert f != c
                assert s.cell(f) is s.to_move.opponent
