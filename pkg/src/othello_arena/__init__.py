"""Othello tournament stack: rules, search agents, wire protocol, server, replay."""

from othello_arena.game import (
    PASS,
    Color,
    Coord,
    Finished,
    GameState,
    IllegalMoveError,
    apply_move,
    flips_for,
    initial_state,
    legal_moves,
    perft,
    status,
)

__version__ = "0.1.0"

__all__ = [
    "PASS",
    "Color",
    "Coord",
    "Finished",
    "GameState",
    "IllegalMoveError",
    "apply_move",
    "flips_for",
    "initial_state",
    "legal_moves",
    "perft",
    "status",
]
