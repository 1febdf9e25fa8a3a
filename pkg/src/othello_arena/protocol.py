"""Line-delimited JSON wire protocol between agents and the tournament server.

Every frame is one UTF-8 line terminated by ``\\n`` holding a flat JSON
object whose first key is ``"type"``.  Output is canonical (fixed key order,
no whitespace); input accepts any key order and insignificant whitespace.

Message catalogue (``type`` tag, then fields in canonical order)::

    register     name                          agent -> server
    move         game_id, move[, ply]          agent -> server
    registered   client_id                     server -> agent
    ping                                        either way
    pong                                        either way
    game_start   game_id, your_color, opponent_name
    move_request game_id, ply, board, to_move, passes, deadline_ms
    bad_move     game_id, reason
    game_end     game_id, result, black_count, white_count
    error        code, text

``board`` is 64 characters, row-major from a1 to h8, using ``.``, ``B`` and
``W``; ``to_move`` is ``B`` or ``W``; ``move`` is a square such as ``d3`` or
the literal ``pass``; ``your_color`` is ``black``/``white`` and ``result``
is ``black``/``white``/``draw``.  ``ply`` in a ``move`` reply is optional;
when present it must echo the request's ``ply`` so the server can drop
replies that arrive after their deadline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, List, Optional, Union

from othello_arena.game import Color, GameState, Move, format_move, parse_move

MAX_FRAME_BYTES = 8192


class ProtocolError(Exception):
    """Base class for frame decoding failures."""


class MalformedFrameError(ProtocolError):
    pass


class UnknownTypeError(ProtocolError):
    pass


class MissingFieldError(ProtocolError):
    pass


class InvalidFieldError(ProtocolError):
    pass


class OversizeFrameError(ProtocolError):
    pass


# --------------------------------------------------------------------------
# State serialization


def board_string(state: GameState) -> str:
    black, white = state.black, state.white
    return "".join(
        "B" if black >> i & 1 else "W" if white >> i & 1 else "." for i in range(64)
    )


def serialize_state(state: GameState) -> Dict[str, Any]:
    """Flat wire fields describing ``state``: board, to_move, passes."""
    return {"board": board_string(state), "to_move": state.to_move.letter, "passes": state.passes}


def parse_state(fields: Dict[str, Any]) -> GameState:
    board = fields["board"]
    if not isinstance(board, str) or len(board) != 64 or set(board) - set(".BW"):
        raise InvalidFieldError("board must be 64 characters of '.', 'B', 'W'")
    try:
        to_move = Color.from_letter(fields["to_move"])
    except (ValueError, TypeError):
        raise InvalidFieldError("to_move must be 'B' or 'W'") from None
    passes = fields["passes"]
    if type(passes) is not int or not 0 <= passes <= 2:
        raise InvalidFieldError("passes must be 0, 1 or 2")
    black = white = 0
    for i, ch in enumerate(board):
        if ch == "B":
            black |= 1 << i
        elif ch == "W":
            white |= 1 << i
    return GameState(black, white, to_move, passes)


def _result_text(winner: Optional[Color]) -> str:
    return "draw" if winner is None else winner.value


def _parse_result(text: Any) -> Optional[Color]:
    if text == "draw":
        return None
    try:
        return Color(text)
    except ValueError:
        raise InvalidFieldError(f"bad result {text!r}") from None


# --------------------------------------------------------------------------
# Messages


def _str(obj: dict, key: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise InvalidFieldError(f"{key} must be a string")
    return value


def _int(obj: dict, key: str) -> int:
    value = obj[key]
    if type(value) is not int:
        raise InvalidFieldError(f"{key} must be an integer")
    return value


@dataclass(frozen=True)
class Register:
    TYPE: ClassVar[str] = "register"
    FIELDS: ClassVar[tuple] = ("name",)
    name: str

    def to_fields(self):
        return {"name": self.name}

    @classmethod
    def from_fields(cls, obj):
        return cls(_str(obj, "name"))


@dataclass(frozen=True)
class MoveReply:
    TYPE: ClassVar[str] = "move"
    FIELDS: ClassVar[tuple] = ("game_id", "move")
    game_id: str
    move: Move
    ply: Optional[int] = None

    def to_fields(self):
        fields = {"game_id": self.game_id, "move": format_move(self.move)}
        if self.ply is not None:
            fields["ply"] = self.ply
        return fields

    @classmethod
    def from_fields(cls, obj):
        try:
            move = parse_move(_str(obj, "move"))
        except ValueError:
            raise InvalidFieldError(f"bad move text {obj['move']!r}") from None
        ply = _int(obj, "ply") if "ply" in obj else None
        return cls(_str(obj, "game_id"), move, ply)


@dataclass(frozen=True)
class Registered:
    TYPE: ClassVar[str] = "registered"
    FIELDS: ClassVar[tuple] = ("client_id",)
    client_id: str

    def to_fields(self):
        return {"client_id": self.client_id}

    @classmethod
    def from_fields(cls, obj):
        return cls(_str(obj, "client_id"))


@dataclass(frozen=True)
class Ping:
    TYPE: ClassVar[str] = "ping"
    FIELDS: ClassVar[tuple] = ()

    def to_fields(self):
        return {}

    @classmethod
    def from_fields(cls, obj):
        return cls()


@dataclass(frozen=True)
class Pong:
    TYPE: ClassVar[str] = "pong"
    FIELDS: ClassVar[tuple] = ()

    def to_fields(self):
        return {}

    @classmethod
    def from_fields(cls, obj):
        return cls()


@dataclass(frozen=True)
class GameStart:
    TYPE: ClassVar[str] = "game_start"
    FIELDS: ClassVar[tuple] = ("game_id", "your_color", "opponent_name")
    game_id: str
    your_color: Color
    opponent_name: str

    def to_fields(self):
        return {
            "game_id": self.game_id,
            "your_color": self.your_color.value,
            "opponent_name": self.opponent_name,
        }

    @classmethod
    def from_fields(cls, obj):
        try:
            color = Color(obj["your_color"])
        except ValueError:
            raise InvalidFieldError("your_color must be 'black' or 'white'") from None
        return cls(_str(obj, "game_id"), color, _str(obj, "opponent_name"))


@dataclass(frozen=True)
class MoveRequest:
    TYPE: ClassVar[str] = "move_request"
    FIELDS: ClassVar[tuple] = ("game_id", "ply", "board", "to_move", "passes", "deadline_ms")
    game_id: str
    ply: int
    state: GameState
    deadline_ms: int

    def to_fields(self):
        fields = {"game_id": self.game_id, "ply": self.ply}
        fields.update(serialize_state(self.state))
        fields["deadline_ms"] = self.deadline_ms
        return fields

    @classmethod
    def from_fields(cls, obj):
        return cls(_str(obj, "game_id"), _int(obj, "ply"), parse_state(obj), _int(obj, "deadline_ms"))


@dataclass(frozen=True)
class BadMove:
    TYPE: ClassVar[str] = "bad_move"
    FIELDS: ClassVar[tuple] = ("game_id", "reason")
    game_id: str
    reason: str

    def to_fields(self):
        return {"game_id": self.game_id, "reason": self.reason}

    @classmethod
    def from_fields(cls, obj):
        return cls(_str(obj, "game_id"), _str(obj, "reason"))


@dataclass(frozen=True)
class GameEnd:
    TYPE: ClassVar[str] = "game_end"
    FIELDS: ClassVar[tuple] = ("game_id", "result", "black_count", "white_count")
    game_id: str
    result: Optional[Color]  # None is a draw
    black_count: int
    white_count: int

    def to_fields(self):
        return {
            "game_id": self.game_id,
            "result": _result_text(self.result),
            "black_count": self.black_count,
            "white_count": self.white_count,
        }

    @classmethod
    def from_fields(cls, obj):
        return cls(
            _str(obj, "game_id"),
            _parse_result(obj["result"]),
            _int(obj, "black_count"),
            _int(obj, "white_count"),
        )


@dataclass(frozen=True)
class Error:
    TYPE: ClassVar[str] = "error"
    FIELDS: ClassVar[tuple] = ("code", "text")
    code: str
    text: str

    def to_fields(self):
        return {"code": self.code, "text": self.text}

    @classmethod
    def from_fields(cls, obj):
        return cls(_str(obj, "code"), _str(obj, "text"))


Message = Union[
    Register, MoveReply, Registered, Ping, Pong, GameStart, MoveRequest, BadMove, GameEnd, Error
]

MESSAGE_TYPES = {
    cls.TYPE: cls
    for cls in (Register, MoveReply, Registered, Ping, Pong, GameStart, MoveRequest, BadMove, GameEnd, Error)
}


def encode_message(message: Message) -> bytes:
    obj = {"type": message.TYPE}
    obj.update(message.to_fields())
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8") + b"\n"


def decode_message(frame: bytes) -> Message:
    """Decode one frame; the trailing newline is optional."""
    if len(frame) > MAX_FRAME_BYTES:
        raise OversizeFrameError(f"frame of {len(frame)} bytes exceeds {MAX_FRAME_BYTES}")
    try:
        text = frame.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedFrameError(f"invalid UTF-8: {exc}") from None
    if text.endswith("\n"):
        text = text[:-1]
    if text.endswith("\r"):
        text = text[:-1]
    if "\n" in text or "\r" in text:
        raise MalformedFrameError("line break inside frame")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedFrameError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedFrameError("frame is not a JSON object")
    if "type" not in obj:
        raise MissingFieldError("missing field 'type'")
    tag = obj["type"]
    cls = MESSAGE_TYPES.get(tag) if isinstance(tag, str) else None
    if cls is None:
        raise UnknownTypeError(f"unknown message type {tag!r}")
    for name in cls.FIELDS:
        if name not in obj:
            raise MissingFieldError(f"{tag}: missing field {name!r}")
    return cls.from_fields(obj)


class FrameBuffer:
    """Reassembles LF-terminated frames from arbitrary byte chunks.

    A line longer than the frame limit is cut off: its first
    ``limit + 1`` bytes are returned once (so ``decode_message`` reports it as
    oversize) and the remainder, up to the next LF, is dropped.
    """

    def __init__(self, limit: int = MAX_FRAME_BYTES):
        self.limit = limit
        self._buf = bytearray()
        self._discarding = False

    def feed(self, data: bytes) -> List[bytes]:
        self._buf += data
        frames = []
        while True:
            end = self._buf.find(b"\n")
            if end < 0:
                if len(self._buf) > self.limit:
                    if not self._discarding:
                        frames.append(bytes(self._buf[: self.limit + 1]))
                        self._discarding = True
                    self._buf.clear()
                return frames
            line = bytes(self._buf[: end + 1])
            del self._buf[: end + 1]
            if self._discarding:
                self._discarding = False
                continue
            frames.append(line)

    @property
    def pending(self) -> int:
        return len(self._buf)
