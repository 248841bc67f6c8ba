"""Versioned binary codec for register states.

Layout (all integers big-endian):

    magic b"MVRS" | version u8 | policy-kind u8 | entry count u32
    entries sorted by dot: replica u16+utf8 | counter u64 | value u32+bytes
    context count u32
    context sorted by replica: replica u16+utf8 | counter u64

Plain-order values must be strings; LWW values carry payload, timestamp,
writer and sequence inside the value bytes. Equal states always encode to
identical byte sequences.
"""

from __future__ import annotations

import struct
from typing import Any, Tuple

from .orders import LwwValue, OrderKind, ValueOrder
from .register import Dot, RegisterState, VersionVector

MAGIC = b"MVRS"
FORMAT_VERSION = 1

_KIND_TAGS = {
    OrderKind.EMPTY: 0,
    OrderKind.EXPLICIT_RELATION: 1,
    OrderKind.TOTAL_COMPARATOR: 2,
    OrderKind.LWW_TIMESTAMPED: 3,
}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


class CodecError(ValueError):
    pass


class MalformedStateError(CodecError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"malformed state at byte {offset}: {message}")


class StateVersionError(CodecError):
    def __init__(self, found: int):
        self.found = found
        super().__init__(f"unsupported state format version {found} (expected {FORMAT_VERSION})")


def encode_state(state: RegisterState) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack(">BB", FORMAT_VERSION, _KIND_TAGS[state.policy.kind])
    entries = sorted(state.entries, key=lambda e: (e[0].replica.encode(), e[0].counter))
    out += struct.pack(">I", len(entries))
    for dot, value in entries:
        _put_str(out, dot.replica)
        out += struct.pack(">Q", dot.counter)
        blob = _encode_value(state.policy.kind, value)
        out += struct.pack(">I", len(blob))
        out += blob
    context = state.context.items()
    out += struct.pack(">I", len(context))
    for replica, counter in sorted(context, key=lambda rc: rc[0].encode()):
        _put_str(out, replica)
        out += struct.pack(">Q", counter)
    return bytes(out)


def decode_state(data: bytes, policy: ValueOrder) -> RegisterState:
    cur = _Cursor(data)
    magic = cur.take(4, "magic")
    if magic != MAGIC:
        raise MalformedStateError(0, f"bad magic {magic!r}")
    version, kind_tag = struct.unpack(">BB", cur.take(2, "header"))
    if version != FORMAT_VERSION:
        raise StateVersionError(version)
    if kind_tag not in _TAG_KINDS:
        raise MalformedStateError(cur.pos - 1, f"unknown policy kind tag {kind_tag}")
    if _TAG_KINDS[kind_tag] is not policy.kind:
        raise MalformedStateError(
            cur.pos - 1,
            f"state was encoded under a {_TAG_KINDS[kind_tag].value} order, "
            f"got a {policy.kind.value} order",
        )
    (n_entries,) = struct.unpack(">I", cur.take(4, "entry count"))
    entries = set()
    for _ in range(n_entries):
        replica = _take_str(cur, "entry replica")
        (counter,) = struct.unpack(">Q", cur.take(8, "entry counter"))
        (blob_len,) = struct.unpack(">I", cur.take(4, "value length"))
        blob = cur.take(blob_len, "value bytes")
        value = _decode_value(policy.kind, blob, cur.pos - blob_len)
        if counter < 1:
            raise MalformedStateError(cur.pos, f"entry counter {counter} below one")
        dot = Dot(replica, counter)
        if any(d == dot for d, _ in entries):
            raise MalformedStateError(cur.pos, f"duplicate dot {dot}")
        entries.add((dot, value))
    (n_context,) = struct.unpack(">I", cur.take(4, "context count"))
    context = {}
    for _ in range(n_context):
        replica = _take_str(cur, "context replica")
        (counter,) = struct.unpack(">Q", cur.take(8, "context counter"))
        if replica in context:
            raise MalformedStateError(cur.pos, f"duplicate context replica {replica!r}")
        if counter == 0:
            raise MalformedStateError(cur.pos, "explicit zero context entry")
        context[replica] = counter
    if cur.pos != len(data):
        raise MalformedStateError(cur.pos, "trailing bytes")
    vv = VersionVector(context)
    for dot, _ in entries:
        if not vv.covers(dot):
            raise MalformedStateError(len(data), f"context does not cover {dot}")
    return RegisterState(frozenset(entries), vv, policy)


class _Cursor:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedStateError(self.pos, f"truncated while reading {what}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def _put_str(out: bytearray, text: str) -> None:
    blob = text.encode()
    out += struct.pack(">H", len(blob))
    out += blob


def _take_str(cur: _Cursor, what: str) -> str:
    (n,) = struct.unpack(">H", cur.take(2, what + " length"))
    blob = cur.take(n, what)
    try:
        return blob.decode()
    except UnicodeDecodeError as exc:
        raise MalformedStateError(cur.pos - n, f"{what} is not utf-8: {exc}") from None


def _encode_value(kind: OrderKind, value: Any) -> bytes:
    if kind is OrderKind.LWW_TIMESTAMPED:
        if not isinstance(value, LwwValue):
            raise CodecError(f"lww states store LwwValue, got {type(value).__name__}")
        out = bytearray()
        _put_str(out, str(value.payload))
        out += struct.pack(">q", value.timestamp)
        _put_str(out, value.writer)
        out += struct.pack(">Q", value.sequence)
        return bytes(out)
    if not isinstance(value, str):
        raise CodecError(f"only string values are encodable, got {type(value).__name__}")
    return value.encode()


def _decode_value(kind: OrderKind, blob: bytes, offset: int) -> Any:
    if kind is not OrderKind.LWW_TIMESTAMPED:
        try:
            return blob.decode()
        except UnicodeDecodeError as exc:
            raise MalformedStateError(offset, f"value is not utf-8: {exc}") from None
    cur = _Cursor(blob)
    try:
        payload = _take_str(cur, "lww payload")
        (timestamp,) = struct.unpack(">q", cur.take(8, "lww timestamp"))
        writer = _take_str(cur, "lww writer")
        (sequence,) = struct.unpack(">Q", cur.take(8, "lww sequence"))
    except MalformedStateError as exc:
        raise MalformedStateError(offset + exc.offset, "inside lww value: " + str(exc)) from None
    if cur.pos != len(blob):
        raise MalformedStateError(offset + cur.pos, "trailing bytes inside lww value")
    return LwwValue(payload, timestamp, writer, sequence)
