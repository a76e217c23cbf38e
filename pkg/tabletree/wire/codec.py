"""
Message framing:

    u32 length of the remainder | u8 kind | u64 request-id | payload

Payload fields follow the per-kind layout in LAYOUTS, integers big-endian
fixed width, byte strings u32-length-prefixed.
"""
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict

from . import DecodeError, EncodeError
from .primitives import Packer, Unpacker

MAX_FRAME = 16 * 1024 * 1024
MAX_KEY = 4096
MAX_VALUE = 1024 * 1024
HEADER_SIZE = 4 + 1 + 8


class Kind(IntEnum):
    TS_GET = 0x01
    READ = 0x02
    SCAN = 0x03
    PREPARE = 0x04
    COMMIT = 0x05
    ABORT = 0x06
    GC = 0x07
    TXN_STATUS = 0x08
    TXN_RESOLVE = 0x09
    TS_REPLY = 0x41
    READ_REPLY = 0x42
    SCAN_REPLY = 0x43
    PREPARE_REPLY = 0x44
    ACK = 0x45
    GC_REPLY = 0x47
    TXN_STATUS_REPLY = 0x48
    ERROR = 0x7F


class ReadStatus(IntEnum):
    FOUND = 0
    ABSENT = 1
    DELETED = 2


class Vote(IntEnum):
    OK = 0
    CONFLICT = 1
    LOCKED = 2


class ErrorCode(IntEnum):
    NOT_OWNER = 1
    PROTOCOL = 2
    NOT_ORACLE = 3
    BAD_REQUEST = 4
    INTERNAL = 5


# field types
U8 = "u8"
U32 = "u32"
U64 = "u64"
KEY = "key"
OPT_VALUE = "optValue"
TEXT = "text"
WRITES = "writes"
ENTRIES = "entries"

_ENUMS = {
    (Kind.READ_REPLY, "status"): ReadStatus,
    (Kind.PREPARE_REPLY, "vote"): Vote,
    (Kind.ERROR, "code"): ErrorCode,
}

LAYOUTS = {
    Kind.TS_GET: (("txnId", U64),),
    Kind.READ: (("key", KEY), ("snapshotTs", U64)),
    Kind.SCAN: (("start", KEY), ("end", KEY), ("snapshotTs", U64),
                ("limit", U32)),
    Kind.PREPARE: (("txnId", U64), ("snapshotTs", U64), ("writes", WRITES)),
    Kind.COMMIT: (("txnId", U64), ("commitTs", U64)),
    Kind.ABORT: (("txnId", U64),),
    Kind.GC: (("watermark", U64),),
    Kind.TXN_STATUS: (("txnId", U64),),
    Kind.TXN_RESOLVE: (("txnId", U64),),
    Kind.TS_REPLY: (("ts", U64),),
    Kind.READ_REPLY: (("status", U8), ("ts", U64), ("value", OPT_VALUE),
                      ("lockTxn", U64), ("staged", OPT_VALUE)),
    Kind.SCAN_REPLY: (("entries", ENTRIES),),
    Kind.PREPARE_REPLY: (("vote", U8),),
    Kind.ACK: (),
    Kind.GC_REPLY: (("removed", U64),),
    Kind.TXN_STATUS_REPLY: (("commitTs", U64),),
    Kind.ERROR: (("code", U8), ("message", TEXT)),
}

REQUEST_KINDS = frozenset([Kind.TS_GET, Kind.READ, Kind.SCAN, Kind.PREPARE,
                           Kind.COMMIT, Kind.ABORT, Kind.GC,
                           Kind.TXN_STATUS, Kind.TXN_RESOLVE])


@dataclass
class Message:
    kind: Kind
    requestId: int = 0
    payload: Dict[str, Any] = field(default_factory=dict)

    def __getattr__(self, name):
        payload = self.__dict__.get("payload")
        if payload is not None and name in payload:
            return payload[name]
        raise AttributeError(name)

    def withRequestId(self, requestId):
        return Message(self.kind, requestId, self.payload)


def message(kind, requestId=0, **payload):
    return Message(Kind(kind), requestId, payload)


def _packKey(packer, key):
    if not key:
        raise EncodeError("empty key")
    packer.blob(key, MAX_KEY)


def _packField(packer, ftype, value):
    # pylint: disable=too-many-branches
    if ftype == U8:
        packer.u8(int(value))
    elif ftype == U32:
        packer.u32(value)
    elif ftype == U64:
        packer.u64(value)
    elif ftype == KEY:
        _packKey(packer, value)
    elif ftype == OPT_VALUE:
        packer.optBlob(value, MAX_VALUE)
    elif ftype == TEXT:
        packer.blob(value.encode("utf-8"))
    elif ftype == WRITES:
        packer.u32(len(value))
        for key, val in value:
            _packKey(packer, key)
            packer.optBlob(val, MAX_VALUE)
    elif ftype == ENTRIES:
        packer.u32(len(value))
        for key, ts, val in value:
            _packKey(packer, key)
            packer.u64(ts)
            packer.optBlob(val, MAX_VALUE)
    else:
        raise AssertionError(ftype)


def encode(msg: Message) -> bytes:
    body = Packer()
    body.u8(int(msg.kind))
    body.u64(msg.requestId)
    try:
        layout = LAYOUTS[msg.kind]
    except KeyError as err:
        raise EncodeError("unknown kind {!r}".format(msg.kind)) from err
    for name, ftype in layout:
        try:
            value = msg.payload[name]
        except KeyError as err:
            raise EncodeError("{} message missing field {!r}".format(
                msg.kind.name, name)) from err
        _packField(body, ftype, value)
    if len(body) > MAX_FRAME:
        raise EncodeError("frame of {} bytes exceeds {}".format(
            len(body), MAX_FRAME))
    return Packer().u32(len(body)).getvalue() + body.getvalue()


def _unpackKey(unpacker):
    at = unpacker.offset
    key = unpacker.blob("key", MAX_KEY)
    if not key:
        raise DecodeError(at, "empty key")
    return key


def _unpackField(unpacker, ftype):
    if ftype == U8:
        return unpacker.u8()
    if ftype == U32:
        return unpacker.u32()
    if ftype == U64:
        return unpacker.u64()
    if ftype == KEY:
        return _unpackKey(unpacker)
    if ftype == OPT_VALUE:
        return unpacker.optBlob("value", MAX_VALUE)
    if ftype == TEXT:
        at = unpacker.offset
        raw = unpacker.blob("text")
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as err:
            raise DecodeError(at, "invalid utf-8 text") from err
    if ftype == WRITES:
        return [(_unpackKey(unpacker), unpacker.optBlob("value", MAX_VALUE))
                for _ in range(unpacker.u32("write count"))]
    if ftype == ENTRIES:
        return [(_unpackKey(unpacker), unpacker.u64("ts"),
                 unpacker.optBlob("value", MAX_VALUE))
                for _ in range(unpacker.u32("entry count"))]
    raise AssertionError(ftype)


def frameLength(header: bytes) -> int:
    """Length of the frame remainder announced by a 4-byte header."""
    unpacker = Unpacker(header)
    length = unpacker.u32("frame length")
    if length > MAX_FRAME:
        raise DecodeError(0, "frame length {} exceeds {}".format(length, MAX_FRAME))
    return length


def decode(data: bytes) -> Message:
    if len(data) < 4:
        raise DecodeError(len(data), "truncated frame")
    length = frameLength(data[:4])
    if len(data) - 4 < length:
        raise DecodeError(len(data), "truncated frame")
    if len(data) - 4 > length:
        raise DecodeError(4 + length, "trailing garbage after frame")
    unpacker = Unpacker(data, 4)
    code = unpacker.u8("kind")
    try:
        kind = Kind(code)
    except ValueError as err:
        raise DecodeError(4, "unknown kind 0x{:02x}".format(code)) from err
    requestId = unpacker.u64("request-id")
    payload = {}
    for name, ftype in LAYOUTS[kind]:
        at = unpacker.offset
        value = _unpackField(unpacker, ftype)
        enum = _ENUMS.get((kind, name))
        if enum is not None:
            try:
                value = enum(value)
            except ValueError as err:
                raise DecodeError(at, "bad {} {}".format(name, value)) from err
        payload[name] = value
    if not unpacker.atEnd():
        raise DecodeError(unpacker.offset, "trailing garbage within frame")
    return Message(kind, requestId, payload)
