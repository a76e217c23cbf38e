"""
Order-preserving key encodings: for values a, b of one ColumnType,
a < b exactly when encodeKey(a) < encodeKey(b) bytewise.

    INT    8 bytes big-endian, sign bit flipped (offset binary)
    FLOAT  8 bytes IEEE-754 big-endian; negatives have every bit flipped,
           others only the sign bit; -0.0 is stored as +0.0
    TEXT   UTF-8 with 0x00 escaped as 0x00 0xFF, then a 0x00 terminator
"""
import math
import struct

from . import ColumnType, SqlError, TypeMismatch

_U64 = struct.Struct(">Q")
_F64 = struct.Struct(">d")
_SIGN = 1 << 63
_ALL = (1 << 64) - 1
INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1


def checkValue(ctype, value):
    """Raises TypeMismatch unless value is a valid ctype value."""
    if ctype == ColumnType.INT:
        ok = isinstance(value, int) and not isinstance(value, bool) and \
            INT_MIN <= value <= INT_MAX
    elif ctype == ColumnType.FLOAT:
        ok = isinstance(value, float)
        if ok and math.isnan(value):
            raise TypeMismatch("NaN is not a storable FLOAT")
    else:
        ok = isinstance(value, str)
    if not ok:
        raise TypeMismatch("{!r} is not a valid {} value".format(value, ctype.value))


def encodeKey(ctype, value):
    checkValue(ctype, value)
    if ctype == ColumnType.INT:
        return _U64.pack((value + _SIGN) & _ALL)
    if ctype == ColumnType.FLOAT:
        bits = _U64.unpack(_F64.pack(value + 0.0 if value == 0 else value))[0]
        bits = bits ^ _ALL if bits & _SIGN else bits | _SIGN
        return _U64.pack(bits)
    return value.encode("utf-8").replace(b"\x00", b"\x00\xff") + b"\x00"


def decodeKeyAt(data, ctype, offset=0):
    """Returns (value, offset just past the encoded value)."""
    if ctype in (ColumnType.INT, ColumnType.FLOAT):
        if len(data) - offset < 8:
            raise SqlError("truncated {} key".format(ctype.value))
        bits = _U64.unpack_from(data, offset)[0]
        if ctype == ColumnType.INT:
            return bits - _SIGN, offset + 8
        bits = bits ^ _SIGN if bits & _SIGN else bits ^ _ALL
        return _F64.unpack(_U64.pack(bits))[0], offset + 8
    out = bytearray()
    pos = offset
    while True:
        end = data.find(b"\x00", pos)
        if end < 0:
            raise SqlError("unterminated TEXT key")
        out += data[pos:end]
        if end + 1 < len(data) and data[end + 1] == 0xFF:
            out.append(0)
            pos = end + 2
            continue
        try:
            return out.decode("utf-8"), end + 1
        except UnicodeDecodeError as err:
            raise SqlError("TEXT key is not valid UTF-8") from err


def decodeKey(data, ctype):
    value, end = decodeKeyAt(data, ctype)
    if end != len(data):
        raise SqlError("trailing bytes after {} key".format(ctype.value))
    return value


def prefixEnd(prefix):
    """Smallest byte string greater than every string starting with prefix."""
    trimmed = prefix.rstrip(b"\xff")
    if not trimmed:
        return None
    return trimmed[:-1] + bytes([trimmed[-1] + 1])
