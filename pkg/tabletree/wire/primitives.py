"""
Fixed-width big-endian integers and u32-length-prefixed byte strings.
Shared by the message codec, the commit log, tree nodes and stored rows.
"""
import struct

from . import DecodeError, EncodeError

_U8 = struct.Struct(">B")
_U16 = struct.Struct(">H")
_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")
_I64 = struct.Struct(">q")
_F64 = struct.Struct(">d")

U32_MAX = (1 << 32) - 1
U64_MAX = (1 << 64) - 1


class Packer(object):
    def __init__(self):
        self._parts = []
        self._size = 0

    def _add(self, data):
        self._parts.append(data)
        self._size += len(data)
        return self

    def _pack(self, fmt, value, what):
        try:
            return self._add(fmt.pack(value))
        except struct.error as err:
            raise EncodeError("{} out of range: {!r}".format(what, value)) from err

    def u8(self, value):
        return self._pack(_U8, value, "u8")

    def u16(self, value):
        return self._pack(_U16, value, "u16")

    def u32(self, value):
        return self._pack(_U32, value, "u32")

    def u64(self, value):
        return self._pack(_U64, value, "u64")

    def i64(self, value):
        return self._pack(_I64, value, "i64")

    def f64(self, value):
        return self._pack(_F64, value, "f64")

    def raw(self, data):
        return self._add(bytes(data))

    def blob(self, data, maxLen=U32_MAX):
        if not isinstance(data, (bytes, bytearray)):
            raise EncodeError("expected bytes, got {}".format(type(data).__name__))
        if len(data) > maxLen:
            raise EncodeError("byte string of {} bytes exceeds {}".format(
                len(data), maxLen))
        self.u32(len(data))
        return self._add(bytes(data))

    def optBlob(self, data, maxLen=U32_MAX):
        """None (a tombstone) is flag 1 with no body; bytes are flag 0 + blob."""
        if data is None:
            return self.u8(1)
        self.u8(0)
        return self.blob(data, maxLen)

    def __len__(self):
        return self._size

    def getvalue(self):
        return b"".join(self._parts)


class Unpacker(object):
    def __init__(self, data, offset=0, end=None):
        self._data = memoryview(data)
        self.offset = offset
        self._end = len(data) if end is None else end

    def remaining(self):
        return self._end - self.offset

    def atEnd(self):
        return self.offset == self._end

    def _take(self, size, what):
        if size > self._end - self.offset:
            raise DecodeError(self.offset, "truncated frame reading " + what)
        start = self.offset
        self.offset += size
        return self._data[start:self.offset]

    def _unpack(self, fmt, what):
        return fmt.unpack(self._take(fmt.size, what))[0]

    def u8(self, what="u8"):
        return self._unpack(_U8, what)

    def u16(self, what="u16"):
        return self._unpack(_U16, what)

    def u32(self, what="u32"):
        return self._unpack(_U32, what)

    def u64(self, what="u64"):
        return self._unpack(_U64, what)

    def i64(self, what="i64"):
        return self._unpack(_I64, what)

    def f64(self, what="f64"):
        return self._unpack(_F64, what)

    def raw(self, size, what="bytes"):
        return bytes(self._take(size, what))

    def blob(self, what="byte string", maxLen=U32_MAX):
        at = self.offset
        size = self.u32(what + " length")
        if size > self._end - self.offset:
            raise DecodeError(at, "length prefix exceeds frame")
        if size > maxLen:
            raise DecodeError(at, "{} longer than {} bytes".format(what, maxLen))
        return bytes(self._take(size, what))

    def optBlob(self, what="value", maxLen=U32_MAX):
        at = self.offset
        flag = self.u8(what + " flag")
        if flag == 1:
            return None
        if flag != 0:
            raise DecodeError(at, "bad {} flag {}".format(what, flag))
        return self.blob(what, maxLen)
