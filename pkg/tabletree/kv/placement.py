"""
Key placement. Tree nodes carry a server hint in their key and live on
hint mod n; every other key is placed by FNV-1a 64 of its bytes.
"""
import struct

FNV_OFFSET = 0xcbf29ce484222325
FNV_PRIME = 0x100000001b3
_MASK64 = (1 << 64) - 1

# prefix(2) | tree-id(4) | server-hint(2) | local(6)
HINTED_PREFIX = b"\xffN"
HINTED_KEY_LEN = 14
_HINT = struct.Struct(">H")


def fnv1a64(data: bytes) -> int:
    value = FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * FNV_PRIME) & _MASK64
    return value


def hintOf(key: bytes):
    if len(key) == HINTED_KEY_LEN and key[:2] == HINTED_PREFIX:
        return _HINT.unpack_from(key, 6)[0]
    return None


def ownerOf(key: bytes, nServers: int) -> int:
    assert nServers >= 1
    hint = hintOf(key)
    if hint is not None:
        return hint % nServers
    return fnv1a64(key) % nServers
