"""
Node naming and serialization.

A node lives at kv key  b"\\xffN" | tree-id u32 | server-hint u16 | local u48,
so ownerOf() places it on hint mod n-servers. A tree's RootPointer lives at
b"\\xffR" | tree-id. Node values:

    format u8 | kind u8 | height u8 | count u16 | count x key blob |
        inner: (count + 1) x child (hint u16 | local u48)
        leaf:  count x row blob
"""
from dataclasses import dataclass, field
import enum
import struct
from typing import List

from ..kv.placement import HINTED_PREFIX
from ..wire import DecodeError, EncodeError
from ..wire.primitives import Packer, Unpacker
from . import CorruptNode

NODE_FORMAT = 1
ROOT_FORMAT = 1
ROOT_PREFIX = b"\xffR"
TREE_COUNTER_KEY = b"\xffC"
LOCAL_COUNTER_PREFIX = b"\xffL"
LOCAL_MAX = (1 << 48) - 1

_NODE_HEADER = 5
_BLOB_HEADER = 4
_CHILD_SIZE = 8

_TREE = struct.Struct(">I")
_HINT = struct.Struct(">H")


class NodeKind(enum.IntEnum):
    LEAF = 0
    INNER = 1


@dataclass(frozen=True, order=True)
class NodeId:
    hint: int
    local: int

    def pack(self, packer):
        packer.u16(self.hint).raw(self.local.to_bytes(6, "big"))

    @classmethod
    def unpack(cls, unpacker):
        hint = unpacker.u16("child hint")
        return cls(hint, int.from_bytes(unpacker.raw(6, "child local"), "big"))

    def __str__(self):
        return "{}:{}".format(self.hint, self.local)


def nodeKey(treeId, nodeId):
    return (HINTED_PREFIX + _TREE.pack(treeId) + _HINT.pack(nodeId.hint) +
            nodeId.local.to_bytes(6, "big"))


def nodeIdOfKey(key):
    return NodeId(_HINT.unpack_from(key, 6)[0], int.from_bytes(key[8:14], "big"))


def rootPointerKey(treeId):
    return ROOT_PREFIX + _TREE.pack(treeId)


def localCounterKey(treeId, hint):
    return LOCAL_COUNTER_PREFIX + _TREE.pack(treeId) + _HINT.pack(hint)


def encodeCounter(value):
    return Packer().u64(value).getvalue()


def decodeCounter(data):
    return 0 if data is None else Unpacker(data).u64("counter")


@dataclass(frozen=True)
class RootPointer:
    root: NodeId
    height: int

    def encode(self):
        packer = Packer().u8(ROOT_FORMAT)
        self.root.pack(packer)
        return packer.u8(self.height).getvalue()

    @classmethod
    def decode(cls, data):
        try:
            unpacker = Unpacker(data)
            if unpacker.u8("format") != ROOT_FORMAT:
                raise CorruptNode("unknown root pointer format")
            root = NodeId.unpack(unpacker)
            return cls(root, unpacker.u8("height"))
        except DecodeError as err:
            raise CorruptNode("bad root pointer: {}".format(err)) from err


@dataclass
class TreeNode:
    kind: NodeKind
    height: int = 0
    keys: List[bytes] = field(default_factory=list)
    children: List[NodeId] = field(default_factory=list)
    values: List[bytes] = field(default_factory=list)

    @classmethod
    def leaf(cls, keys=None, values=None):
        return cls(NodeKind.LEAF, 0, list(keys or []), [], list(values or []))

    @classmethod
    def inner(cls, height, keys, children):
        return cls(NodeKind.INNER, height, list(keys), list(children), [])

    @property
    def isLeaf(self):
        return self.kind == NodeKind.LEAF

    def size(self):
        """Entries for a leaf, children for an inner node."""
        return len(self.keys) if self.isLeaf else len(self.children)

    def entrySize(self, index):
        """Encoded bytes of leaf entry index: key blob plus row blob."""
        return 2 * _BLOB_HEADER + len(self.keys[index]) + len(self.values[index])

    def encodedSize(self):
        """len(self.encode()), without encoding."""
        size = _NODE_HEADER + sum(_BLOB_HEADER + len(key) for key in self.keys)
        if self.isLeaf:
            return size + sum(_BLOB_HEADER + len(value) for value in self.values)
        return size + _CHILD_SIZE * len(self.children)

    def encode(self):
        packer = Packer().u8(NODE_FORMAT).u8(int(self.kind)).u8(self.height)
        try:
            packer.u16(len(self.keys))
        except EncodeError as err:
            raise CorruptNode("node has too many keys") from err
        for key in self.keys:
            packer.blob(key)
        if self.isLeaf:
            for value in self.values:
                packer.blob(value)
        else:
            for child in self.children:
                child.pack(packer)
        return packer.getvalue()

    @classmethod
    def decode(cls, data):
        try:
            unpacker = Unpacker(data)
            if unpacker.u8("format") != NODE_FORMAT:
                raise CorruptNode("unknown node format")
            kind = NodeKind(unpacker.u8("kind"))
            height = unpacker.u8("height")
            count = unpacker.u16("count")
            keys = [unpacker.blob("key") for _ in range(count)]
            if kind == NodeKind.LEAF:
                node = cls(kind, height, keys, [],
                           [unpacker.blob("row") for _ in range(count)])
            else:
                node = cls.inner(height, keys,
                                 [NodeId.unpack(unpacker) for _ in range(count + 1)])
            if not unpacker.atEnd():
                raise CorruptNode("trailing bytes in node")
            return node
        except (DecodeError, ValueError) as err:
            raise CorruptNode("undecodable node: {}".format(err)) from err
