"""
Distributed balanced tree: a B+tree whose nodes are key-value pairs in the
transactional store. Every node read and write goes through a TxnContext.
"""
from __future__ import absolute_import, division, print_function

from ..wire.codec import MAX_VALUE

MAX_TREE_KEY = 1024
MAX_ROW = 64 * 1024
# A node is one kv value.
NODE_BYTES = MAX_VALUE
# Largest fanout whose full inner nodes still fit in NODE_BYTES.
MAX_FANOUT = 1000
CATALOG_TREE = 0


class DbtError(Exception):
    pass


class TreeNotFound(DbtError):
    pass


class NodeNotFound(DbtError):
    pass


class ParentNotFound(DbtError):
    pass


class OversizeEntry(DbtError):
    pass


class CorruptNode(DbtError):
    pass
