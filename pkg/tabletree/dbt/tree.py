"""
B+tree operations over TxnContexts. A leaf holds at most `fanout` entries
and at most NODE_BYTES encoded; unless root, it holds at least
ceil(fanout / 4) entries or at least a quarter of NODE_BYTES. Inner nodes
hold at most `fanout` children and, unless root, at least
max(2, ceil(fanout / 4)). There are no sibling pointers: scans walk back up
a path stack.
"""
import bisect
from dataclasses import dataclass
import enum
import logging
import math

from . import (MAX_FANOUT, MAX_ROW, MAX_TREE_KEY, NODE_BYTES, DbtError, NodeNotFound,
               OversizeEntry, ParentNotFound, TreeNotFound, CorruptNode)
from .node import (LOCAL_MAX, TREE_COUNTER_KEY, NodeId, RootPointer, TreeNode,
                   decodeCounter, encodeCounter, localCounterKey, nodeKey,
                   rootPointerKey)

LOG = logging.getLogger(__name__)

DEFAULT_FANOUT = 64


class InsertResult(enum.Enum):
    INSERTED = "inserted"
    REPLACED = "replaced"


class DeleteResult(enum.Enum):
    DELETED = "deleted"
    NOT_FOUND = "not-found"


@dataclass
class _Step:
    nodeId: NodeId
    node: TreeNode
    index: int


class Dbt(object):
    def __init__(self, client, fanout=DEFAULT_FANOUT):
        if not 4 <= fanout <= MAX_FANOUT:
            raise DbtError("fanout must be from 4 to {}, got {}".format(
                MAX_FANOUT, fanout))
        self.client = client
        self.fanout = fanout
        self.minLeaf = math.ceil(fanout / 4)
        self.minLeafBytes = NODE_BYTES // 4
        self.minChildren = max(2, math.ceil(fanout / 4))

    @classmethod
    def fromConfig(cls, client, config):
        return cls(client, config.fanout)

    @property
    def nServers(self):
        return self.client.nServers

    def minSize(self, node):
        return self.minLeaf if node.isLeaf else self.minChildren

    def overfull(self, node):
        return node.size() > self.fanout or node.encodedSize() > NODE_BYTES

    def underfull(self, node):
        if node.isLeaf:
            return (len(node.keys) < self.minLeaf and
                    node.encodedSize() < self.minLeafBytes)
        return len(node.children) < self.minChildren

    def _canLend(self, node, index):
        """True when node stays at or above its minimum without entry index."""
        if not node.isLeaf:
            return node.size() > self.minChildren
        if not node.keys:
            return False
        return (len(node.keys) > self.minLeaf or
                node.encodedSize() - node.entrySize(index) >= self.minLeafBytes)

    def _splitPoint(self, node):
        """
        Count midpoint, or for a leaf over NODE_BYTES the first index at
        which the left part holds half the entry bytes.
        """
        count = len(node.keys)
        if not node.isLeaf or node.encodedSize() <= NODE_BYTES:
            return count // 2
        sizes = [node.entrySize(index) for index in range(count)]
        half = sum(sizes) / 2
        running = 0
        for index, size in enumerate(sizes):
            running += size
            if running >= half:
                return min(max(index + 1, 1), count - 1)
        return count // 2

    def readNode(self, ctx, tree, nodeId):
        data = self.client.get(ctx, nodeKey(tree, nodeId))
        if data is None:
            raise NodeNotFound("tree {} has no node {}".format(tree, nodeId))
        return TreeNode.decode(data)

    def _putNode(self, ctx, tree, nodeId, node):
        self.client.put(ctx, nodeKey(tree, nodeId), node.encode())

    def _dropNode(self, ctx, tree, nodeId):
        self.client.delete(ctx, nodeKey(tree, nodeId))

    def hasTree(self, ctx, tree):
        return self.client.get(ctx, rootPointerKey(tree)) is not None

    def rootPointer(self, ctx, tree):
        data = self.client.get(ctx, rootPointerKey(tree))
        if data is None:
            raise TreeNotFound("no tree {}".format(tree))
        return RootPointer.decode(data)

    def _setRoot(self, ctx, tree, rootPointer):
        self.client.put(ctx, rootPointerKey(tree), rootPointer.encode())

    def _allocNodeId(self, ctx, tree, hint):
        key = localCounterKey(tree, hint)
        local = decodeCounter(self.client.get(ctx, key)) + 1
        if local > LOCAL_MAX:
            raise DbtError("node ids exhausted for tree {} hint {}".format(tree, hint))
        self.client.put(ctx, key, encodeCounter(local))
        return NodeId(hint, local)

    def _rootHint(self, tree, height):
        return (tree + height) % self.nServers

    def createTree(self, ctx, treeId=None):
        """Allocates a tree id (or uses treeId) and writes an empty root."""
        if treeId is None:
            treeId = decodeCounter(self.client.get(ctx, TREE_COUNTER_KEY)) + 1
            self.client.put(ctx, TREE_COUNTER_KEY, encodeCounter(treeId))
        elif self.hasTree(ctx, treeId):
            raise DbtError("tree {} already exists".format(treeId))
        rootId = self._allocNodeId(ctx, treeId, self._rootHint(treeId, 0))
        self._putNode(ctx, treeId, rootId, TreeNode.leaf())
        self._setRoot(ctx, treeId, RootPointer(rootId, 0))
        LOG.debug("created tree %d root %s", treeId, rootId)
        return treeId

    def ensureTree(self, ctx, treeId):
        if not self.hasTree(ctx, treeId):
            self.createTree(ctx, treeId)

    def _descend(self, ctx, tree, key):
        rootPointer = self.rootPointer(ctx, tree)
        nodeId = rootPointer.root
        node = self.readNode(ctx, tree, nodeId)
        if node.height != rootPointer.height:
            raise CorruptNode("tree {} root {} has height {}, pointer says {}".format(
                tree, nodeId, node.height, rootPointer.height))
        path = []
        while not node.isLeaf:
            index = bisect.bisect_right(node.keys, key)
            path.append(_Step(nodeId, node, index))
            nodeId = node.children[index]
            child = self.readNode(ctx, tree, nodeId)
            if child.height != node.height - 1:
                raise CorruptNode("tree {} node {} has height {} under height {}".format(
                    tree, nodeId, child.height, node.height))
            node = child
        return path, nodeId, node

    def lookup(self, ctx, tree, key):
        _, _, leaf = self._descend(ctx, tree, key)
        index = bisect.bisect_left(leaf.keys, key)
        if index < len(leaf.keys) and leaf.keys[index] == key:
            return leaf.values[index]
        return None

    def insert(self, ctx, tree, key, row):
        if len(key) > MAX_TREE_KEY:
            raise OversizeEntry("tree key of {} bytes exceeds {}".format(
                len(key), MAX_TREE_KEY))
        if len(row) > MAX_ROW:
            raise OversizeEntry("row of {} bytes exceeds {}".format(len(row), MAX_ROW))
        path, leafId, leaf = self._descend(ctx, tree, key)
        index = bisect.bisect_left(leaf.keys, key)
        if index < len(leaf.keys) and leaf.keys[index] == key:
            leaf.values[index] = row
            if self.overfull(leaf):
                self._splitUp(ctx, tree, path, leafId, leaf)
            else:
                self._fixUnderflow(ctx, tree, path, leafId, leaf)
            return InsertResult.REPLACED
        leaf.keys.insert(index, key)
        leaf.values.insert(index, row)
        self._splitUp(ctx, tree, path, leafId, leaf)
        return InsertResult.INSERTED

    def _splitUp(self, ctx, tree, path, nodeId, node):
        while self.overfull(node):
            mid = self._splitPoint(node)
            if node.isLeaf:
                right = TreeNode.leaf(node.keys[mid:], node.values[mid:])
                separator = right.keys[0]
                del node.keys[mid:]
                del node.values[mid:]
            else:
                separator = node.keys[mid]
                right = TreeNode.inner(node.height, node.keys[mid + 1:],
                                       node.children[mid + 1:])
                del node.keys[mid:]
                del node.children[mid + 1:]
            rightId = self._allocNodeId(ctx, tree, nodeId.hint)
            self._putNode(ctx, tree, nodeId, node)
            self._putNode(ctx, tree, rightId, right)
            if not path:
                height = node.height + 1
                rootId = self._allocNodeId(ctx, tree, self._rootHint(tree, height))
                self._putNode(ctx, tree, rootId,
                              TreeNode.inner(height, [separator], [nodeId, rightId]))
                self._setRoot(ctx, tree, RootPointer(rootId, height))
                LOG.debug("tree %d grew to height %d", tree, height)
                return
            step = path.pop()
            step.node.keys.insert(step.index, separator)
            step.node.children.insert(step.index + 1, rightId)
            nodeId, node = step.nodeId, step.node
        self._putNode(ctx, tree, nodeId, node)

    def delete(self, ctx, tree, key):
        path, leafId, leaf = self._descend(ctx, tree, key)
        index = bisect.bisect_left(leaf.keys, key)
        if index == len(leaf.keys) or leaf.keys[index] != key:
            return DeleteResult.NOT_FOUND
        del leaf.keys[index]
        del leaf.values[index]
        self._fixUnderflow(ctx, tree, path, leafId, leaf)
        return DeleteResult.DELETED

    @staticmethod
    def _borrowLeft(parent, index, left, node):
        if node.isLeaf:
            node.keys.insert(0, left.keys.pop())
            node.values.insert(0, left.values.pop())
            parent.keys[index - 1] = node.keys[0]
        else:
            node.keys.insert(0, parent.keys[index - 1])
            node.children.insert(0, left.children.pop())
            parent.keys[index - 1] = left.keys.pop()

    @staticmethod
    def _borrowRight(parent, index, node, right):
        if node.isLeaf:
            node.keys.append(right.keys.pop(0))
            node.values.append(right.values.pop(0))
            parent.keys[index] = right.keys[0]
        else:
            node.keys.append(parent.keys[index])
            node.children.append(right.children.pop(0))
            parent.keys[index] = right.keys.pop(0)

    @staticmethod
    def _merge(parent, index, left, right):
        """Folds parent.children[index + 1] (right) into left."""
        if left.isLeaf:
            left.keys.extend(right.keys)
            left.values.extend(right.values)
        else:
            left.keys.append(parent.keys[index])
            left.keys.extend(right.keys)
            left.children.extend(right.children)
        del parent.keys[index]
        del parent.children[index + 1]

    def _collapseRoot(self, ctx, tree, rootId, root):
        childId = root.children[0]
        self._dropNode(ctx, tree, rootId)
        self._setRoot(ctx, tree, RootPointer(childId, root.height - 1))
        LOG.debug("tree %d shrank to height %d", tree, root.height - 1)

    def _fixUnderflow(self, ctx, tree, path, nodeId, node):
        # pylint: disable=too-many-arguments
        while path and self.underfull(node):
            step = path.pop()
            parent, index = step.node, step.index
            changed = {}
            left = right = None
            if index > 0:
                leftId = parent.children[index - 1]
                left = self.readNode(ctx, tree, leftId)
                while self.underfull(node) and self._canLend(left, len(left.keys) - 1):
                    self._borrowLeft(parent, index, left, node)
                    changed[leftId] = left
            if self.underfull(node) and index + 1 < len(parent.children):
                rightId = parent.children[index + 1]
                right = self.readNode(ctx, tree, rightId)
                while self.underfull(node) and self._canLend(right, 0):
                    self._borrowRight(parent, index, node, right)
                    changed[rightId] = right
            for changedId, changedNode in changed.items():
                self._putNode(ctx, tree, changedId, changedNode)
            if not self.underfull(node):
                self._putNode(ctx, tree, nodeId, node)
                self._putNode(ctx, tree, step.nodeId, parent)
                return
            if left is not None:
                self._merge(parent, index - 1, left, node)
                self._putNode(ctx, tree, leftId, left)
                self._dropNode(ctx, tree, nodeId)
            else:
                self._merge(parent, index, node, right)
                self._putNode(ctx, tree, nodeId, node)
                self._dropNode(ctx, tree, rightId)
            nodeId, node = step.nodeId, parent
        if not path and not node.isLeaf and len(node.children) == 1:
            self._collapseRoot(ctx, tree, nodeId, node)
        else:
            self._putNode(ctx, tree, nodeId, node)

    def scan(self, ctx, tree, start=b"", end=None, limit=None):
        """Entries with start <= key < end (end None: unbounded), ascending."""
        out = []
        if end is not None and end <= start:
            return out
        rootPointer = self.rootPointer(ctx, tree)
        node = self.readNode(ctx, tree, rootPointer.root)
        stack = []
        while not node.isLeaf:
            index = bisect.bisect_right(node.keys, start)
            stack.append([node, index])
            node = self.readNode(ctx, tree, node.children[index])
        while True:
            first = bisect.bisect_left(node.keys, start)
            for key, row in zip(node.keys[first:], node.values[first:]):
                if end is not None and key >= end:
                    return out
                out.append((key, row))
                if limit is not None and len(out) >= limit:
                    return out
            while stack and stack[-1][1] + 1 >= len(stack[-1][0].children):
                stack.pop()
            if not stack:
                return out
            parent = stack[-1][0]
            stack[-1][1] += 1
            index = stack[-1][1]
            if end is not None and parent.keys[index - 1] >= end:
                return out
            node = self.readNode(ctx, tree, parent.children[index])
            while not node.isLeaf:
                stack.append([node, 0])
                node = self.readNode(ctx, tree, node.children[0])

    def nodes(self, ctx, tree):
        """Yields (nodeId, node) depth-first, left to right."""
        stack = [self.rootPointer(ctx, tree).root]
        while stack:
            nodeId = stack.pop()
            node = self.readNode(ctx, tree, nodeId)
            yield nodeId, node
            if not node.isLeaf:
                stack.extend(reversed(node.children))

    def touch(self, ctx, tree):
        """
        Rewrites every node of tree unchanged, so any transaction that
        modifies the tree concurrently conflicts with ctx.
        """
        touched = list(self.nodes(ctx, tree))
        for nodeId, node in touched:
            self._putNode(ctx, tree, nodeId, node)
        return len(touched)

    def moveNode(self, ctx, tree, nodeId, dest):
        """
        Re-creates node under a fresh NodeId hinted to server dest and
        repoints its parent (or the RootPointer). Returns the new NodeId.
        """
        if not 0 <= dest < self.nServers:
            raise DbtError("server {} not in cluster of {}".format(dest, self.nServers))
        node = self.readNode(ctx, tree, nodeId)
        rootPointer = self.rootPointer(ctx, tree)
        if rootPointer.root == nodeId:
            newId = self._allocNodeId(ctx, tree, dest)
            self._putNode(ctx, tree, newId, node)
            self._setRoot(ctx, tree, RootPointer(newId, rootPointer.height))
            self._dropNode(ctx, tree, nodeId)
            return newId
        if not node.keys or node.height >= rootPointer.height:
            raise ParentNotFound("tree {} node {} is not reachable".format(tree, nodeId))
        firstKey = node.keys[0]
        parentId = rootPointer.root
        parent = self.readNode(ctx, tree, parentId)
        while parent.height > node.height + 1 and not parent.isLeaf:
            parentId = parent.children[bisect.bisect_right(parent.keys, firstKey)]
            parent = self.readNode(ctx, tree, parentId)
        index = bisect.bisect_right(parent.keys, firstKey)
        if parent.isLeaf or parent.children[index] != nodeId:
            raise ParentNotFound("tree {} node {} has no parent pointing at it".format(
                tree, nodeId))
        newId = self._allocNodeId(ctx, tree, dest)
        parent.children[index] = newId
        self._putNode(ctx, tree, parentId, parent)
        self._putNode(ctx, tree, newId, node)
        self._dropNode(ctx, tree, nodeId)
        LOG.debug("tree %d moved node %s to %s", tree, nodeId, newId)
        return newId
