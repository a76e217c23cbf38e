"""
Full-tree structural checker. Walks every node reachable from the
RootPointer under one snapshot and reports each violated invariant.
"""
import collections
from dataclasses import dataclass, field
import hashlib
import logging
from typing import Dict, List

from ..kv.placement import ownerOf
from . import NODE_BYTES, CorruptNode, NodeNotFound
from .node import nodeKey

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class Finding:
    nodeId: str
    invariant: str
    detail: str

    def __str__(self):
        return "node {}: {}: {}".format(self.nodeId, self.invariant, self.detail)


@dataclass
class WalkReport:
    tree: int
    height: int = 0
    nodes: int = 0
    leaves: int = 0
    entries: int = 0
    perServer: Dict[int, int] = field(default_factory=dict)
    findings: List[Finding] = field(default_factory=list)
    digest: str = ""

    @property
    def ok(self):
        return not self.findings


def _checkNode(dbt, node, nodeId, expectedHeight, lo, hi, isRoot):
    # pylint: disable=too-many-arguments
    found = []

    def add(invariant, detail):
        found.append(Finding(str(nodeId), invariant, detail))

    if node.height != expectedHeight:
        add("height", "height {} where {} expected".format(node.height, expectedHeight))
    if node.isLeaf != (node.height == 0):
        add("kind", "{} node at height {}".format(node.kind.name.lower(), node.height))
    if any(a >= b for a, b in zip(node.keys, node.keys[1:])):
        add("sorted keys", "keys not strictly ascending")
    if node.keys and lo is not None and node.keys[0] < lo:
        add("separator bounds", "key {} below separator {}".format(
            node.keys[0].hex(), lo.hex()))
    if node.keys and hi is not None and node.keys[-1] >= hi:
        add("separator bounds", "key {} not below separator {}".format(
            node.keys[-1].hex(), hi.hex()))
    if node.isLeaf:
        if len(node.values) != len(node.keys):
            add("shape", "{} keys but {} rows".format(len(node.keys), len(node.values)))
    elif len(node.children) != len(node.keys) + 1:
        add("shape", "{} keys but {} children".format(len(node.keys), len(node.children)))
    size = node.size()
    if size > dbt.fanout:
        add("occupancy", "{} exceeds fanout {}".format(size, dbt.fanout))
    if node.encodedSize() > NODE_BYTES:
        add("occupancy", "{} bytes exceeds {}".format(node.encodedSize(), NODE_BYTES))
    if not isRoot and dbt.underfull(node):
        add("occupancy", "{} below minimum {}".format(size, dbt.minSize(node)))
    if isRoot and not node.isLeaf and size < 2:
        add("occupancy", "inner root with {} children".format(size))
    return found


def walkTree(dbt, ctx, tree):
    """Returns a WalkReport; report.ok is False when any invariant fails."""
    report = WalkReport(tree)
    digest = hashlib.sha256()
    perServer = collections.Counter()
    try:
        rootPointer = dbt.rootPointer(ctx, tree)
    except CorruptNode as err:
        report.findings.append(Finding("root", "root pointer", str(err)))
        return report
    digest.update(rootPointer.encode())
    report.height = rootPointer.height
    seen = set()
    # (nodeId, expected height, lower bound, upper bound)
    stack = [(rootPointer.root, rootPointer.height, None, None)]
    while stack:
        nodeId, height, lo, hi = stack.pop()
        if nodeId in seen:
            report.findings.append(Finding(str(nodeId), "tree shape",
                                           "node reachable twice"))
            continue
        seen.add(nodeId)
        key = nodeKey(tree, nodeId)
        try:
            node = dbt.readNode(ctx, tree, nodeId)
        except NodeNotFound:
            report.findings.append(Finding(str(nodeId), "dangling pointer",
                                           "child pointer to missing node"))
            continue
        except CorruptNode as err:
            report.findings.append(Finding(str(nodeId), "encoding", str(err)))
            continue
        digest.update(key)
        digest.update(node.encode())
        report.nodes += 1
        perServer[ownerOf(key, dbt.nServers)] += 1
        report.findings.extend(_checkNode(
            dbt, node, nodeId, height, lo, hi, nodeId == rootPointer.root))
        if node.isLeaf:
            report.leaves += 1
            report.entries += len(node.keys)
            continue
        bounds = [lo] + node.keys + [hi]
        for index in reversed(range(len(node.children))):
            stack.append((node.children[index], height - 1,
                          bounds[index], bounds[index + 1]))
    report.perServer = {sid: perServer.get(sid, 0) for sid in range(dbt.nServers)}
    report.digest = digest.hexdigest()
    for finding in report.findings:
        LOG.warning("tree %d: %s", tree, finding)
    return report
