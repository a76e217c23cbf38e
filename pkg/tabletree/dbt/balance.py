"""
Load balancing by node migration: moves nodes from the most-loaded to the
least-loaded server, one transaction per move, until the per-server node
counts are within a 1.5 ratio or differ by at most 4.
"""
import logging

from ..kv.placement import ownerOf
from ..txn import TxnAborted
from . import NodeNotFound, ParentNotFound
from .node import nodeKey

LOG = logging.getLogger(__name__)

MAX_RATIO = 1.5
MIN_SPREAD = 4
MAX_FAILURES = 10


def imbalanced(most, least):
    if most - least <= MIN_SPREAD:
        return False
    return least == 0 or most / least > MAX_RATIO


def placement(dbt, tree):
    """{server: [nodeId, ...]} with leaves listed before inner nodes."""
    ctx = dbt.client.begin()
    try:
        nodes = [(node.height, nodeId) for nodeId, node in dbt.nodes(ctx, tree)]
    finally:
        dbt.client.commit(ctx)
    byServer = {sid: [] for sid in range(dbt.nServers)}
    for _, nodeId in sorted(nodes, key=lambda entry: entry[0]):
        byServer[ownerOf(nodeKey(tree, nodeId), dbt.nServers)].append(nodeId)
    return byServer


def rebalanceStep(dbt, tree, maxMoves=None):
    """Returns the number of nodes moved."""
    byServer = placement(dbt, tree)
    moves = failures = 0
    while maxMoves is None or moves < maxMoves:
        busiest = max(byServer, key=lambda sid: (len(byServer[sid]), -sid))
        idlest = min(byServer, key=lambda sid: (len(byServer[sid]), sid))
        if not imbalanced(len(byServer[busiest]), len(byServer[idlest])):
            break
        nodeId = byServer[busiest].pop(0)
        try:
            newId = dbt.client.runInTxn(
                lambda ctx, nodeId=nodeId, dest=idlest:
                dbt.moveNode(ctx, tree, nodeId, dest))
        except (TxnAborted, NodeNotFound, ParentNotFound) as err:
            failures += 1
            LOG.info("tree %d: moving node %s failed: %s", tree, nodeId, err)
            if failures >= MAX_FAILURES:
                break
            byServer = placement(dbt, tree)
            continue
        byServer[idlest].append(newId)
        moves += 1
    LOG.info("tree %d: rebalance moved %d nodes", tree, moves)
    return moves
