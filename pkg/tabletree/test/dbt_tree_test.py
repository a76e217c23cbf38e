from __future__ import absolute_import, division, print_function

import math
import random
import struct
import unittest

import pytest

from tabletree.dbt import (MAX_ROW, MAX_TREE_KEY, NODE_BYTES, DbtError,
                           NodeNotFound, OversizeEntry, TreeNotFound)
from tabletree.dbt.node import NodeId, nodeKey
from tabletree.dbt.tree import Dbt, DeleteResult, InsertResult
from tabletree.dbt.walk import walkTree
from tabletree.kv.placement import hintOf
from tabletree.tools.history import History, checkSi
from tabletree.txn import TxnAborted
from tabletree.wire.sched import Scheduler, exploreSchedules

from .helpers import loopbackClient, loopbackDbt

_KEY = struct.Struct(">I")


def key(num):
    return _KEY.pack(num)


def buildTree(dbt, count, tree=None):
    def body(ctx):
        treeId = dbt.createTree(ctx) if tree is None else tree
        for num in range(count):
            dbt.insert(ctx, treeId, key(num), b"row-%d" % num)
        return treeId
    return dbt.client.runInTxn(body)


def walk(dbt, tree):
    ctx = dbt.client.begin()
    report = walkTree(dbt, ctx, tree)
    dbt.client.commit(ctx)
    return report


class DbtBasicsTest(unittest.TestCase):
    def setUp(self):
        self.dbt = loopbackDbt(3, fanout=4)
        self.client = self.dbt.client

    def testFanoutTooSmall(self):
        with self.assertRaises(DbtError):
            loopbackDbt(3, fanout=3)

    def testCreateTree(self):
        ctx = self.client.begin()
        self.assertEqual(1, self.dbt.createTree(ctx))
        self.assertEqual(2, self.dbt.createTree(ctx))
        self.assertEqual(0, self.dbt.createTree(ctx, treeId=0))
        with self.assertRaises(DbtError):
            self.dbt.createTree(ctx, treeId=1)
        self.dbt.ensureTree(ctx, 1)
        self.dbt.ensureTree(ctx, 7)
        self.assertTrue(self.dbt.hasTree(ctx, 7))
        self.assertFalse(self.dbt.hasTree(ctx, 8))
        with self.assertRaises(TreeNotFound):
            self.dbt.lookup(ctx, 8, b"k")
        self.assertTrue(self.client.commit(ctx).committed)

    def testInsertLookupDelete(self):
        ctx = self.client.begin()
        tree = self.dbt.createTree(ctx)
        self.assertEqual(InsertResult.INSERTED, self.dbt.insert(ctx, tree, b"k", b"1"))
        self.assertEqual(InsertResult.REPLACED, self.dbt.insert(ctx, tree, b"k", b"2"))
        self.assertEqual(b"2", self.dbt.lookup(ctx, tree, b"k"))
        self.assertIsNone(self.dbt.lookup(ctx, tree, b"j"))
        self.assertEqual(DeleteResult.DELETED, self.dbt.delete(ctx, tree, b"k"))
        self.assertEqual(DeleteResult.NOT_FOUND, self.dbt.delete(ctx, tree, b"k"))
        self.assertIsNone(self.dbt.lookup(ctx, tree, b"k"))
        self.client.commit(ctx)

    def testOversizeEntries(self):
        ctx = self.client.begin()
        tree = self.dbt.createTree(ctx)
        self.dbt.insert(ctx, tree, b"k" * MAX_TREE_KEY, b"r" * MAX_ROW)
        with self.assertRaises(OversizeEntry):
            self.dbt.insert(ctx, tree, b"k" * (MAX_TREE_KEY + 1), b"")
        with self.assertRaises(OversizeEntry):
            self.dbt.insert(ctx, tree, b"k", b"r" * (MAX_ROW + 1))
        self.client.abort(ctx)

    def testScanBounds(self):
        tree = buildTree(self.dbt, 50)
        ctx = self.client.begin()
        everything = self.dbt.scan(ctx, tree)
        self.assertEqual([key(num) for num in range(50)], [k for k, _ in everything])
        self.assertEqual([key(num) for num in range(10, 20)],
                         [k for k, _ in self.dbt.scan(ctx, tree, key(10), key(20))])
        self.assertEqual([key(num) for num in range(10, 13)],
                         [k for k, _ in self.dbt.scan(ctx, tree, key(10), limit=3)])
        self.assertEqual([], self.dbt.scan(ctx, tree, key(20), key(20)))
        self.assertEqual([], self.dbt.scan(ctx, tree, key(60)))
        self.assertEqual([(key(49), b"row-49")],
                         self.dbt.scan(ctx, tree, key(49), key(1000)))

    def testGrowAndShrink(self):
        tree = buildTree(self.dbt, 200)
        report = walk(self.dbt, tree)
        self.assertTrue(report.ok, report.findings)
        self.assertGreaterEqual(report.height, 3)
        self.assertEqual(200, report.entries)

        def deleteAll(ctx):
            for num in range(200):
                self.assertEqual(DeleteResult.DELETED,
                                 self.dbt.delete(ctx, tree, key(num)))
        self.client.runInTxn(deleteAll)
        report = walk(self.dbt, tree)
        self.assertTrue(report.ok, report.findings)
        self.assertEqual((0, 1, 0), (report.height, report.nodes, report.entries))

    def testTouchConflictsWithWriters(self):
        tree = buildTree(self.dbt, 20)
        toucher = self.client.begin()
        self.assertEqual(walk(self.dbt, tree).nodes, self.dbt.touch(toucher, tree))
        self.client.runInTxn(lambda ctx: self.dbt.insert(ctx, tree, key(999), b"x"))
        self.assertFalse(self.client.commit(toucher).committed)

    def testConcurrentInsertsIntoOneLeafConflict(self):
        tree = buildTree(self.dbt, 2)
        first, second = self.client.begin(), self.client.begin()
        self.dbt.insert(first, tree, key(10), b"a")
        self.dbt.insert(second, tree, key(11), b"b")
        self.assertTrue(self.client.commit(first).committed)
        self.assertFalse(self.client.commit(second).committed)


class _Model(object):
    def __init__(self):
        self.rows = {}

    def scan(self, start, end, limit):
        keys = sorted(k for k in self.rows if k >= start and (end is None or k < end))
        if limit is not None:
            keys = keys[:limit]
        return [(k, self.rows[k]) for k in keys]


@pytest.mark.parametrize(("fanout", "minLeaf"), [
    (4, 1), (5, 2), (6, 2), (8, 2), (9, 3), (64, 16),
])
def testMinimumLeafSize(fanout, minLeaf):
    assert loopbackDbt(1, fanout=fanout).minLeaf == minLeaf


@pytest.mark.parametrize("fanout", [4, 8])
def testMatchesSortedMap(fanout):
    # pylint: disable=too-many-locals
    rng = random.Random(fanout)
    dbt = loopbackDbt(3, fanout=fanout)
    client = dbt.client
    tree = client.runInTxn(dbt.createTree)
    model = _Model()
    ops = 0
    txns = 0
    while ops < 20000:
        ctx = client.begin()
        staged = dict(model.rows)
        for _ in range(25):
            num = rng.randrange(2000)
            roll = rng.random()
            if roll < 0.55:
                row = b"r%d" % rng.randrange(10 ** 6)
                expected = (InsertResult.REPLACED if key(num) in staged
                            else InsertResult.INSERTED)
                assert dbt.insert(ctx, tree, key(num), row) == expected
                staged[key(num)] = row
            elif roll < 0.85:
                expected = (DeleteResult.DELETED if key(num) in staged
                            else DeleteResult.NOT_FOUND)
                assert dbt.delete(ctx, tree, key(num)) == expected
                staged.pop(key(num), None)
            elif roll < 0.97:
                assert dbt.lookup(ctx, tree, key(num)) == staged.get(key(num))
            else:
                end = key(num + rng.randrange(1, 200)) if rng.random() < 0.8 else None
                limit = rng.choice([None, 1, 5, 50])
                scratch = _Model()
                scratch.rows = staged
                assert dbt.scan(ctx, tree, key(num), end, limit) == \
                    scratch.scan(key(num), end, limit)
            ops += 1
        txns += 1
        if txns % 20 == 0:
            before = walk(dbt, tree)
            client.abort(ctx)
            after = walk(dbt, tree)
            assert before.digest == after.digest
            continue
        assert client.commit(ctx).committed
        model.rows = staged
        if txns % 50 == 0:
            report = walk(dbt, tree)
            assert report.ok, report.findings
            assert report.entries == len(model.rows)
            assert report.height <= math.ceil(math.log2(max(len(model.rows), 2)))
            reader = client.begin()
            assert dbt.scan(reader, tree) == model.scan(b"", None, None)
            client.commit(reader)
    report = walk(dbt, tree)
    assert report.ok, report.findings
    assert report.entries == len(model.rows)


def bigRow(num):
    return bytes([ord("a") + num % 26]) * 60000


class LargeRowsTest(unittest.TestCase):
    def setUp(self):
        self.dbt = loopbackDbt(1, fanout=64)
        self.client = self.dbt.client
        self.tree = self.client.runInTxn(self.dbt.createTree)
        for num in range(40):
            self.client.runInTxn(
                lambda ctx, num=num: self.dbt.insert(ctx, self.tree, key(num),
                                                     bigRow(num)))

    def assertSound(self, count):
        report = walk(self.dbt, self.tree)
        self.assertTrue(report.ok, report.findings)
        self.assertEqual(count, report.entries)
        ctx = self.client.begin()
        for _, node in self.dbt.nodes(ctx, self.tree):
            self.assertLessEqual(len(node.encode()), NODE_BYTES)
        self.client.commit(ctx)
        return report

    def testSplitsByBytes(self):
        report = self.assertSound(40)
        self.assertGreaterEqual(report.leaves, 3)
        ctx = self.client.begin()
        for num in range(40):
            self.assertEqual(bigRow(num), self.dbt.lookup(ctx, self.tree, key(num)))
        self.client.commit(ctx)

    def testShrinkingRowsMerge(self):
        def shrink(ctx):
            for num in range(30):
                self.dbt.insert(ctx, self.tree, key(num), b"s")
        self.client.runInTxn(shrink)
        self.assertSound(40)

        def drop(ctx):
            for num in range(10, 40):
                self.dbt.delete(ctx, self.tree, key(num))
        self.client.runInTxn(drop)
        self.assertSound(10)
        ctx = self.client.begin()
        self.assertEqual([(key(num), b"s") for num in range(10)],
                         self.dbt.scan(ctx, self.tree))
        self.client.commit(ctx)

    def testGrowingRowSplits(self):
        def grow(ctx):
            tree = self.dbt.createTree(ctx)
            for num in range(20):
                self.dbt.insert(ctx, tree, key(num), b"x")
            for num in range(20):
                self.dbt.insert(ctx, tree, key(num), bigRow(num))
            return tree
        tree = self.client.runInTxn(grow)
        report = walk(self.dbt, tree)
        self.assertTrue(report.ok, report.findings)
        self.assertEqual(1, report.height)


class MoveNodeTest(unittest.TestCase):
    def setUp(self):
        self.dbt = loopbackDbt(3, fanout=4)
        self.client = self.dbt.client
        self.tree = buildTree(self.dbt, 40)

    def nodeIds(self):
        ctx = self.client.begin()
        nodes = list(self.dbt.nodes(ctx, self.tree))
        self.client.commit(ctx)
        return nodes

    def assertIntact(self):
        report = walk(self.dbt, self.tree)
        self.assertTrue(report.ok, report.findings)
        ctx = self.client.begin()
        for num in range(40):
            self.assertEqual(b"row-%d" % num, self.dbt.lookup(ctx, self.tree, key(num)))
        self.client.commit(ctx)

    def testMoveLeaf(self):
        leafId = next(nodeId for nodeId, node in self.nodeIds() if node.isLeaf)
        dest = (leafId.hint + 1) % 3
        newId = self.client.runInTxn(
            lambda ctx: self.dbt.moveNode(ctx, self.tree, leafId, dest))
        self.assertEqual(dest, newId.hint)
        self.assertEqual(dest, hintOf(nodeKey(self.tree, newId)))
        ctx = self.client.begin()
        self.assertIsNone(self.client.get(ctx, nodeKey(self.tree, leafId)))
        self.client.commit(ctx)
        self.assertIntact()

    def testMoveEveryNode(self):
        for nodeId, _ in self.nodeIds():
            self.client.runInTxn(
                lambda ctx, nodeId=nodeId: self.dbt.moveNode(ctx, self.tree, nodeId, 2))
        self.assertTrue(all(nodeId.hint == 2 for nodeId, _ in self.nodeIds()))
        self.assertIntact()

    def testMoveRoot(self):
        rootId = self.nodeIds()[0][0]
        newId = self.client.runInTxn(
            lambda ctx: self.dbt.moveNode(ctx, self.tree, rootId, 1))
        ctx = self.client.begin()
        self.assertEqual(newId, self.dbt.rootPointer(ctx, self.tree).root)
        self.client.commit(ctx)
        self.assertIntact()

    def testBadMoves(self):
        ctx = self.client.begin()
        with self.assertRaises(DbtError):
            self.dbt.moveNode(ctx, self.tree, self.nodeIds()[0][0], 3)
        with self.assertRaises(NodeNotFound):
            self.dbt.moveNode(ctx, self.tree, NodeId(0, 10 ** 9), 1)
        self.client.abort(ctx)


class ConcurrentTreeTest(unittest.TestCase):
    def testMoveDuringLookupEveryInterleaving(self):
        def runOnce(sched):
            dbt = loopbackDbt(3, fanout=4)
            tree = buildTree(dbt, 12)
            ctx = dbt.client.begin()
            leafId = next(nodeId for nodeId, node in dbt.nodes(ctx, tree)
                          if node.isLeaf and key(5) in node.keys)
            dbt.client.commit(ctx)
            dbt.client.transport.scheduler = sched

            def mover():
                return dbt.client.runInTxn(
                    lambda ctx: dbt.moveNode(ctx, tree, leafId, (leafId.hint + 1) % 3))

            def reader():
                return dbt.client.runInTxn(lambda ctx: dbt.lookup(ctx, tree, key(5)))

            results, errors = sched.run({"mover": mover, "reader": reader})
            self.assertEqual({}, errors)
            self.assertEqual(b"row-5", results["reader"])
            dbt.client.transport.scheduler = None
            report = walk(dbt, tree)
            self.assertTrue(report.ok, report.findings)

        self.assertEqual(150, exploreSchedules(runOnce, maxRuns=150))

    def testMoveDuringInsert(self):
        for seed in range(20):
            dbt = loopbackDbt(3, fanout=4, seed=seed)
            tree = buildTree(dbt, 12)
            ctx = dbt.client.begin()
            leafId = next(nodeId for nodeId, node in dbt.nodes(ctx, tree)
                          if node.isLeaf and key(5) in node.keys)
            dbt.client.commit(ctx)
            sched = Scheduler(seed=seed)
            dbt.client.transport.scheduler = sched

            def mover(dbt=dbt, tree=tree, leafId=leafId):
                return dbt.client.runInTxn(
                    lambda ctx: dbt.moveNode(ctx, tree, leafId, (leafId.hint + 1) % 3),
                    retries=50)

            def inserter(dbt=dbt, tree=tree):
                return dbt.client.runInTxn(
                    lambda ctx: dbt.insert(ctx, tree, key(5) + b"x", b"new"), retries=50)

            _, errors = sched.run({"mover": mover, "inserter": inserter})
            self.assertEqual({}, errors)
            dbt.client.transport.scheduler = None
            report = walk(dbt, tree)
            self.assertTrue(report.ok, report.findings)
            self.assertEqual(13, report.entries)

    def testConcurrentInsertersAreSnapshotIsolated(self):
        history = History()
        sched = Scheduler(seed=5)
        client = loopbackClient(3, history=history, scheduler=sched)
        client.transport.scheduler = None
        dbt = Dbt(client, fanout=4)
        tree = client.runInTxn(dbt.createTree)
        client.transport.scheduler = sched
        inserted = {}

        def inserter(base):
            def run():
                done = []
                for num in range(base, base + 15):
                    try:
                        client.runInTxn(
                            lambda ctx, num=num: dbt.insert(ctx, tree, key(num), b"v"),
                            retries=30)
                        done.append(num)
                    except TxnAborted:
                        pass
                inserted[base] = done
            return run

        _, errors = sched.run({"a": inserter(0), "b": inserter(100), "c": inserter(200)})
        self.assertEqual({}, errors)
        client.transport.scheduler = None
        ctx = client.begin()
        expected = sorted(key(num) for done in inserted.values() for num in done)
        self.assertEqual(expected, [k for k, _ in dbt.scan(ctx, tree)])
        client.commit(ctx)
        self.assertTrue(walk(dbt, tree).ok)
        self.assertIsNone(checkSi(history))
