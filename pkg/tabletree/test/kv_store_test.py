from __future__ import absolute_import, division, print_function

import random
import unittest

from tabletree.kv import ProtocolError
from tabletree.kv.store import MvccStore, Version
from tabletree.wire import TransportError
from tabletree.wire.codec import ReadStatus, Vote

from .helpers import FakeClock


def _commit(store, txnId, snapshotTs, commitTs, writes):
    assert store.prepare(txnId, snapshotTs, writes) == Vote.OK
    store.commit(txnId, commitTs)


class MvccStoreTest(unittest.TestCase):
    def setUp(self):
        self.clock = FakeClock()
        self.store = MvccStore(lease=30.0, clock=self.clock)

    def testAbsent(self):
        result = self.store.read(b"k", 10)
        self.assertEqual(ReadStatus.ABSENT, result.status)
        self.assertIsNone(result.version)
        self.assertIsNone(result.pending)

    def testVisibleVersion(self):
        _commit(self.store, 1, 1, 5, [(b"k", b"v5")])
        _commit(self.store, 2, 6, 9, [(b"k", b"v9")])
        self.assertEqual(ReadStatus.ABSENT, self.store.read(b"k", 4).status)
        self.assertEqual(Version(5, b"v5"), self.store.read(b"k", 5).version)
        self.assertEqual(Version(5, b"v5"), self.store.read(b"k", 8).version)
        self.assertEqual(Version(9, b"v9"), self.store.read(b"k", 100).version)

    def testTombstone(self):
        _commit(self.store, 1, 1, 5, [(b"k", b"v")])
        _commit(self.store, 2, 6, 7, [(b"k", None)])
        result = self.store.read(b"k", 7)
        self.assertEqual(ReadStatus.DELETED, result.status)
        self.assertEqual(7, result.version.ts)
        self.assertTrue(result.version.isTombstone)

    def testPendingLockShownToNewerSnapshots(self):
        self.assertEqual(Vote.OK, self.store.prepare(1, 5, [(b"k", b"staged")]))
        self.assertTrue(self.store.isPrepared(1))
        self.assertIsNone(self.store.read(b"k", 5).pending)
        result = self.store.read(b"k", 6)
        self.assertEqual(ReadStatus.ABSENT, result.status)
        self.assertEqual(1, result.pending.txnId)
        self.assertEqual(b"staged", result.pending.staged)

    def testFirstCommitterWins(self):
        _commit(self.store, 1, 1, 10, [(b"k", b"a")])
        self.assertEqual(Vote.CONFLICT, self.store.prepare(2, 9, [(b"k", b"b")]))
        self.assertEqual(Vote.OK, self.store.prepare(3, 10, [(b"k", b"c")]))

    def testLockedKey(self):
        self.assertEqual(Vote.OK, self.store.prepare(1, 5, [(b"k", b"a")]))
        self.assertEqual(Vote.LOCKED,
                         self.store.prepare(2, 5, [(b"j", b"x"), (b"k", b"b")]))
        # a refused prepare leaves no locks behind
        self.assertIsNone(self.store.chain(b"j"))
        self.assertFalse(self.store.isPrepared(2))

    def testExpiredLeaseAbortsHolder(self):
        self.assertEqual(Vote.OK, self.store.prepare(1, 5, [(b"k", b"a")]))
        self.clock.now += 31
        self.assertEqual(Vote.OK, self.store.prepare(2, 5, [(b"k", b"b")]))
        with self.assertRaises(ProtocolError):
            self.store.commit(1, 6)
        self.store.commit(2, 6)
        self.assertEqual(b"b", self.store.read(b"k", 6).version.value)

    def testExpiredLeaseRollsCommittedHolderForward(self):
        self.store.resolver = {1: 7}.get
        self.assertEqual(Vote.OK,
                         self.store.prepare(1, 5, [(b"k", b"a"), (b"j", b"a")]))
        self.clock.now += 31
        # the holder's write at 7 is newer than this snapshot
        self.assertEqual(Vote.CONFLICT, self.store.prepare(2, 6, [(b"k", b"b")]))
        self.assertEqual(Version(7, b"a"), self.store.read(b"j", 7).version)
        self.store.commit(1, 7)
        self.assertEqual(Vote.OK, self.store.prepare(3, 7, [(b"k", b"c")]))

    def testExpiredLeaseAbortsHolderWithoutCommitTs(self):
        self.store.resolver = {}.get
        self.assertEqual(Vote.OK, self.store.prepare(1, 5, [(b"k", b"a")]))
        self.clock.now += 31
        self.assertEqual(Vote.OK, self.store.prepare(2, 5, [(b"k", b"b")]))
        with self.assertRaisesRegex(ProtocolError, "aborted"):
            self.store.commit(1, 6)

    def testUnreachableOracleKeepsExpiredLock(self):
        def resolver(_txnId):
            raise TransportError("oracle down")

        self.store.resolver = resolver
        self.assertEqual(Vote.OK, self.store.prepare(1, 5, [(b"k", b"a")]))
        self.clock.now += 31
        self.assertEqual(Vote.LOCKED, self.store.prepare(2, 5, [(b"k", b"b")]))
        self.assertTrue(self.store.isPrepared(1))
        self.store.commit(1, 6)

    def testDuplicatePrepare(self):
        self.store.prepare(1, 5, [(b"k", b"a")])
        with self.assertRaises(ProtocolError):
            self.store.prepare(1, 5, [(b"k", b"a")])

    def testCommitIsIdempotent(self):
        _commit(self.store, 1, 1, 5, [(b"k", b"a")])
        self.store.commit(1, 5)
        self.assertEqual(1, len(self.store.chain(b"k").versions))

    def testCommitErrors(self):
        with self.assertRaisesRegex(ProtocolError, "unknown"):
            self.store.commit(1, 5)
        self.store.prepare(2, 5, [(b"k", b"a")])
        with self.assertRaisesRegex(ProtocolError, "not after snapshot"):
            self.store.commit(2, 5)
        self.store.abort(2)
        with self.assertRaisesRegex(ProtocolError, "aborted"):
            self.store.commit(2, 6)

    def testAbortReleasesLocks(self):
        self.store.prepare(1, 5, [(b"k", b"a")])
        self.store.abort(1)
        self.store.abort(1)
        self.store.abort(99)
        self.assertIsNone(self.store.chain(b"k"))
        self.assertEqual(Vote.OK, self.store.prepare(2, 5, [(b"k", b"b")]))

    def testScan(self):
        _commit(self.store, 1, 1, 5, [(b"a", b"1"), (b"b", b"2"), (b"c", b"3"),
                                      (b"d", None)])
        _commit(self.store, 2, 6, 8, [(b"b", b"22")])
        self.assertEqual([(b"a", Version(5, b"1")), (b"b", Version(5, b"2")),
                          (b"c", Version(5, b"3"))],
                         self.store.scan(b"a", b"z", 7, 100))
        self.assertEqual([(b"b", Version(8, b"22"))],
                         self.store.scan(b"b", b"c", 8, 100))
        self.assertEqual([(b"a", Version(5, b"1"))],
                         self.store.scan(b"a", b"z", 8, 1))
        self.assertEqual([], self.store.scan(b"a", b"z", 4, 100))

    def testGc(self):
        for txnId, ts in enumerate([1, 3, 5], 1):
            _commit(self.store, txnId, ts - 1, ts, [(b"k", b"v%d" % ts)])
        _commit(self.store, 10, 1, 2, [(b"gone", b"x")])
        _commit(self.store, 11, 3, 4, [(b"gone", None)])
        self.assertEqual(3, self.store.gc(4))
        self.assertEqual([5, 3], [v.ts for v in self.store.chain(b"k").versions])
        self.assertIsNone(self.store.chain(b"gone"))
        self.assertEqual(b"v3", self.store.read(b"k", 4).version.value)
        self.assertEqual(0, self.store.gc(4))

    def testGcForgetsOldOutcomes(self):
        for txnId in range(1, 5001):
            _commit(self.store, txnId, 2 * txnId - 1, 2 * txnId,
                    [(b"k%d" % (txnId % 50), b"v")])
        self.assertEqual(Vote.CONFLICT, self.store.prepare(6000, 1, [(b"k1", b"x")]))
        self.assertEqual(Vote.OK, self.store.prepare(7000, 20000, [(b"new", b"x")]))
        _commit(self.store, 8000, 20000, 20001, [(b"late", b"x")])
        self.assertEqual(5003, self.store.outcomesHeld())
        self.store.gc(10001)
        self.assertEqual(2, self.store.outcomesHeld())
        for txnId in (7000, 8000):
            with self.assertRaises(ProtocolError):
                self.store.prepare(txnId, 20000, [(b"other", b"x")])
        self.store.commit(7000, 20002)
        self.store.commit(8000, 20001)

    def testInstallRejectsDuplicateTs(self):
        _commit(self.store, 1, 1, 5, [(b"k", b"a")])
        self.store.replay(b"k", 5, b"a")
        with self.assertRaises(ProtocolError):
            self.store.chain(b"k").install(Version(5, b"other"))


class StoreModel(object):
    """Committed versions per key, ascending by ts."""

    def __init__(self):
        self.versions = {}

    def latestTs(self, key):
        versions = self.versions.get(key)
        return versions[-1][0] if versions else 0

    def read(self, key, ts):
        visible = [v for v in self.versions.get(key, []) if v[0] <= ts]
        if not visible:
            return ReadStatus.ABSENT, None
        version = Version(*visible[-1])
        if version.value is None:
            return ReadStatus.DELETED, version
        return ReadStatus.FOUND, version

    def commit(self, writes, ts):
        for key, value in writes:
            self.versions.setdefault(key, []).append((ts, value))

    def gc(self, watermark):
        removed = 0
        for key in list(self.versions):
            versions = self.versions[key]
            old = [v for v in versions if v[0] <= watermark]
            if len(old) > 1:
                removed += len(old) - 1
                versions = [old[-1]] + [v for v in versions if v[0] > watermark]
            if len(versions) == 1 and versions[0][1] is None and \
                    versions[0][0] <= watermark:
                versions = []
                removed += 1
            if versions:
                self.versions[key] = versions
            else:
                del self.versions[key]
        return removed


class RandomizedStoreTest(unittest.TestCase):
    def testAgainstModel(self):
        # pylint: disable=too-many-locals
        rng = random.Random(2024)
        store = MvccStore()
        model = StoreModel()
        keys = [b"k%02d" % i for i in range(20)]
        now = 1
        watermark = 0
        for txnId in range(1, 50001):
            roll = rng.random()
            if roll < 0.5:
                key = rng.choice(keys)
                ts = rng.randint(watermark, now)
                status, version = model.read(key, ts)
                result = store.read(key, ts)
                self.assertEqual(status, result.status)
                self.assertEqual(version, result.version)
            elif roll < 0.85:
                snapshotTs = rng.randint(watermark, now)
                writes = [(key, rng.choice([None, b"v%d" % txnId]))
                          for key in rng.sample(keys, rng.randint(1, 3))]
                conflict = any(model.latestTs(key) > snapshotTs for key, _ in writes)
                vote = store.prepare(txnId, snapshotTs, writes)
                self.assertEqual(Vote.CONFLICT if conflict else Vote.OK, vote)
                if vote == Vote.OK:
                    if rng.random() < 0.8:
                        now += 1
                        store.commit(txnId, now)
                        model.commit(writes, now)
                    else:
                        store.abort(txnId)
            elif roll < 0.95:
                start, end = sorted(rng.sample(keys, 2))
                ts = rng.randint(watermark, now)
                limit = rng.randint(1, 30)
                expected = []
                for key in keys:
                    status, version = model.read(key, ts)
                    if start <= key < end and status == ReadStatus.FOUND:
                        expected.append((key, version))
                self.assertEqual(expected[:limit], store.scan(start, end, ts, limit))
            else:
                watermark = rng.randint(watermark, now)
                self.assertEqual(model.gc(watermark), store.gc(watermark))
