"""
In-memory multi-version store. Each key maps to a VersionChain holding
committed versions newest-first plus at most one prepared lock. A value of
None is a tombstone.
"""
import bisect
from dataclasses import dataclass
import logging
import threading
import time
from typing import List, Optional

from ..wire import WireError
from ..wire.codec import ReadStatus, Vote
from . import KvError, ProtocolError

LOG = logging.getLogger(__name__)

COMMITTED = "committed"
ABORTED = "aborted"


@dataclass(frozen=True)
class Version:
    ts: int
    value: Optional[bytes]

    @property
    def isTombstone(self):
        return self.value is None


@dataclass
class PreparedLock:
    txnId: int
    staged: Optional[bytes]
    snapshotTs: int
    expires: float


@dataclass(frozen=True)
class ReadResult:
    status: ReadStatus
    version: Optional[Version] = None
    pending: Optional[PreparedLock] = None

    @property
    def found(self):
        return self.status == ReadStatus.FOUND


class VersionChain(object):
    __slots__ = ("key", "versions", "lock")

    def __init__(self, key):
        self.key = key
        self.versions: List[Version] = []
        self.lock: Optional[PreparedLock] = None

    def visible(self, snapshotTs) -> Optional[Version]:
        for version in self.versions:
            if version.ts <= snapshotTs:
                return version
        return None

    def latestTs(self):
        return self.versions[0].ts if self.versions else 0

    def install(self, version):
        tss = [-v.ts for v in self.versions]
        pos = bisect.bisect_left(tss, -version.ts)
        if pos < len(tss) and tss[pos] == -version.ts:
            raise ProtocolError("version ts {} already present for key {}".format(
                version.ts, self.key.hex()))
        self.versions.insert(pos, version)

    def empty(self):
        return not self.versions and self.lock is None


class MvccStore(object):
    # pylint: disable=too-many-instance-attributes
    def __init__(self, lease=30.0, clock=time.monotonic, commitLog=None,
                 resolver=None):
        self._lock = threading.RLock()
        self._chains = {}
        self._keys = []
        self._prepared = {}
        self._finished = {}
        self._lease = lease
        self._clock = clock
        self._commitLog = commitLog
        self.resolver = resolver

    def __len__(self):
        with self._lock:
            return len(self._chains)

    def chain(self, key) -> Optional[VersionChain]:
        return self._chains.get(key)

    def _chainFor(self, key):
        chain = self._chains.get(key)
        if chain is None:
            chain = VersionChain(key)
            self._chains[key] = chain
            bisect.insort(self._keys, key)
        return chain

    def _dropIfEmpty(self, chain):
        if chain.empty():
            del self._chains[chain.key]
            del self._keys[bisect.bisect_left(self._keys, chain.key)]

    @staticmethod
    def _resolve(chain, snapshotTs):
        version = chain.visible(snapshotTs) if chain else None
        if version is None:
            return ReadResult(ReadStatus.ABSENT)
        if version.isTombstone:
            return ReadResult(ReadStatus.DELETED, version)
        return ReadResult(ReadStatus.FOUND, version)

    def read(self, key, snapshotTs) -> ReadResult:
        """
        The staged value of a lock older than the snapshot is returned as
        `pending`, never as the result: its holder may already own a commit
        timestamp at or below snapshotTs, which only the oracle knows.
        """
        with self._lock:
            chain = self._chains.get(key)
            result = self._resolve(chain, snapshotTs)
            if chain is not None and chain.lock is not None and \
                    chain.lock.snapshotTs < snapshotTs:
                result = ReadResult(result.status, result.version, chain.lock)
            return result

    def scan(self, start, end, snapshotTs, limit):
        out = []
        with self._lock:
            pos = bisect.bisect_left(self._keys, start)
            while pos < len(self._keys) and len(out) < limit:
                key = self._keys[pos]
                if key >= end:
                    break
                result = self._resolve(self._chains[key], snapshotTs)
                if result.found:
                    out.append((key, result.version))
                pos += 1
        return out

    def _expireLock(self, lock, now):
        """
        Settles a lock whose lease ran out. With a resolver the holder is
        rolled forward when the oracle already issued it a commit
        timestamp and aborted otherwise; an unreachable oracle leaves the
        lock in place. Without a resolver the holder is aborted.
        """
        if lock.expires > now:
            return False
        commitTs = 0
        if self.resolver is not None:
            try:
                commitTs = self.resolver(lock.txnId)
            except (KvError, WireError) as err:
                LOG.warning("cannot resolve expired lock of txn %x: %s",
                            lock.txnId, err)
                return False
        if commitTs:
            LOG.info("lease expired for txn %x, committing it at %d",
                     lock.txnId, commitTs)
            self._commitPrepared(lock.txnId, commitTs)
        else:
            LOG.info("lease expired for txn %x, aborting it", lock.txnId)
            self._release(lock.txnId, ABORTED)
        return True

    def _conflicts(self, snapshotTs, writes):
        for key, _ in writes:
            chain = self._chains.get(key)
            if chain is not None and chain.latestTs() > snapshotTs:
                return True
        return False

    def _lockVote(self, txnId, writes, now):
        for key, _ in writes:
            chain = self._chains.get(key)
            if chain is None or chain.lock is None or chain.lock.txnId == txnId:
                continue
            if not self._expireLock(chain.lock, now):
                return Vote.LOCKED
        return Vote.OK

    def prepare(self, txnId, snapshotTs, writes) -> Vote:
        with self._lock:
            if txnId in self._prepared or txnId in self._finished:
                raise ProtocolError("duplicate prepare for txn {:x}".format(txnId))
            now = self._clock()
            vote = Vote.CONFLICT
            if not self._conflicts(snapshotTs, writes):
                vote = self._lockVote(txnId, writes, now)
                # a rolled-forward holder may have written past the snapshot
                if vote == Vote.OK and self._conflicts(snapshotTs, writes):
                    vote = Vote.CONFLICT
            if vote != Vote.OK:
                self._finished[txnId] = (ABORTED, snapshotTs)
                return vote
            expires = now + self._lease
            for key, value in writes:
                self._chainFor(key).lock = PreparedLock(
                    txnId, value, snapshotTs, expires)
            self._prepared[txnId] = (snapshotTs, [key for key, _ in writes])
            return Vote.OK

    def _release(self, txnId, outcome, commitTs=None):
        snapshotTs, keys = self._prepared.pop(txnId)
        installed = []
        for key in keys:
            chain = self._chains[key]
            lock, chain.lock = chain.lock, None
            if commitTs is not None:
                version = Version(commitTs, lock.staged)
                chain.install(version)
                installed.append((key, version))
            self._dropIfEmpty(chain)
        self._finished[txnId] = (outcome, commitTs or snapshotTs)
        return installed

    def _commitPrepared(self, txnId, commitTs):
        snapshotTs, keys = self._prepared[txnId]
        if commitTs <= snapshotTs:
            raise ProtocolError("commit ts {} not after snapshot {}".format(
                commitTs, snapshotTs))
        if self._commitLog is not None:
            self._commitLog.append(
                [(key, commitTs, self._chains[key].lock.staged) for key in keys])
        self._release(txnId, COMMITTED, commitTs)

    def commit(self, txnId, commitTs):
        with self._lock:
            outcome, _ = self._finished.get(txnId, (None, 0))
            if outcome == COMMITTED:
                return
            if outcome == ABORTED:
                raise ProtocolError("commit for aborted txn {:x}".format(txnId))
            if txnId not in self._prepared:
                raise ProtocolError("commit for unknown txn {:x}".format(txnId))
            self._commitPrepared(txnId, commitTs)

    def abort(self, txnId):
        with self._lock:
            if txnId in self._prepared:
                self._release(txnId, ABORTED)
            elif txnId not in self._finished:
                LOG.debug("abort for unknown txn %x", txnId)

    def isPrepared(self, txnId):
        with self._lock:
            return txnId in self._prepared

    def outcomesHeld(self):
        """Prepared plus finished transactions the store still tracks."""
        with self._lock:
            return len(self._prepared) + len(self._finished)

    def gc(self, watermark):
        removed = 0
        with self._lock:
            for key in list(self._keys):
                chain = self._chains[key]
                for pos, version in enumerate(chain.versions):
                    if version.ts <= watermark:
                        removed += len(chain.versions) - pos - 1
                        del chain.versions[pos + 1:]
                        break
                if (len(chain.versions) == 1 and chain.lock is None and
                        chain.versions[0].isTombstone and
                        chain.versions[0].ts <= watermark):
                    chain.versions = []
                    removed += 1
                    self._dropIfEmpty(chain)
            self._finished = {txnId: done for txnId, done in self._finished.items()
                              if done[1] >= watermark}
            if removed and self._commitLog is not None:
                self._commitLog.compact(self.committedRecords())
        return removed

    def committedRecords(self):
        with self._lock:
            return [(key, version.ts, version.value)
                    for key in self._keys
                    for version in reversed(self._chains[key].versions)]

    def replay(self, key, ts, value):
        """Installs a version recovered from the commit log."""
        with self._lock:
            chain = self._chainFor(key)
            if any(v.ts == ts for v in chain.versions):
                return
            chain.install(Version(ts, value))
