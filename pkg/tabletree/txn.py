"""
Client-side snapshot-isolation transactions over the partitioned servers.

Writes are buffered in the TxnContext until commit, then committed with
client-coordinated two-phase commit: PREPARE to every participant in
ascending ServerId order, a commit timestamp from the oracle (server 0),
then COMMIT to every participant. The transaction is committed once the
oracle has issued its commit timestamp.
"""
from dataclasses import dataclass
import enum
import logging
import random
import threading
import time
from typing import Optional

from .kv import KvError, errorFromReply
from .kv.placement import ownerOf
from .wire import TransportError, WireError
from .wire.codec import MAX_VALUE, Kind, ReadStatus, Vote, message

LOG = logging.getLogger(__name__)

ORACLE = 0
DEFAULT_MAX_WRITES = 10000
COMMIT_ATTEMPTS = 20
MAX_BACKOFF = 1.0


class TxnError(Exception):
    pass


class InactiveTxnError(TxnError):
    pass


class WriteSetTooLarge(TxnError):
    pass


class TxnAborted(TxnError):
    def __init__(self, reason):
        super().__init__("transaction aborted: {}".format(reason))
        self.reason = reason


class TxnStatus(enum.Enum):
    ACTIVE = "active"
    COMMITTED = "committed"
    ABORTED = "aborted"


@dataclass(frozen=True)
class CommitOutcome:
    committed: bool
    ts: Optional[int] = None
    reason: Optional[str] = None


class TxnContext(object):
    def __init__(self, txnId, snapshotTs):
        self.txnId = txnId
        self.snapshotTs = snapshotTs
        self.writeBuffer = {}
        self.status = TxnStatus.ACTIVE

    @property
    def active(self):
        return self.status == TxnStatus.ACTIVE

    def __repr__(self):
        return "TxnContext({:016x}, snapshot={}, {} writes, {})".format(
            self.txnId, self.snapshotTs, len(self.writeBuffer),
            self.status.value)


class TxnClient(object):
    # pylint: disable=too-many-arguments
    def __init__(self, transport, history=None, maxWrites=DEFAULT_MAX_WRITES,
                 backoff=0.005, rng=None, sleep=time.sleep):
        self.transport = transport
        self.history = history
        self.maxWrites = maxWrites
        self.backoff = backoff
        self._rng = rng or random.SystemRandom()
        self._rngLock = threading.Lock()
        self._sleep = sleep

    @classmethod
    def fromConfig(cls, transport, config, history=None):
        return cls(transport, history=history, maxWrites=config.maxWrites,
                   backoff=config.backoff)

    @property
    def nServers(self):
        return self.transport.nServers

    def _record(self, kind, ctx, key=None, ts=0, value=None):
        if self.history is not None:
            self.history.record(kind, ctx.txnId, key, ts, value)

    def call(self, dest, msg):
        reply = self.transport.sendRequest(dest, msg)
        if reply.kind == Kind.ERROR:
            raise errorFromReply(reply)
        return reply

    def _newTxnId(self):
        with self._rngLock:
            txnId = 0
            while not txnId:
                txnId = self._rng.getrandbits(64)
            return txnId

    def timestamp(self, txnId=0):
        return self.call(ORACLE, message(Kind.TS_GET, txnId=txnId)).ts

    def begin(self):
        ctx = TxnContext(self._newTxnId(), self.timestamp())
        self._record("begin", ctx, ts=ctx.snapshotTs)
        return ctx

    @staticmethod
    def _checkActive(ctx):
        if not ctx.active:
            raise InactiveTxnError("{!r} is not active".format(ctx))

    def get(self, ctx, key):
        """Returns the value visible to ctx, or None."""
        self._checkActive(ctx)
        if key in ctx.writeBuffer:
            value = ctx.writeBuffer[key]
            self._record("read", ctx, key, 0, value)
            return value
        reply = self.call(ownerOf(key, self.nServers),
                          message(Kind.READ, key=key, snapshotTs=ctx.snapshotTs))
        ts = reply.ts
        value = reply.value if reply.status == ReadStatus.FOUND else None
        if reply.lockTxn:
            commitTs = self.call(
                ORACLE, message(Kind.TXN_STATUS, txnId=reply.lockTxn)).commitTs
            if ts < commitTs <= ctx.snapshotTs:
                ts, value = commitTs, reply.staged
        self._record("read", ctx, key, ts, value)
        return value

    def _write(self, ctx, key, value):
        self._checkActive(ctx)
        if key not in ctx.writeBuffer and len(ctx.writeBuffer) >= self.maxWrites:
            raise WriteSetTooLarge("write set exceeds {} entries".format(
                self.maxWrites))
        ctx.writeBuffer[key] = value
        self._record("write", ctx, key, 0, value)

    def put(self, ctx, key, value):
        if len(value) > MAX_VALUE:
            raise TxnError("value of {} bytes exceeds {}".format(len(value), MAX_VALUE))
        self._write(ctx, key, bytes(value))

    def delete(self, ctx, key):
        self._write(ctx, key, None)

    def abort(self, ctx):
        self._checkActive(ctx)
        ctx.writeBuffer = {}
        ctx.status = TxnStatus.ABORTED
        self._record("abort", ctx)

    def _participants(self, ctx):
        groups = {}
        for key, value in ctx.writeBuffer.items():
            groups.setdefault(ownerOf(key, self.nServers), []).append((key, value))
        return sorted(groups.items())

    def _abortParticipants(self, ctx, participants):
        for dest, _ in participants:
            try:
                self.call(dest, message(Kind.ABORT, txnId=ctx.txnId))
            except (TransportError, KvError) as err:
                LOG.info("abort of %x at server %d failed: %s",
                         ctx.txnId, dest, err)

    def _aborted(self, ctx, participants, reason):
        self._abortParticipants(ctx, participants)
        ctx.status = TxnStatus.ABORTED
        self._record("abort", ctx)
        LOG.debug("txn %x aborted: %s", ctx.txnId, reason)
        return CommitOutcome(False, reason=reason)

    def _retryDelay(self, attempt):
        return min(self.backoff * (2 ** attempt), MAX_BACKOFF)

    def _sendCommits(self, ctx, participants, commitTs):
        remaining = [dest for dest, _ in participants]
        for attempt in range(COMMIT_ATTEMPTS):
            failed = []
            for dest in remaining:
                try:
                    self.call(dest, message(Kind.COMMIT, txnId=ctx.txnId,
                                            commitTs=commitTs))
                except TransportError as err:
                    LOG.warning("commit of %x at server %d failed (%s), "
                                "will retry", ctx.txnId, dest, err)
                    failed.append(dest)
                except KvError as err:
                    # past the commit point; retrying cannot change the answer
                    LOG.error("txn %x committed at %d but server %d refused "
                              "it: %s", ctx.txnId, commitTs, dest, err)
            remaining = failed
            if not remaining:
                return
            self._sleep(self._retryDelay(attempt))
        LOG.error("txn %x committed at %d but servers %s never acknowledged",
                  ctx.txnId, commitTs, remaining)

    def _commitTimestamp(self, ctx):
        # the oracle answers repeats for one txnId with the same timestamp
        for attempt in range(COMMIT_ATTEMPTS - 1):
            try:
                return self.timestamp(ctx.txnId)
            except TransportError as err:
                LOG.warning("commit timestamp for %x: %s", ctx.txnId, err)
                self._sleep(self._retryDelay(attempt))
        return self.timestamp(ctx.txnId)

    def commit(self, ctx):
        self._checkActive(ctx)
        if not ctx.writeBuffer:
            ctx.status = TxnStatus.COMMITTED
            self._record("commit", ctx, ts=ctx.snapshotTs)
            return CommitOutcome(True, ctx.snapshotTs)
        participants = self._participants(ctx)
        try:
            for dest, writes in participants:
                reply = self.call(dest, message(
                    Kind.PREPARE, txnId=ctx.txnId, snapshotTs=ctx.snapshotTs,
                    writes=writes))
                if reply.vote != Vote.OK:
                    return self._aborted(ctx, participants, reply.vote.name.lower())
            commitTs = self._commitTimestamp(ctx)
        except (WireError, KvError) as err:
            return self._aborted(ctx, participants, str(err))
        self._sendCommits(ctx, participants, commitTs)
        ctx.status = TxnStatus.COMMITTED
        self._record("commit", ctx, ts=commitTs)
        return CommitOutcome(True, commitTs)

    def runInTxn(self, body, retries=5):
        """
        Runs body(ctx) in a fresh transaction and commits it, retrying with
        exponential backoff when the commit aborts. Raises TxnAborted once
        the retries are used up.
        """
        attempt = 0
        while True:
            ctx = self.begin()
            try:
                result = body(ctx)
            except BaseException:
                if ctx.active:
                    self.abort(ctx)
                raise
            outcome = self.commit(ctx)
            if outcome.committed:
                return result
            if attempt >= retries:
                raise TxnAborted(outcome.reason)
            self._sleep(self._retryDelay(attempt))
            attempt += 1

    def scanServer(self, dest, start, end, snapshotTs, limit):
        reply = self.call(dest, message(Kind.SCAN, start=start, end=end,
                                        snapshotTs=snapshotTs, limit=limit))
        return reply.entries

    def gc(self, watermark):
        return sum(self.call(dest, message(Kind.GC, watermark=watermark)).removed
                   for dest in range(self.nServers))
