"""
KvServer turns request Messages into reply Messages. It is transport
agnostic: the socket daemon and the loopback transport both call handle().
"""
import logging
import time

from ..config import LOG_SYNC
from ..wire.codec import Kind, message
from . import (BadRequestError, KvError, NotOracleError, NotOwnerError,
               errorFromReply, errorReply)
from .durable import CommitLog
from .oracle import DEFAULT_BLOCK, TimestampOracle
from .placement import ownerOf
from .store import MvccStore

LOG = logging.getLogger(__name__)

ORACLE_SERVER = 0


def remoteResolver(send):
    """
    A lock resolver for servers without the oracle: send(dest, msg) carries
    TXN_RESOLVE to server 0 and returns its reply.
    """
    def resolve(txnId):
        reply = send(ORACLE_SERVER, message(Kind.TXN_RESOLVE, txnId=txnId))
        if reply.kind == Kind.ERROR:
            raise errorFromReply(reply)
        return reply.commitTs
    return resolve


class KvServer(object):
    # pylint: disable=too-many-arguments
    def __init__(self, serverId, nServers, dataDir=None, oracle=False,
                 lease=30.0, oracleBlock=DEFAULT_BLOCK, sync=LOG_SYNC.FLUSH,
                 clock=time.monotonic, resolver=None):
        self.serverId = serverId
        self.nServers = nServers
        self._commitLog = CommitLog(dataDir, sync) if dataDir else None
        self.store = MvccStore(lease=lease, clock=clock, commitLog=self._commitLog)
        self.oracle = TimestampOracle(dataDir, oracleBlock) if oracle else None
        self.store.resolver = self.oracle.resolve if oracle else resolver
        if self._commitLog is not None:
            for key, ts, value in self._commitLog.replay():
                self.store.replay(key, ts, value)
        self._handlers = {
            Kind.TS_GET: self._tsGet,
            Kind.READ: self._read,
            Kind.SCAN: self._scan,
            Kind.PREPARE: self._prepare,
            Kind.COMMIT: self._commit,
            Kind.ABORT: self._abort,
            Kind.GC: self._gc,
            Kind.TXN_STATUS: self._txnStatus,
            Kind.TXN_RESOLVE: self._txnResolve,
        }
        LOG.info("server %d/%d up, %d keys%s", serverId, nServers,
                 len(self.store), " (oracle)" if oracle else "")

    def close(self):
        if self._commitLog is not None:
            self._commitLog.close()

    def _checkOwner(self, key):
        owner = ownerOf(key, self.nServers)
        if owner != self.serverId:
            raise NotOwnerError("key {} belongs to server {}, not {}".format(
                key.hex(), owner, self.serverId))

    def handle(self, request):
        handler = self._handlers.get(request.kind)
        try:
            if handler is None:
                raise BadRequestError(
                    "{} is not a request kind".format(request.kind.name))
            reply = handler(request)
        except KvError as err:
            LOG.warning("server %d: %s failed: %s", self.serverId,
                        request.kind.name, err)
            reply = errorReply(err)
        except Exception as err:  # pylint: disable=broad-except
            LOG.exception("server %d: unexpected failure handling %s",
                          self.serverId, request.kind.name)
            reply = errorReply(KvError("internal error: {}".format(err)))
        return reply.withRequestId(request.requestId)

    def _oracle(self):
        if self.oracle is None:
            raise NotOracleError(
                "server {} does not host the oracle".format(self.serverId))
        return self.oracle

    def _tsGet(self, request):
        return message(Kind.TS_REPLY, ts=self._oracle().next(request.txnId))

    def _txnStatus(self, request):
        return message(Kind.TXN_STATUS_REPLY,
                       commitTs=self._oracle().commitTsOf(request.txnId))

    def _txnResolve(self, request):
        return message(Kind.TXN_STATUS_REPLY,
                       commitTs=self._oracle().resolve(request.txnId))

    def _read(self, request):
        self._checkOwner(request.key)
        result = self.store.read(request.key, request.snapshotTs)
        version = result.version
        pending = result.pending
        return message(Kind.READ_REPLY, status=result.status,
                       ts=version.ts if version else 0,
                       value=version.value if version else None,
                       lockTxn=pending.txnId if pending else 0,
                       staged=pending.staged if pending else None)

    def _scan(self, request):
        if request.end < request.start:
            raise BadRequestError("scan range end precedes start")
        entries = self.store.scan(request.start, request.end,
                                  request.snapshotTs, request.limit)
        return message(Kind.SCAN_REPLY,
                       entries=[(key, v.ts, v.value) for key, v in entries])

    def _prepare(self, request):
        for key, _ in request.writes:
            self._checkOwner(key)
        vote = self.store.prepare(request.txnId, request.snapshotTs,
                                  request.writes)
        LOG.debug("server %d: prepare %x -> %s", self.serverId,
                  request.txnId, vote.name)
        return message(Kind.PREPARE_REPLY, vote=vote)

    def _commit(self, request):
        self.store.commit(request.txnId, request.commitTs)
        return message(Kind.ACK)

    def _abort(self, request):
        self.store.abort(request.txnId)
        return message(Kind.ACK)

    def _gc(self, request):
        removed = self.store.gc(request.watermark)
        if self.oracle is not None:
            self.oracle.forget(request.watermark)
        LOG.info("server %d: gc below %d removed %d versions",
                 self.serverId, request.watermark, removed)
        return message(Kind.GC_REPLY, removed=removed)
