"""
Timestamp oracle. Issues strictly increasing 64-bit timestamps; the
high-water mark is persisted in blocks so a restarted oracle resumes above
anything it could have issued before.
"""
import logging
import os
import threading

from ..wire import DecodeError
from . import ProtocolError
from ..wire.primitives import Packer, Unpacker
from .durable import RECORD_HWM, writeAtomically

LOG = logging.getLogger(__name__)

HWM_NAME = "oracle.hwm"
DEFAULT_BLOCK = 1000


class TimestampOracle(object):
    def __init__(self, dataDir=None, blockSize=DEFAULT_BLOCK):
        assert blockSize >= 1
        self._lock = threading.Lock()
        self._blockSize = blockSize
        self._path = os.path.join(dataDir, HWM_NAME) if dataDir else None
        self._hwm = self._load()
        self._last = self._hwm
        self._commits = {}
        self._fenced = {}

    def _load(self):
        if not self._path or not os.path.exists(self._path):
            return 0
        with open(self._path, "rb") as fp:
            unpacker = Unpacker(fp.read())
        if unpacker.u8("record kind") != RECORD_HWM:
            raise DecodeError(0, "not an oracle high-water mark file")
        hwm = unpacker.u64("high-water mark")
        LOG.info("oracle resumes above %d", hwm)
        return hwm

    def _persist(self, hwm):
        if self._path:
            writeAtomically(self._path, Packer().u8(RECORD_HWM).u64(hwm).getvalue())

    @property
    def highWaterMark(self):
        return self._hwm

    def next(self, txnId=0):
        """
        A nonzero txnId asks for that transaction's commit timestamp: it
        is recorded, and repeated requests get the same answer.
        """
        with self._lock:
            if txnId and txnId in self._commits:
                return self._commits[txnId]
            if txnId in self._fenced:
                raise ProtocolError("txn {:x} was aborted after its lease expired"
                                    .format(txnId))
            self._last += 1
            if self._last > self._hwm:
                self._hwm += self._blockSize
                self._persist(self._hwm)
            if txnId:
                self._commits[txnId] = self._last
            return self._last

    def commitTsOf(self, txnId):
        """0 when no commit timestamp was issued to txnId."""
        with self._lock:
            return self._commits.get(txnId, 0)

    def forget(self, watermark):
        with self._lock:
            self._commits = {txnId: ts for txnId, ts in self._commits.items()
                             if ts > watermark}
            self._fenced = {txnId: ts for txnId, ts in self._fenced.items()
                            if ts > watermark}

    def resolve(self, txnId):
        """
        Settles the fate of a transaction whose lock lease expired: its
        commit timestamp if one was issued, otherwise 0, and from then on
        the oracle refuses to issue it one.
        """
        with self._lock:
            commitTs = self._commits.get(txnId, 0)
            if not commitTs:
                self._fenced.setdefault(txnId, self._last)
            return commitTs
