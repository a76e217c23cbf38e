"""
Append-only commit log. Each record is a kind byte followed by wire
primitive encodings:

    'C' | key (u32 len + bytes) | ts (u64) | value flag (u8) [+ u32 len + bytes]

Only committed versions are logged; prepared state is volatile. A torn
record at the tail (crash mid-append) is cut off during replay.
"""
import logging
import os

from ..config import LOG_SYNC
from ..wire import DecodeError
from ..wire.primitives import Packer, Unpacker

LOG = logging.getLogger(__name__)

RECORD_COMMIT = ord("C")
RECORD_HWM = ord("T")
LOG_NAME = "commits.log"


def encodeCommitRecord(packer, key, ts, value):
    packer.u8(RECORD_COMMIT).blob(key).u64(ts).optBlob(value)


def _syncFile(fp, sync):
    if sync == LOG_SYNC.NONE:
        return
    fp.flush()
    if sync == LOG_SYNC.FSYNC:
        os.fsync(fp.fileno())


def writeAtomically(path, data, sync=LOG_SYNC.FSYNC):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fp:
        fp.write(data)
        fp.flush()
        if sync != LOG_SYNC.NONE:
            os.fsync(fp.fileno())
    os.replace(tmp, path)


class CommitLog(object):
    def __init__(self, dataDir, sync=LOG_SYNC.FLUSH):
        self._path = os.path.join(dataDir, LOG_NAME)
        self._sync = sync
        self._fp = None

    @property
    def path(self):
        return self._path

    def replay(self):
        """Yields (key, ts, value) for every intact record."""
        if not os.path.exists(self._path):
            return
        with open(self._path, "rb") as fp:
            data = fp.read()
        unpacker = Unpacker(data)
        good = 0
        count = 0
        try:
            while not unpacker.atEnd():
                kind = unpacker.u8("record kind")
                if kind != RECORD_COMMIT:
                    raise DecodeError(good, "unknown record kind {}".format(kind))
                key = unpacker.blob("key")
                ts = unpacker.u64("ts")
                value = unpacker.optBlob("value")
                good = unpacker.offset
                count += 1
                yield key, ts, value
        except DecodeError as err:
            LOG.warning("%s: dropping torn tail at offset %d (%s)",
                        self._path, good, err.reason)
            with open(self._path, "r+b") as fp:
                fp.truncate(good)
        LOG.info("%s: replayed %d records", self._path, count)

    def _open(self):
        if self._fp is None:
            self._fp = open(self._path, "ab")
        return self._fp

    def append(self, records):
        packer = Packer()
        for key, ts, value in records:
            encodeCommitRecord(packer, key, ts, value)
        fp = self._open()
        fp.write(packer.getvalue())
        _syncFile(fp, self._sync)

    def compact(self, records):
        packer = Packer()
        for key, ts, value in records:
            encodeCommitRecord(packer, key, ts, value)
        self.close()
        writeAtomically(self._path, packer.getvalue(), self._sync)
        LOG.info("%s: compacted to %d records", self._path, len(records))

    def close(self):
        if self._fp is not None:
            self._fp.close()
            self._fp = None
