"""
Transaction histories and the offline snapshot-isolation checker.

One event per line, tab-separated:

    kind  txn-id(hex)  key(hex or -)  ts  value(hex, or - for not-found/delete)

begin carries the snapshot timestamp, commit the commit timestamp (the
snapshot timestamp for read-only commits), read the commit timestamp of
the version it returned (0 for the reader's own buffered write).
"""
import bisect
from dataclasses import dataclass
import logging
import threading
from typing import List, Optional

from ..compat import encoding_open

LOG = logging.getLogger(__name__)

BEGIN = "begin"
READ = "read"
WRITE = "write"
COMMIT = "commit"
ABORT = "abort"
EVENT_KINDS = (BEGIN, READ, WRITE, COMMIT, ABORT)
_NONE = "-"


class HistoryError(Exception):
    pass


@dataclass(frozen=True)
class Event:
    kind: str
    txnId: int
    key: Optional[bytes] = None
    ts: int = 0
    value: Optional[bytes] = None

    def toLine(self):
        return "\t".join([
            self.kind,
            "{:016x}".format(self.txnId),
            _NONE if self.key is None else self.key.hex(),
            str(self.ts),
            _NONE if self.value is None else self.value.hex(),
        ])

    @classmethod
    def fromLine(cls, line):
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 5 or fields[0] not in EVENT_KINDS:
            raise HistoryError("malformed history line: {!r}".format(line))
        kind, txnId, key, ts, value = fields
        try:
            return cls(kind, int(txnId, 16),
                       None if key == _NONE else bytes.fromhex(key),
                       int(ts),
                       None if value == _NONE else bytes.fromhex(value))
        except ValueError as err:
            raise HistoryError("malformed history line: {!r}".format(line)) from err


class History(object):
    """Thread-safe, totally ordered event sink."""

    def __init__(self, events=None):
        self._lock = threading.Lock()
        self.events: List[Event] = list(events or [])

    def record(self, kind, txnId, key=None, ts=0, value=None):
        event = Event(kind, txnId, key, ts, value)
        with self._lock:
            self.events.append(event)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        with self._lock:
            return iter(list(self.events))

    def extend(self, other):
        with self._lock:
            self.events.extend(other)

    def dump(self, path):
        with self._lock:
            lines = [event.toLine() + "\n" for event in self.events]
        with encoding_open(path, "w") as fp:
            fp.writelines(lines)

    @classmethod
    def load(cls, *paths):
        history = cls()
        for path in paths:
            with encoding_open(path) as fp:
                history.extend(Event.fromLine(line) for line in fp if line.strip())
        return history


@dataclass(frozen=True)
class Violation:
    rule: str
    txnIds: tuple
    key: Optional[bytes]
    detail: str

    def __str__(self):
        return "{}: txn {} key {}: {}".format(
            self.rule, " vs ".join("{:016x}".format(t) for t in self.txnIds),
            _NONE if self.key is None else self.key.hex(), self.detail)


class _Txn(object):
    __slots__ = ("txnId", "snapshotTs", "commitTs", "writes", "aborted")

    def __init__(self, txnId, snapshotTs):
        self.txnId = txnId
        self.snapshotTs = snapshotTs
        self.commitTs = None
        self.writes = {}
        self.aborted = False


def _collect(history):
    txns = {}
    for event in history:
        txn = txns.get(event.txnId)
        if event.kind == BEGIN:
            if txn is not None:
                raise HistoryError("txn {:016x} begins twice".format(event.txnId))
            txns[event.txnId] = _Txn(event.txnId, event.ts)
            continue
        if txn is None:
            raise HistoryError("txn {:016x} has {} before begin".format(
                event.txnId, event.kind))
        if txn.commitTs is not None or txn.aborted:
            raise HistoryError("txn {:016x} has {} after it finished".format(
                event.txnId, event.kind))
        if event.kind == WRITE:
            txn.writes[event.key] = event.value
        elif event.kind == COMMIT:
            txn.commitTs = event.ts
        elif event.kind == ABORT:
            txn.aborted = True
    return txns


def _committedVersions(txns):
    """{key: ([commitTs ascending], [(value, txnId)])} over committed writers."""
    versions = {}
    for txn in sorted((t for t in txns.values() if t.commitTs is not None and t.writes),
                      key=lambda t: t.commitTs):
        for key, value in txn.writes.items():
            tss, vals = versions.setdefault(key, ([], []))
            tss.append(txn.commitTs)
            vals.append((value, txn.txnId))
    return versions


def _checkReads(history, txns, versions):
    buffers = {}
    for event in history:
        if event.kind == WRITE:
            buffers.setdefault(event.txnId, {})[event.key] = event.value
        if event.kind != READ:
            continue
        own = buffers.get(event.txnId, {})
        if event.key in own:
            expected, writer = own[event.key], event.txnId
        else:
            snapshotTs = txns[event.txnId].snapshotTs
            tss, vals = versions.get(event.key, ([], []))
            pos = bisect.bisect_right(tss, snapshotTs)
            expected, writer = vals[pos - 1] if pos else (None, None)
        if expected != event.value:
            involved = (event.txnId,) if writer is None else (event.txnId, writer)
            return Violation(
                "read", involved, event.key,
                "read {} but snapshot {} holds {}".format(
                    _NONE if event.value is None else event.value.hex(),
                    txns[event.txnId].snapshotTs,
                    _NONE if expected is None else expected.hex()))
    return None


def _checkWriteOverlap(txns, versions):
    for key in sorted(versions):
        tss, vals = versions[key]
        for pos, (_, txnId) in enumerate(vals):
            txn = txns[txnId]
            if txn.commitTs <= txn.snapshotTs:
                return Violation("commit", (txnId,), key,
                                 "commit ts {} not after snapshot {}".format(
                                     txn.commitTs, txn.snapshotTs))
            if pos == 0:
                continue
            prev = txns[vals[pos - 1][1]]
            if txn.snapshotTs < prev.commitTs:
                return Violation(
                    "first-committer-wins", (prev.txnId, txnId), key,
                    "intervals ({}, {}] and ({}, {}] overlap".format(
                        prev.snapshotTs, tss[pos - 1], txn.snapshotTs, tss[pos]))
    return None


def checkSi(history) -> Optional[Violation]:
    """
    Returns None when the history is snapshot-isolated, else the first
    violation found. Reads are checked before write-write overlap.
    """
    events = list(history)
    txns = _collect(events)
    versions = _committedVersions(txns)
    violation = _checkReads(events, txns, versions) or \
        _checkWriteOverlap(txns, versions)
    if violation is not None:
        LOG.info("history violates snapshot isolation: %s", violation)
    return violation
