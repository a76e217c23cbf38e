"""
tabletree-bench: YCSB-style workload driver. Clients are SQL sessions
sharing one transaction client per process; each client draws its own
replayable operation sequence from the workload seed.
"""
import argparse
import collections
from dataclasses import dataclass
import logging
import multiprocessing
import os
import random
import sys
import threading
import time

import six

from ..argparse import addArgumentParserBaseFlags
from ..binutils import binDescriptionWithStandardFooter
from ..compat import packageVersion
from ..config import Config, ConfigError
from ..dbt.tree import Dbt
from .. import logging as ttlogging
from ..kv import KvError
from ..service import service
from ..service.registry import registerServices
from ..sql import ConflictError, DuplicateTableError, SqlError
from ..sql.executor import Session
from ..txn import TxnClient
from ..utils import sprint, utcNow
from ..wire import WireError
from .history import History
from .zipf import DEFAULT_THETA, keyChooser

LOG = logging.getLogger(__name__)

TABLE = "usertable"
SCAN_LENGTH = 10
PRELOAD_BATCH = 100
OPERATIONS = ("read", "insert", "update", "scan")
_SCATTER = 0x9E3779B97F4A7C15
_KEY_MASK = (1 << 62) - 1

WORKLOAD_HELP = """\
Sample workload file:
    [workload]
    clients = 8
    ops = 10000           # total across all clients
    keyspace = 10000      # rows preloaded before the run
    read = 50             # operation mix in percent, summing to 100
    insert = 0
    update = 50
    scan = 0
    distribution = zipfian   # or uniform
    theta = 0.99
    seed = 1
"""


@dataclass
class WorkloadSpec:
    # pylint: disable=too-many-instance-attributes
    clients: int = 1
    ops: int = 1000
    keyspace: int = 1000
    read: int = 100
    insert: int = 0
    update: int = 0
    scan: int = 0
    distribution: str = "uniform"
    theta: float = DEFAULT_THETA
    seed: int = 0

    def __post_init__(self):
        if self.clients < 1:
            raise ConfigError("workload needs at least one client")
        if self.ops < 0 or self.keyspace < 1:
            raise ConfigError("workload ops must be >= 0 and keyspace >= 1")
        mix = [self.read, self.insert, self.update, self.scan]
        if any(pct < 0 for pct in mix) or sum(mix) != 100:
            raise ConfigError(
                "workload operation mix must be non-negative and sum to 100, "
                "got {}".format(sum(mix)))
        if self.distribution not in ("uniform", "zipfian"):
            raise ConfigError("workload distribution must be uniform or "
                              "zipfian, got {!r}".format(self.distribution))

    @classmethod
    def load(cls, filename):
        cfgParser = six.moves.configparser.RawConfigParser(
            inline_comment_prefixes=("#",))
        if not cfgParser.read(os.path.expanduser(filename)):
            raise ConfigError("cannot read workload file {}".format(filename))
        if not cfgParser.has_section("workload"):
            raise ConfigError("workload file {} has no [workload] section".format(
                filename))
        known = set(cls.__dataclass_fields__)
        unknown = set(cfgParser.options("workload")) - known
        if unknown:
            raise ConfigError("workload file has unknown options: {}".format(
                ", ".join(sorted(unknown))))
        kwargs = {}
        for name, fieldDef in cls.__dataclass_fields__.items():
            if not cfgParser.has_option("workload", name):
                continue
            text = cfgParser.get("workload", name)
            try:
                kwargs[name] = fieldDef.type(text) if fieldDef.type is not str \
                    else text.strip()
            except ValueError as err:
                raise ConfigError("workload option {} has invalid value {!r}".format(
                    name, text)) from err
        return cls(**kwargs)

    def opsFor(self, client):
        return self.ops // self.clients + (1 if client < self.ops % self.clients else 0)


def scatter(n):
    """Bijective spread of sequence numbers over the 62-bit key range."""
    return (n * _SCATTER) & _KEY_MASK


class Tally(object):
    """History sink counting outcomes, forwarding to an optional History."""

    def __init__(self, history=None):
        self.history = history
        self._lock = threading.Lock()
        self.counts = collections.Counter()

    def record(self, kind, txnId, key=None, ts=0, value=None):
        with self._lock:
            self.counts[kind] += 1
        if self.history is not None:
            self.history.record(kind, txnId, key, ts, value)


@dataclass
class ClientResult:
    latencies: list
    errors: int = 0


def preload(session, spec):
    """Creates the benchmark table; fills it only when it was created here."""
    try:
        session.execute("CREATE TABLE {} (ycsb_key INT PRIMARY KEY, field0 TEXT)".format(
            TABLE))
    except DuplicateTableError:
        LOG.info("bench: %s exists, skipping preload", TABLE)
        return False
    for start in range(0, spec.keyspace, PRELOAD_BATCH):
        session.execute("BEGIN")
        for rank in range(start, min(start + PRELOAD_BATCH, spec.keyspace)):
            session.execute("INSERT INTO {} VALUES ({}, 'v{}')".format(
                TABLE, scatter(rank), rank))
        session.execute("COMMIT")
    LOG.info("bench: preloaded %d rows", spec.keyspace)
    return True


def operations(spec, client):
    """The client's statements, deterministic in (seed, client)."""
    rng = random.Random("{}:{}".format(spec.seed, client))
    chooser = keyChooser(spec.distribution, spec.keyspace, spec.theta, rng)
    weights = [spec.read, spec.insert, spec.update, spec.scan]
    inserted = 0
    for seq in range(spec.opsFor(client)):
        op = rng.choices(OPERATIONS, weights)[0]
        if op == "insert":
            key = scatter(spec.keyspace + client + spec.clients * inserted)
            inserted += 1
            yield op, "INSERT INTO {} VALUES ({}, 'i{}')".format(TABLE, key, seq)
            continue
        key = scatter(chooser.next())
        if op == "read":
            yield op, "SELECT * FROM {} WHERE ycsb_key = {}".format(TABLE, key)
        elif op == "update":
            yield op, "UPDATE {} SET field0 = 'u{}' WHERE ycsb_key = {}".format(
                TABLE, seq, key)
        else:
            yield op, ("SELECT * FROM {t} WHERE ycsb_key >= {k} ORDER BY ycsb_key "
                       "LIMIT {n}").format(t=TABLE, k=key, n=SCAN_LENGTH)


def runClient(session, spec, client, clock=time.monotonic):
    result = ClientResult([])
    for op, text in operations(spec, client):
        start = clock()
        try:
            session.execute(text)
        except ConflictError as err:
            LOG.info("bench client %d: %s gave up: %s", client, op, err)
            result.errors += 1
        except SqlError as err:
            LOG.warning("bench client %d: %s failed: %s", client, op, err)
            result.errors += 1
        result.latencies.append(clock() - start)
    return result


def runClients(dbt, spec, clients, retries=5):
    """Runs the given client indexes as threads on one Dbt; returns ClientResults."""
    results = {}

    def body(client):
        results[client] = runClient(Session(dbt, retries), spec, client)

    threads = [threading.Thread(target=body, args=(client,), name="client-%d" % client)
               for client in clients]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    return [results[client] for client in clients if client in results]


def percentile(sortedValues, pct):
    if not sortedValues:
        return 0.0
    rank = max(0, min(len(sortedValues) - 1,
                      int(round(pct / 100.0 * len(sortedValues) + 0.5)) - 1))
    return sortedValues[rank]


def report(spec, results, counts, elapsed, started):
    latencies = sorted(lat for result in results for lat in result.latencies)
    ops = len(latencies)
    finished = counts["commit"] + counts["abort"]
    return collections.OrderedDict([
        ("started", started.isoformat()),
        ("clients", spec.clients),
        ("ops", ops),
        ("elapsed_s", round(elapsed, 3)),
        ("throughput_ops_s", round(ops / elapsed, 1) if ops and elapsed > 0 else 0.0),
        ("latency_p50_ms", round(percentile(latencies, 50) * 1000.0, 3)),
        ("latency_p99_ms", round(percentile(latencies, 99) * 1000.0, 3)),
        ("commits", counts["commit"]),
        ("aborts", counts["abort"]),
        ("abort_rate", round(counts["abort"] / finished, 4) if finished else 0.0),
        ("errors", sum(result.errors for result in results)),
    ])


def bench(client, spec, history=None, fanout=64, retries=5, load=True):
    """
    Runs spec in this process on client (a TxnClient) and returns the
    report. The client's history is replaced by a Tally for the run.
    """
    tally = Tally(history)
    client.history = tally
    dbt = Dbt(client, fanout)
    if load:
        preload(Session(dbt, retries), spec)
    tally.counts.clear()
    started = utcNow()
    start = time.monotonic()
    results = runClients(dbt, spec, list(range(spec.clients)), retries)
    return report(spec, results, tally.counts, time.monotonic() - start, started)


def _worker(rcArgs):
    cluster, timeout, spec, clients, fanout, retries, backoff, withHistory = rcArgs
    registerServices()
    transportCls = service().lookup("net.transport")
    transport = transportCls(cluster, timeout=timeout)
    history = History() if withHistory else None
    tally = Tally(history)
    try:
        client = TxnClient(transport, history=tally, backoff=backoff)
        results = runClients(Dbt(client, fanout), spec, clients, retries)
    finally:
        transport.close()
    return results, dict(tally.counts), list(history) if history else []


def benchProcesses(config, spec, processes, history=None):
    """Spreads spec's clients over worker processes, each with its own transport."""
    transportCls = service().lookup("net.transport")
    transport = transportCls.fromConfig(config)
    try:
        preloadClient = TxnClient.fromConfig(transport, config)
        preload(Session(Dbt(preloadClient, config.fanout), config.retries), spec)
    finally:
        transport.close()
    groups = [list(range(spec.clients))[i::processes] for i in range(processes)]
    jobs = [(config.cluster, config.timeout, spec, group, config.fanout,
             config.retries, config.backoff, history is not None)
            for group in groups if group]
    started = utcNow()
    start = time.monotonic()
    with multiprocessing.Pool(len(jobs)) as pool:
        outputs = pool.map(_worker, jobs)
    elapsed = time.monotonic() - start
    results = []
    counts = collections.Counter()
    for clientResults, workerCounts, events in outputs:
        results.extend(clientResults)
        counts.update(workerCounts)
        if history is not None:
            history.extend(events)
    return report(spec, results, counts, elapsed, started)


DESC = binDescriptionWithStandardFooter("""
tabletree-bench - run a YCSB-style workload through SQL sessions and print
one "key: value" line per metric.

Examples:
    $ tabletree-bench --cluster cluster.txt --spec workload.ini
    $ tabletree-bench --cluster cluster.txt --spec workload.ini \\
        --processes 4 --history run.hist

""" + WORKLOAD_HELP)


def parseArgs(args=None):
    parser = argparse.ArgumentParser(
        description=DESC, formatter_class=argparse.RawDescriptionHelpFormatter)
    addArgumentParserBaseFlags(parser, "tabletree-bench")
    parser.add_argument("--spec", metavar="FILE", help="Workload file")
    parser.add_argument("--processes", type=int, default=1,
                        help="Worker processes to spread clients over "
                        "(default=%(default)s)")
    parser.add_argument("--history", metavar="FILE",
                        help="Write the transaction history here for "
                        "tabletree-check-si")
    return parser.parse_args(args)


def main(args=None):
    options = parseArgs(args)
    if options.version:
        sprint("tabletree-bench", packageVersion())
        return
    try:
        config = Config(options)
        ttlogging.setup(config.logDir, "tabletree-bench",
                        options.debug, options.verbose)
        if not options.spec:
            raise ConfigError("--spec is required")
        if options.processes < 1:
            raise ConfigError("--processes must be at least 1")
        spec = WorkloadSpec.load(options.spec)
        registerServices()
        history = History() if options.history else None
        result = benchProcesses(config, spec, options.processes, history)
        for key, value in result.items():
            sprint("{}: {}".format(key, value))
        if history is not None:
            history.dump(options.history)
    except (ConfigError, KvError, SqlError, WireError) as error:
        sprint("Error:", error, file=sys.stderr)
        sys.exit(1)
