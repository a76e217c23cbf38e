from __future__ import absolute_import, division, print_function

from contextlib import contextmanager
import itertools
import os
import random
import sys

from six.moves import StringIO

from tabletree.dbt.tree import Dbt
from tabletree.kv.placement import ownerOf
from tabletree.kv.server import KvServer
from tabletree.txn import TxnClient
from tabletree.wire.loopback import LoopbackTransport

HOSTNAME = 'host.example.com'
HOME = '/home/me'
USER = 'me'


def resetEnv():
    os.environ['HOME'] = HOME
    os.environ['HOSTNAME'] = HOSTNAME
    os.environ['TABLETREE_LOG_DIR'] = '/tmp/BADDIR'
    os.environ['USER'] = USER
    if 'TABLETREE_CLUSTER' in os.environ:
        del os.environ['TABLETREE_CLUSTER']


@contextmanager
def capturedOutput():
    ''' Used to capture stdout or stderr.
    eg.
    with capturedOutput() as (out, err):
        print("foo")

    self.assertEqual(out.getvalue(), "foo")
    '''
    newOut, newErr = StringIO(), StringIO()
    oldOut, oldErr = sys.stdout, sys.stderr
    try:
        sys.stdout, sys.stderr = newOut, newErr
        yield sys.stdout, sys.stderr
    finally:
        sys.stdout, sys.stderr = oldOut, oldErr


def keyOwnedBy(serverId, nServers):
    for num in itertools.count():
        key = b"key-%d" % num
        if ownerOf(key, nServers) == serverId:
            return key
    raise AssertionError("unreachable")


def noSleep(_seconds):
    pass


class FakeClock(object):
    def __init__(self):
        self.now = 100.0

    def __call__(self):
        return self.now


def servers(nServers=3, dataRoot=None, **kwargs):
    return [KvServer(sid, nServers, oracle=(sid == 0),
                     dataDir=(os.path.join(dataRoot, "server-{}".format(sid))
                              if dataRoot else None),
                     **kwargs)
            for sid in range(nServers)]


def makeDataDirs(dataRoot, nServers):
    for sid in range(nServers):
        os.makedirs(os.path.join(dataRoot, "server-{}".format(sid)), exist_ok=True)


def loopbackClient(nServers=3, seed=1, history=None, scheduler=None,
                   kvServers=None, **kwargs):
    """
    A TxnClient on an in-process cluster. Seeded so that transaction ids,
    and with them any scheduler interleaving, replay exactly.
    """
    transport = LoopbackTransport(kvServers or servers(nServers),
                                  scheduler=scheduler)
    return TxnClient(transport, history=history, rng=random.Random(seed),
                     sleep=noSleep, **kwargs)


def loopbackDbt(nServers=3, fanout=4, **kwargs):
    return Dbt(loopbackClient(nServers, **kwargs), fanout=fanout)


CORPUS_DIR = os.path.join(os.path.dirname(__file__), "data")


def corpus(name):
    """(statement, expected) pairs from a tab-separated corpus file."""
    with open(os.path.join(CORPUS_DIR, name), encoding="utf-8") as fp:
        return [tuple(line.rstrip("\n").split("\t"))
                for line in fp if line.strip() and not line.startswith("#")]
