from __future__ import absolute_import, division, print_function

import os
import shutil
import socket
from tempfile import mkdtemp
import unittest

from tabletree.config import writeCluster
from tabletree.kv import daemon
from tabletree.utils import FileLock, FileLockBusy

from .helpers import capturedOutput, resetEnv


def setUpModule():
    resetEnv()


class DaemonMainTest(unittest.TestCase):
    def setUp(self):
        self.tmpDir = mkdtemp(prefix="tabletree-test-")
        self.clusterFile = os.path.join(self.tmpDir, "cluster.txt")
        writeCluster(self.clusterFile, [("127.0.0.1", 1), ("127.0.0.1", 2)])

    def tearDown(self):
        shutil.rmtree(self.tmpDir, ignore_errors=True)

    def runMain(self, *args):
        argv = ["--cluster", self.clusterFile,
                "--rc-file", os.path.join(self.tmpDir, "no-rc")] + list(args)
        with capturedOutput() as (out, err):
            with self.assertRaises(SystemExit) as info:
                daemon.main(argv)
        self.assertEqual(1, info.exception.code)
        self.assertEqual("", out.getvalue())
        return err.getvalue()

    def testParseArgs(self):
        options = daemon.parseArgs(["--server-id", "2", "--oracle",
                                    "--listen", "h:1", "--data-dir", "/d"])
        self.assertEqual(2, options.serverId)
        self.assertTrue(options.oracle)
        self.assertEqual("h:1", options.listen)
        self.assertEqual("/d", options.dataDir)

    def testOracleOnlyOnServerZero(self):
        self.assertIn("Error: only server 0 may host the oracle",
                      self.runMain("--server-id", "1", "--oracle"))

    def testServerIdOutsideCluster(self):
        self.assertIn("Error: server id 5 not in cluster of 2",
                      self.runMain("--server-id", "5"))

    def testPortInUse(self):
        holder = socket.socket()
        holder.bind(("127.0.0.1", 0))
        holder.listen(1)
        try:
            port = holder.getsockname()[1]
            self.assertIn("cannot listen on 127.0.0.1:{}".format(port),
                          self.runMain("--listen", "127.0.0.1:{}".format(port)))
        finally:
            holder.close()

    def testDataDirLocked(self):
        dataDir = os.path.join(self.tmpDir, "data")
        os.makedirs(dataDir)
        lock = FileLock(os.path.join(dataDir, daemon.LOCK_NAME))
        lock.lock()
        try:
            self.assertIn("is locked by another process",
                          self.runMain("--data-dir", dataDir,
                                       "--listen", "127.0.0.1:0"))
        finally:
            lock.unlock()

    def testMissingClusterFile(self):
        os.remove(self.clusterFile)
        self.assertIn("Error: cannot read cluster file", self.runMain())

    def testDataDirLockHeldForTheServerLifetime(self):
        dataDir = os.path.join(self.tmpDir, "fresh")
        other = FileLock(os.path.join(dataDir, daemon.LOCK_NAME))
        with daemon.dataDirLocked(dataDir):
            with self.assertRaises(FileLockBusy):
                other.lock()
        other.lock()
        other.unlock()
        with daemon.dataDirLocked(None):
            self.assertFalse(other.isLocked())
