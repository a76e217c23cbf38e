from __future__ import absolute_import, division, print_function

import os
import shutil
import tempfile
import unittest

from mock import MagicMock
import six

from tabletree import config

from .helpers import resetEnv

EXAMPLE_RCFILE = """\
[client]
timeout = 2.5
retries = 9           # inline comments are allowed
backoff = 0.01
fanout = 16
max writes = 500
[server]
lease = 12
oracle block = 50
sync = fsync
"""

BAD_SECTION = """\
[unknown]
"""


def setUpModule():
    resetEnv()


class TestMixin(object):
    @staticmethod
    def config(tempFp=None, cluster=None):
        options = MagicMock()
        options.rcFile = tempFp.name if tempFp else "/a-file-does-not-exist.cfg"
        options.cluster = cluster
        options.logDir = "~/x"
        return config.Config(options)


class TestRcParser(unittest.TestCase, TestMixin):
    # pylint: disable-msg=too-many-arguments
    def assertCfg(self, cfgObj, timeout=5.0, retries=5, backoff=0.005, fanout=64,
                  maxWrites=10000, lease=30.0, oracleBlock=1000, sync="flush"):
        self.assertEqual(timeout, cfgObj.timeout)
        self.assertEqual(retries, cfgObj.retries)
        self.assertEqual(backoff, cfgObj.backoff)
        self.assertEqual(fanout, cfgObj.fanout)
        self.assertEqual(maxWrites, cfgObj.maxWrites)
        self.assertEqual(lease, cfgObj.lease)
        self.assertEqual(oracleBlock, cfgObj.oracleBlock)
        self.assertEqual(sync, cfgObj.sync)

    def testNoFile(self):
        cfgObj = self.config()
        self.assertCfg(cfgObj)
        self.assertEqual("/home/me/x", cfgObj.logDir)

    def testEmptyFile(self):
        with tempfile.NamedTemporaryFile(mode="w") as tempFp:
            tempFp.flush()
            self.assertCfg(self.config(tempFp))

    def testConfigured(self):
        with tempfile.NamedTemporaryFile(mode="w") as tempFp:
            tempFp.write(EXAMPLE_RCFILE)
            tempFp.flush()
            self.assertCfg(self.config(tempFp), timeout=2.5, retries=9, backoff=0.01,
                           fanout=16, maxWrites=500, lease=12.0, oracleBlock=50,
                           sync="fsync")

    def testHelpSampleParses(self):
        sample = config.RC_FILE_HELP.split("\n", 1)[1]
        with tempfile.NamedTemporaryFile(mode="w") as tempFp:
            tempFp.write("\n".join(line.strip() for line in sample.splitlines())
                         .replace("none|flush|fsync", "none"))
            tempFp.flush()
            self.assertCfg(self.config(tempFp), sync="none")


class TestMalformedRcFile(unittest.TestCase, TestMixin):
    def assertBad(self, text, pattern):
        with tempfile.NamedTemporaryFile(mode="w") as tempFp:
            tempFp.write(text)
            tempFp.flush()
            with six.assertRaisesRegex(self, config.ConfigError, pattern):
                self.config(tempFp)

    def testBadSection(self):
        self.assertBad(EXAMPLE_RCFILE + BAD_SECTION,
                       r"unknown configuration sections: unknown")

    def testBadOption(self):
        self.assertBad(EXAMPLE_RCFILE + "xyz = foo\n",
                       r'unknown configuration options in section "server": xyz')

    def testBadSync(self):
        self.assertBad("[server]\nsync=sometimes\n",
                       r'RC file has invalid "server.sync" setting sometimes.\s*'
                       r"Valid options: none, flush, fsync")

    def testBadNumbers(self):
        self.assertBad("[client]\ntimeout = soon\n",
                       r'invalid "client.timeout" setting soon.\s*'
                       r"Valid options: a positive number")
        self.assertBad("[client]\nretries = 1.5\n",
                       r'invalid "client.retries" setting 1.5.\s*'
                       r"Valid options: a positive integer")
        self.assertBad("[server]\nlease = -1\n", r'invalid "server.lease"')
        self.assertBad("[client]\nfanout = 3\n", r"an integer from 4 to 1000")
        self.assertBad("[client]\nfanout = 1001\n", r"an integer from 4 to 1000")


class TestCluster(unittest.TestCase, TestMixin):
    def setUp(self):
        self.tmpDir = tempfile.mkdtemp(prefix="tabletree-test-")

    def tearDown(self):
        shutil.rmtree(self.tmpDir, ignore_errors=True)

    def clusterFile(self, text):
        path = os.path.join(self.tmpDir, "cluster.txt")
        with open(path, "w", encoding="utf-8") as out:
            out.write(text)
        return path

    def testLoad(self):
        path = self.clusterFile("# three servers\n127.0.0.1:7400\n\n"
                                "host-b:7401  # second\n[::1]:7402\n")
        cfgObj = self.config(cluster=path)
        self.assertEqual([("127.0.0.1", 7400), ("host-b", 7401), ("[::1]", 7402)],
                         cfgObj.cluster)
        self.assertEqual(path, cfgObj.clusterFile)

    def testWriteThenLoad(self):
        path = os.path.join(self.tmpDir, "out.txt")
        members = [("127.0.0.1", 1), ("127.0.0.1", 65535)]
        config.writeCluster(path, members)
        self.assertEqual(members, config.loadCluster(path))

    def testErrors(self):
        cases = [
            (None, "no cluster file"),
            (self.clusterFile("# nothing\n"), "lists no servers"),
            (os.path.join(self.tmpDir, "missing"), "cannot read cluster file"),
        ]
        for path, message in cases:
            with six.assertRaisesRegex(self, config.ConfigError, message):
                self.config(cluster=path).cluster

    def testBadMembers(self):
        for text in ["7400", "host:", "host:port", "host:70000", ":7400"]:
            with self.assertRaises(config.ConfigError):
                config.parseHostPort(text)
