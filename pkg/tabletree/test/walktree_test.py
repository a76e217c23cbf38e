from __future__ import absolute_import, division, print_function

import unittest

from tabletree.service import service
from tabletree.sql import UnknownTable
from tabletree.sql.catalog import Catalog
from tabletree.sql.executor import Session
from tabletree.tools import walktree
from tabletree.tools.walktree import formatReport, walk

from .helpers import capturedOutput, loopbackDbt, resetEnv


class WalkToolTest(unittest.TestCase):
    def setUp(self):
        self.dbt = loopbackDbt(3, fanout=4)
        session = Session(self.dbt)
        session.execute("CREATE TABLE t (id INT PRIMARY KEY, v TEXT)")
        session.execute("CREATE INDEX t_v ON t (v)")
        for num in range(25):
            session.execute("INSERT INTO t VALUES ({}, 'v{}')".format(num, num % 6))

    def tableDef(self):
        ctx = self.dbt.client.begin()
        return Catalog(self.dbt).lookup(ctx, "t")

    def testTable(self):
        reports, problems = walk(self.dbt, table="t")
        tableDef = self.tableDef()
        self.assertEqual([tableDef.dataTree, tableDef.indexes[0].tree],
                         [report.tree for report in reports])
        self.assertEqual([25, 25], [report.entries for report in reports])
        self.assertEqual([], problems)
        self.assertTrue(all(report.ok for report in reports))

    def testSingleTree(self):
        reports, problems = walk(self.dbt, tree=self.tableDef().dataTree)
        self.assertEqual(1, len(reports))
        self.assertEqual([], problems)
        text = formatReport(reports[0])
        lines = text.splitlines()
        self.assertTrue(lines[0].startswith("tree"))
        self.assertIn("entries", text)
        self.assertIn("server", text)
        self.assertEqual("ok", lines[-1])

    def testIndexProblemsReported(self):
        tableDef = self.tableDef()
        self.dbt.client.runInTxn(lambda ctx: self.dbt.delete(
            ctx, tableDef.dataTree, next(iter(self.dbt.scan(ctx, tableDef.dataTree)))[0]))
        reports, problems = walk(self.dbt, table="t")
        self.assertTrue(all(report.ok for report in reports))
        self.assertEqual(1, len(problems))
        self.assertIn("t.t_v: stray entry", problems[0])

    def testUnknownTable(self):
        with self.assertRaises(UnknownTable):
            walk(self.dbt, table="nope")


class WalkMainTest(unittest.TestCase):
    def setUp(self):
        resetEnv()
        service().clear(thisIsATest=True)

    def testNeedsTarget(self):
        with capturedOutput() as (_, err):
            with self.assertRaises(SystemExit) as info:
                walktree.main(["--cluster", "/nonexistent/cluster.txt"])
        self.assertEqual(1, info.exception.code)
        self.assertIn("one of --tree or --table is required", err.getvalue())

    def testMissingClusterFile(self):
        with capturedOutput() as (_, err):
            with self.assertRaises(SystemExit) as info:
                walktree.main(["--cluster", "/nonexistent/cluster.txt", "--tree", "1"])
        self.assertEqual(1, info.exception.code)
        self.assertIn("cannot read cluster file", err.getvalue())

    def testTreeAndTableExclusive(self):
        with capturedOutput():
            with self.assertRaises(SystemExit) as info:
                walktree.main(["--tree", "1", "--table", "t"])
        self.assertEqual(2, info.exception.code)
