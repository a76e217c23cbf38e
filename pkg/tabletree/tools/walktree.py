"""
tabletree-walk-tree: check a tree's structure under one snapshot and
print its shape and per-server node counts.
"""
import argparse
import logging
import sys

from tabulate import tabulate

from ..argparse import addArgumentParserBaseFlags
from ..binutils import binDescriptionWithStandardFooter
from ..compat import packageVersion
from ..config import Config, ConfigError
from ..dbt import DbtError
from ..dbt.tree import Dbt
from ..dbt.walk import walkTree
from .. import logging as ttlogging
from ..kv import KvError
from ..service import service
from ..service.registry import registerServices
from ..sql import SqlError
from ..sql.catalog import Catalog
from ..sql.executor import checkIndexes
from ..txn import TxnClient
from ..utils import sprint
from ..wire import WireError

LOG = logging.getLogger(__name__)


def formatReport(report):
    summary = [
        ["tree", report.tree],
        ["height", report.height],
        ["nodes", report.nodes],
        ["leaves", report.leaves],
        ["entries", report.entries],
        ["digest", report.digest[:16]],
    ]
    servers = [[sid, count] for sid, count in sorted(report.perServer.items())]
    lines = [tabulate(summary, tablefmt="plain"), "",
             tabulate(servers, headers=["server", "nodes"], tablefmt="psql")]
    lines.extend(str(finding) for finding in report.findings)
    lines.append("ok" if report.ok else "{} finding(s)".format(len(report.findings)))
    return "\n".join(lines)


def walk(dbt, tree=None, table=None):
    """
    Returns (reports, problems). With table, walks its data tree and every
    index tree and cross-checks the index entries against the rows.
    """
    client = dbt.client
    ctx = client.begin()
    try:
        problems = []
        if table is None:
            return [walkTree(dbt, ctx, tree)], problems
        tableDef = Catalog(dbt).lookup(ctx, table)
        trees = [tableDef.dataTree] + [index.tree for index in tableDef.indexes]
        reports = [walkTree(dbt, ctx, treeId) for treeId in trees]
        if all(report.ok for report in reports):
            problems = checkIndexes(dbt, ctx, tableDef)
        return reports, problems
    finally:
        client.abort(ctx)


DESC = binDescriptionWithStandardFooter("""
tabletree-walk-tree - verify the structure of one tree (or of a table's
data and index trees) and show how its nodes spread over the servers.
Exits 1 when anything is wrong.

Examples:
    $ tabletree-walk-tree --cluster cluster.txt --tree 1
    $ tabletree-walk-tree --cluster cluster.txt --table usertable
""")


def parseArgs(args=None):
    parser = argparse.ArgumentParser(
        description=DESC, formatter_class=argparse.RawDescriptionHelpFormatter)
    addArgumentParserBaseFlags(parser, "tabletree-walk-tree")
    target = parser.add_mutually_exclusive_group()
    target.add_argument("--tree", type=int, help="Tree id to walk")
    target.add_argument("--table", help="SQL table whose trees to walk")
    return parser.parse_args(args)


def main(args=None):
    options = parseArgs(args)
    if options.version:
        sprint("tabletree-walk-tree", packageVersion())
        return
    transport = None
    try:
        config = Config(options)
        ttlogging.setup(config.logDir, "tabletree-walk-tree",
                        options.debug, options.verbose)
        if options.tree is None and options.table is None:
            raise ConfigError("one of --tree or --table is required")
        registerServices()
        transport = service().lookup("net.transport").fromConfig(config)
        dbt = Dbt.fromConfig(TxnClient.fromConfig(transport, config), config)
        reports, problems = walk(dbt, options.tree, options.table)
        for report in reports:
            sprint(formatReport(report))
        for problem in problems:
            sprint(problem)
        if problems or not all(report.ok for report in reports):
            sys.exit(1)
    except (ConfigError, DbtError, KvError, SqlError, WireError) as error:
        sprint("Error:", error, file=sys.stderr)
        sys.exit(1)
    finally:
        if transport is not None:
            transport.close()
