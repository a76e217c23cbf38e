"""
tabletree-shell: read ';'-terminated statements from standard input and
print their results. Result sets print as a tab-separated header line and
rows; statement errors print as "Error: ..." and the shell carries on.
"""
import argparse
import logging
import sys

from ..argparse import addArgumentParserBaseFlags
from ..binutils import binDescriptionWithStandardFooter
from ..compat import packageVersion
from ..config import Config, ConfigError
from ..dbt.tree import Dbt
from .. import logging as ttlogging
from ..kv import KvError
from ..service import service
from ..service.registry import registerServices
from ..sql import SqlError
from ..sql.executor import ResultSet, Session
from ..sql.reference import ReferenceSession
from ..txn import TxnClient, TxnError
from ..utils import sprint
from ..wire import TransportError, WireError

LOG = logging.getLogger(__name__)

PROMPT = "tabletree> "
CONTINUE = "       ... "
STATEMENT_ERRORS = (SqlError, KvError, TxnError, TransportError)


def splitStatements(text):
    """
    Returns (complete statements, unterminated remainder). Semicolons in
    string literals and -- comments do not end a statement.
    """
    statements = []
    start = 0
    pos = 0
    inString = False
    while pos < len(text):
        char = text[pos]
        if inString:
            if char == "'":
                if text.startswith("''", pos):
                    pos += 1
                else:
                    inString = False
        elif char == "'":
            inString = True
        elif text.startswith("--", pos):
            newline = text.find("\n", pos)
            if newline < 0:
                break
            pos = newline
        elif char == ";":
            statements.append(text[start:pos + 1])
            start = pos + 1
        pos += 1
    return statements, text[start:]


def formatValue(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def formatResult(result):
    if isinstance(result, ResultSet):
        lines = ["\t".join(result.columns)]
        lines.extend("\t".join(formatValue(value) for value in row)
                     for row in result.rows)
        return "\n".join(lines)
    return str(result)


class Shell(object):
    def __init__(self, session, out=None, interactive=False):
        self.session = session
        self.out = out or sys.stdout
        self.interactive = interactive
        self.buffer = ""
        self.errors = 0
        self.done = False

    def _print(self, *args):
        sprint(*args, file=self.out, flush=True)

    def runStatement(self, text):
        try:
            self._print(formatResult(self.session.execute(text)))
        except STATEMENT_ERRORS as err:
            LOG.debug("statement failed: %r", text, exc_info=True)
            self.errors += 1
            self._print("Error:", err)

    def metaCommand(self, line):
        command = line.split()[0]
        if command in ("\\quit", "\\q"):
            self.done = True
        elif command == "\\tables":
            try:
                for name in self.session.tables():
                    self._print(name)
            except STATEMENT_ERRORS as err:
                self.errors += 1
                self._print("Error:", err)
        else:
            self.errors += 1
            self._print("Error: unknown command {}".format(command))

    def feed(self, line):
        if not self.buffer.strip() and line.lstrip().startswith("\\"):
            self.buffer = ""
            self.metaCommand(line.strip())
            return
        self.buffer += line
        statements, self.buffer = splitStatements(self.buffer)
        if not _hasCode(self.buffer):
            self.buffer = ""
        for statement in statements:
            self.runStatement(statement)

    def finish(self):
        rest, self.buffer = self.buffer, ""
        if _hasCode(rest):
            self.runStatement(rest)

    def prompt(self):
        return CONTINUE if self.buffer.strip() else PROMPT

    def run(self, stream):
        while not self.done:
            if self.interactive:
                try:
                    line = input(self.prompt()) + "\n"
                except EOFError:
                    break
            else:
                line = stream.readline()
                if not line:
                    break
            self.feed(line)
        self.finish()
        return self.errors


def _hasCode(text):
    return any(line.split("--", 1)[0].strip() for line in text.splitlines())


DESC = binDescriptionWithStandardFooter("""
tabletree-shell - interactive SQL over a tabletree cluster.

Statements end with ';'. Meta-commands: \\quit, \\tables.

Examples:
    $ tabletree-shell --cluster cluster.txt
    $ tabletree-shell --cluster cluster.txt < script.sql
    $ tabletree-shell --reference < script.sql > expected.out
""")


def parseArgs(args=None):
    parser = argparse.ArgumentParser(
        description=DESC, formatter_class=argparse.RawDescriptionHelpFormatter)
    addArgumentParserBaseFlags(parser, "tabletree-shell")
    parser.add_argument("--reference", action="store_true",
                        help="Run against the in-memory sqlite reference "
                        "executor instead of a cluster")
    return parser.parse_args(args)


def main(args=None):
    options = parseArgs(args)
    if options.version:
        sprint("tabletree-shell", packageVersion())
        return
    transport = None
    try:
        config = Config(options)
        ttlogging.setup(config.logDir, "tabletree-shell",
                        options.debug, options.verbose)
        if options.reference:
            session = ReferenceSession()
        else:
            registerServices()
            transport = service().lookup("net.transport").fromConfig(config)
            client = TxnClient.fromConfig(transport, config)
            session = Session.fromConfig(Dbt.fromConfig(client, config), config)
        Shell(session, interactive=sys.stdin.isatty()).run(sys.stdin)
    except (ConfigError, WireError) as error:
        sprint("Error:", error, file=sys.stderr)
        sys.exit(1)
    finally:
        if transport is not None:
            transport.close()
