"""
tabletree-check-si: check recorded transaction histories for snapshot
isolation. Several files are checked as one history.
"""
import argparse
import logging
import sys

from ..compat import packageVersion
from .. import logging as ttlogging
from ..utils import sprint
from .history import History, HistoryError, checkSi

LOG = logging.getLogger(__name__)

DESC = """
tabletree-check-si - verify that every read saw its snapshot and that no two
committed writers of one key overlapped. Prints "pass" or the first
violation; exits 1 on a violation.

Examples:
    $ tabletree-check-si run.hist
    $ tabletree-check-si worker-*.hist
"""


def parseArgs(args=None):
    parser = argparse.ArgumentParser(
        description=DESC, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-V", "--version", action="store_true",
                        help="Display version info")
    parser.add_argument("-v", dest="verbose", action="append_const", const=1,
                        help="Increase verbosity")
    parser.add_argument("history", nargs="*", help="History files")
    return parser.parse_args(args)


def main(args=None):
    options = parseArgs(args)
    if options.version:
        sprint("tabletree-check-si", packageVersion())
        return
    ttlogging.setup(None, "tabletree-check-si", False, options.verbose)
    try:
        if not options.history:
            raise HistoryError("no history files given")
        history = History.load(*options.history)
        violation = checkSi(history)
    except (HistoryError, IOError) as error:
        sprint("Error:", error, file=sys.stderr)
        sys.exit(1)
    if violation is not None:
        sprint("violation:", violation)
        sys.exit(1)
    sprint("pass: {} events".format(len(history)))
