import os

from .config import CLUSTER_ENV


def addArgumentParserBaseFlags(parser, logfileName, withCluster=True):
    '''
    Creates a Base argument parser, which should be used for all
    scripts included with tabletree.
    Provides common flags for config file overrides, etc.

    Provides ALL flags required by the Config class.
    '''
    parser.add_argument(
        "-V", "--version",
        help="Display version info",
        action="store_true",
    )

    parser.add_argument(
        "-v",
        dest="verbose",
        help="Increase verbosity (multiple times for more verbose)",
        action="append_const",
        const=1)
    parser.add_argument("--rc-file", dest="rcFile",
                        help="Specify path to rc-file (default=\"%(default)s\")",
                        default="~/.config/tabletreerc")
    parser.add_argument(
        "--log-dir",
        dest="logDir",
        metavar="DIR",
        help="Specify log directory (default='%(default)s')",
        default=os.getenv("TABLETREE_LOG_DIR", "~/.local/share/tabletree/log"))
    parser.add_argument(
        "--debug",
        action="store_true",
        help="enable debug output to <log-dir>/%s-debug.log" % logfileName)
    if withCluster:
        parser.add_argument(
            "--cluster",
            metavar="FILE",
            help="Cluster membership file, one host:port per line "
            "(default=$%s)" % CLUSTER_ENV,
            default=os.getenv(CLUSTER_ENV))


def baseParsedArgsToArgList(argv, args):
    argList = []
    argList.extend(["-v"] * len(args.verbose or ()))
    if "--rc-file" in argv:
        argList.extend(["--rc-file", args.rcFile])
    if "--log-dir" in argv:
        argList.extend(["--log-dir", args.logDir])
    if args.debug:
        argList.append("--debug")

    return argList
