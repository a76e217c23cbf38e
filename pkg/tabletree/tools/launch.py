"""
tabletree-launch: start N storage servers on local ports, write the
cluster file, wait until every server reports READY, then stay up until
SIGINT/SIGTERM and tear the servers down.
"""
import argparse
import logging
import os
import select
import signal
import socket
from subprocess import DEVNULL, PIPE, Popen, TimeoutExpired
import sys
import time

from ..argparse import addArgumentParserBaseFlags, baseParsedArgsToArgList
from ..binutils import binDescriptionWithStandardFooter
from ..compat import encoding_open, packageVersion
from ..config import Config, ConfigError, writeCluster
from .. import logging as ttlogging
from ..kv.daemon import READY
from ..utils import autoDecode, sprint

LOG = logging.getLogger(__name__)

READY_TIMEOUT = 15.0
STOP_TIMEOUT = 5.0


class LaunchError(Exception):
    pass


def freePorts(host, count):
    """Ports the kernel hands out for host right now; racy but fine for tests."""
    socks = []
    try:
        for _ in range(count):
            sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            sock.bind((host, 0))
            socks.append(sock)
        return [sock.getsockname()[1] for sock in socks]
    finally:
        for sock in socks:
            sock.close()


class LocalCluster(object):
    """
    N server processes on one host. Server 0 hosts the oracle. With a
    dataRoot each server keeps its log in dataRoot/server-<id>.
    """

    # pylint: disable=too-many-arguments
    def __init__(self, nServers, clusterFile, basePort=0, host="127.0.0.1",
                 dataRoot=None, logDir=None, extraArgs=(),
                 readyTimeout=READY_TIMEOUT):
        if nServers < 1:
            raise ConfigError("need at least one server")
        self.nServers = nServers
        self.clusterFile = clusterFile
        self.host = host
        self.basePort = basePort
        self.dataRoot = dataRoot
        self.logDir = logDir or os.path.dirname(os.path.abspath(clusterFile))
        self.extraArgs = list(extraArgs)
        self.readyTimeout = readyTimeout
        self.members = []
        self.procs = {}

    def _ports(self):
        if self.basePort:
            return list(range(self.basePort, self.basePort + self.nServers))
        return freePorts(self.host, self.nServers)

    def stderrPath(self, serverId):
        return os.path.join(self.logDir, "server-{}.err".format(serverId))

    def dataDir(self, serverId):
        if self.dataRoot is None:
            return None
        return os.path.join(self.dataRoot, "server-{}".format(serverId))

    def command(self, serverId):
        host, port = self.members[serverId]
        cmd = [sys.executable, "-m", "tabletree.kv.daemon",
               "--cluster", self.clusterFile, "--server-id", str(serverId),
               "--listen", "{}:{}".format(host, port)] + self.extraArgs
        if serverId == 0:
            cmd.append("--oracle")
        if self.dataDir(serverId) is not None:
            cmd.extend(["--data-dir", self.dataDir(serverId)])
        return cmd

    def start(self):
        if not self.members:
            self.members = [(self.host, port) for port in self._ports()]
            writeCluster(self.clusterFile, self.members)
        os.makedirs(self.logDir, exist_ok=True)
        try:
            for serverId in range(self.nServers):
                self.startServer(serverId)
        except BaseException:
            self.stop()
            raise
        return self

    def startServer(self, serverId):
        cmd = self.command(serverId)
        LOG.debug("launch: %s", " ".join(cmd))
        with encoding_open(self.stderrPath(serverId), "w") as errFile:
            proc = Popen(cmd, stdin=DEVNULL, stdout=PIPE, stderr=errFile)
        self.procs[serverId] = proc
        self._awaitReady(serverId, proc)

    def _failure(self, serverId):
        try:
            with open(self.stderrPath(serverId), "rb") as errFile:
                detail = autoDecode(errFile.read()).strip()
        except IOError:
            detail = ""
        return LaunchError("server {} failed to start{}".format(
            serverId, ": " + detail if detail else ""))

    def _awaitReady(self, serverId, proc):
        deadline = time.monotonic() + self.readyTimeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise LaunchError("server {} not ready after {}s".format(
                    serverId, self.readyTimeout))
            readable, _, _ = select.select([proc.stdout], [], [], remaining)
            if not readable:
                continue
            line = autoDecode(proc.stdout.readline())
            if not line:
                proc.wait()
                raise self._failure(serverId)
            if line.startswith(READY):
                LOG.info("launch: server %d %s", serverId, line.strip())
                return

    def stopServer(self, serverId, sig=signal.SIGTERM):
        proc = self.procs.pop(serverId, None)
        if proc is None:
            return None
        if proc.poll() is None:
            proc.send_signal(sig)
            try:
                proc.wait(STOP_TIMEOUT)
            except TimeoutExpired:
                LOG.warning("launch: server %d ignored signal, killing", serverId)
                proc.kill()
                proc.wait()
        proc.stdout.close()
        return proc.returncode

    def kill(self, serverId):
        return self.stopServer(serverId, signal.SIGKILL)

    def stop(self):
        for serverId in sorted(self.procs, reverse=True):
            self.stopServer(serverId)

    def dead(self):
        return [serverId for serverId, proc in self.procs.items()
                if proc.poll() is not None]

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


DESC = binDescriptionWithStandardFooter("""
tabletree-launch - run a local cluster of N storage servers on consecutive
ports. Writes the cluster file given by --cluster, prints READY once every
server is up and tears them down on SIGINT or SIGTERM.

Examples:
    $ tabletree-launch --servers 4 --base-port 7400 --cluster cluster.txt
""")


def parseArgs(args=None):
    parser = argparse.ArgumentParser(
        description=DESC, formatter_class=argparse.RawDescriptionHelpFormatter)
    addArgumentParserBaseFlags(parser, "tabletree-launch")
    parser.add_argument("--servers", type=int, default=1,
                        help="Number of servers (default=%(default)s)")
    parser.add_argument("--base-port", dest="basePort", type=int, default=7400,
                        help="Port of server 0; 0 picks free ports "
                        "(default=%(default)s)")
    parser.add_argument("--host", default="127.0.0.1",
                        help="Address to bind (default=%(default)s)")
    parser.add_argument("--data-root", dest="dataRoot", metavar="DIR",
                        help="Keep server logs under DIR/server-<id> "
                        "(default: in-memory servers)")
    return parser.parse_args(args)


def main(args=None):
    argv = list(sys.argv[1:] if args is None else args)
    options = parseArgs(args)
    if options.version:
        sprint("tabletree-launch", packageVersion())
        return
    stopping = []

    def stop(signum, _frame):
        LOG.info("launch: signal %d", signum)
        stopping.append(signum)

    cluster = None
    try:
        config = Config(options)
        ttlogging.setup(config.logDir, "tabletree-launch",
                        options.debug, options.verbose)
        if not options.cluster:
            raise ConfigError("--cluster names the cluster file to write")
        signal.signal(signal.SIGTERM, stop)
        signal.signal(signal.SIGINT, stop)
        cluster = LocalCluster(options.servers, options.cluster,
                               basePort=options.basePort, host=options.host,
                               dataRoot=options.dataRoot,
                               logDir=config.checkDir(config.logDir),
                               extraArgs=baseParsedArgsToArgList(argv, options))
        cluster.start()
        sprint(READY, options.servers, "servers; cluster file", options.cluster,
               flush=True)
        while not stopping:
            dead = cluster.dead()
            if dead and not stopping:
                raise LaunchError("server {} exited".format(dead[0]))
            time.sleep(0.2)
    except (ConfigError, LaunchError) as error:
        sprint("Error:", error, file=sys.stderr)
        sys.exit(1)
    finally:
        if cluster is not None:
            cluster.stop()
