"""
tabletree-server: one storage server process.
"""
import argparse
from contextlib import contextmanager
import logging
import os
import signal
import socketserver
import sys
import threading

from ..argparse import addArgumentParserBaseFlags
from ..binutils import binDescriptionWithStandardFooter
from ..compat import packageVersion
from ..config import Config, ConfigError, parseHostPort
from .. import logging as ttlogging
from ..utils import FileLock, FileLockBusy, lockedSection, sprint
from ..wire import DecodeError, WireError
from ..wire.codec import encode, decode
from ..wire.transport import SocketTransport, readFrame
from . import KvError
from .server import KvServer, remoteResolver

LOG = logging.getLogger(__name__)

READY = "READY"
LOCK_NAME = "server.lock"


class _RequestHandler(socketserver.BaseRequestHandler):
    def handle(self):
        kvServer = self.server.kvServer
        peer = self.client_address
        LOG.debug("connection from %s", peer)
        try:
            while True:
                frame = readFrame(self.request)
                if frame is None:
                    break
                reply = kvServer.handle(decode(frame))
                self.request.sendall(encode(reply))
        except DecodeError as err:
            LOG.warning("dropping connection from %s: %s", peer, err)
        except OSError as err:
            LOG.info("connection from %s ended: %s", peer, err)


class KvTcpServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, kvServer):
        self.kvServer = kvServer
        super().__init__(address, _RequestHandler)


DESC = binDescriptionWithStandardFooter("""
tabletree-server - storage server: multi-version key-value store, two-phase
commit participant and (with --oracle) the timestamp oracle.

Prints "READY host:port" on standard output once it accepts connections.

Examples:
    $ tabletree-server --cluster cluster.txt --server-id 0 --oracle \\
        --listen 127.0.0.1:7400 --data-dir /tmp/tt0
""")


def parseArgs(args=None):
    parser = argparse.ArgumentParser(
        description=DESC, formatter_class=argparse.RawDescriptionHelpFormatter)
    addArgumentParserBaseFlags(parser, "tabletree-server")
    parser.add_argument("--listen", metavar="HOST:PORT",
                        help="Address to listen on (default: this server's "
                        "line in the cluster file)")
    parser.add_argument("--server-id", dest="serverId", type=int, default=0,
                        help="This server's index in the cluster file")
    parser.add_argument("--data-dir", dest="dataDir", metavar="DIR",
                        help="Directory for the commit log and oracle state "
                        "(default: in-memory only)")
    parser.add_argument("--oracle", action="store_true",
                        help="Host the timestamp oracle (server 0 only)")
    return parser.parse_args(args)


@contextmanager
def dataDirLocked(dataDir):
    """Holds the data directory's lock file, when there is a data directory."""
    if not dataDir:
        yield
        return
    os.makedirs(dataDir, exist_ok=True)
    with lockedSection(FileLock(os.path.join(dataDir, LOCK_NAME))):
        yield


def serve(options, config):
    cluster = config.cluster
    if not 0 <= options.serverId < len(cluster):
        raise ConfigError("server id {} not in cluster of {}".format(
            options.serverId, len(cluster)))
    if options.oracle and options.serverId != 0:
        raise ConfigError("only server 0 may host the oracle")
    address = (parseHostPort(options.listen) if options.listen
               else cluster[options.serverId])
    with dataDirLocked(options.dataDir):
        _serveLocked(options, config, address)


def _serveLocked(options, config, address):
    # servers without the oracle settle expired locks through server 0
    peers = None if options.oracle else SocketTransport.fromConfig(config)
    kvServer = KvServer(options.serverId, len(config.cluster),
                        dataDir=options.dataDir, oracle=options.oracle,
                        lease=config.lease, oracleBlock=config.oracleBlock,
                        sync=config.sync,
                        resolver=remoteResolver(peers.sendRequest) if peers else None)
    try:
        try:
            tcpServer = KvTcpServer(address, kvServer)
        except OSError as err:
            raise ConfigError("cannot listen on {}:{}: {}".format(
                address[0], address[1], err)) from err

        def stop(signum, _frame):
            LOG.info("signal %d, shutting down", signum)
            threading.Thread(target=tcpServer.shutdown, daemon=True).start()

        signal.signal(signal.SIGTERM, stop)
        signal.signal(signal.SIGINT, stop)
        with tcpServer:
            host, port = tcpServer.server_address[:2]
            sprint(READY, "{}:{}".format(host, port), flush=True)
            tcpServer.serve_forever()
    finally:
        kvServer.close()
        if peers is not None:
            peers.close()


def main(args=None):
    options = parseArgs(args)
    if options.version:
        sprint("tabletree-server", packageVersion())
        return
    try:
        config = Config(options)
        ttlogging.setup(config.logDir, "tabletree-server",
                        options.debug, options.verbose)
        serve(options, config)
    except (ConfigError, FileLockBusy, KvError, WireError) as error:
        sprint("Error:", error, file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
