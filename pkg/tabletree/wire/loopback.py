"""
In-process transport: every request and reply still goes through
encode/decode, then straight into the target server's handle().
"""
import collections
import logging
import threading

from . import TransportError
from .codec import decode, encode
from .transport import Transport

LOG = logging.getLogger(__name__)


class LoopbackTransport(Transport):
    def __init__(self, servers, scheduler=None):
        super().__init__(len(servers))
        self._servers = list(servers)
        self._stopped = set()
        self._statsLock = threading.Lock()
        self.sent = collections.Counter()
        self.scheduler = scheduler
        # pylint: disable=import-outside-toplevel
        from ..kv.server import remoteResolver
        for server in self._servers:
            if server.store.resolver is None:
                server.store.resolver = remoteResolver(self.deliver)

    @classmethod
    def fromConfig(cls, config):
        # pylint: disable=import-outside-toplevel
        from ..kv.server import KvServer
        nServers = len(config.cluster)
        return cls([KvServer(sid, nServers, oracle=(sid == 0), lease=config.lease,
                             oracleBlock=config.oracleBlock)
                    for sid in range(nServers)])

    @property
    def servers(self):
        return self._servers

    def stop(self, dest):
        self._stopped.add(dest)

    def start(self, dest):
        self._stopped.discard(dest)

    def sendRequest(self, dest, msg):
        self.checkDest(dest)
        if self.scheduler is not None:
            self.scheduler.step()
        return self.deliver(dest, msg)

    def deliver(self, dest, msg):
        """Server-to-server requests: no scheduler step."""
        if dest in self._stopped:
            raise TransportError("server {} is not running".format(dest))
        with self._statsLock:
            self.sent[msg.kind] += 1
        request = decode(encode(msg.withRequestId(self.nextRequestId())))
        reply = self._servers[dest].handle(request)
        return decode(encode(reply))
