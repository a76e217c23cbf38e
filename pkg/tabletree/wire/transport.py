"""
Transports deliver a request Message to a ServerId and return the reply
with the same request-id. SocketTransport keeps one pipelined connection
per server; replies are matched to waiting callers by request-id.
"""
from concurrent.futures import Future
from concurrent.futures import TimeoutError as FutureTimeout
import itertools
import logging
import socket
import threading

from . import DecodeError, TransportError
from .codec import HEADER_SIZE, decode, encode, frameLength

LOG = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 5.0


def recvExactly(sock, size):
    chunks = []
    while size:
        chunk = sock.recv(size)
        if not chunk:
            return None
        chunks.append(chunk)
        size -= len(chunk)
    return b"".join(chunks)


def readFrame(sock):
    """Returns one whole frame (header included), or None on clean EOF."""
    header = recvExactly(sock, 4)
    if header is None:
        return None
    body = recvExactly(sock, frameLength(header))
    if body is None:
        raise DecodeError(4, "truncated frame")
    return header + body


class Transport(object):
    def __init__(self, nServers):
        self._nServers = nServers
        self._ids = itertools.count(1)
        self._idLock = threading.Lock()

    @property
    def nServers(self):
        return self._nServers

    def nextRequestId(self):
        with self._idLock:
            return next(self._ids)

    def checkDest(self, dest):
        if not 0 <= dest < self._nServers:
            raise TransportError("server {} not in cluster of {}".format(
                dest, self._nServers))

    def sendRequest(self, dest, msg):
        raise NotImplementedError

    def close(self):
        pass


class _Connection(object):
    def __init__(self, address, timeout):
        self.address = address
        self._sendLock = threading.Lock()
        self._pendingLock = threading.Lock()
        self._pending = {}
        self.dead = False
        try:
            self._sock = socket.create_connection(address, timeout=timeout)
        except OSError as err:
            raise TransportError("cannot connect to {}:{}: {}".format(
                address[0], address[1], err)) from err
        self._sock.settimeout(None)
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._reader = threading.Thread(
            target=self._readLoop, name="reader-{}:{}".format(*address),
            daemon=True)
        self._reader.start()

    def submit(self, msg):
        fut = Future()
        frame = encode(msg)
        with self._pendingLock:
            if self.dead:
                raise TransportError("connection to {}:{} is closed".format(
                    *self.address))
            self._pending[msg.requestId] = fut
        try:
            with self._sendLock:
                self._sock.sendall(frame)
        except OSError as err:
            self._fail(err)
        return fut

    def forget(self, requestId):
        with self._pendingLock:
            self._pending.pop(requestId, None)

    def _readLoop(self):
        try:
            while True:
                frame = readFrame(self._sock)
                if frame is None:
                    self._fail(EOFError("connection closed by server"))
                    return
                reply = decode(frame)
                with self._pendingLock:
                    fut = self._pending.pop(reply.requestId, None)
                if fut is None:
                    LOG.warning("%s: reply for unknown request-id %d",
                                self.address, reply.requestId)
                    continue
                fut.set_result(reply)
        except (OSError, DecodeError) as err:
            self._fail(err)

    def _fail(self, err):
        with self._pendingLock:
            if self.dead:
                return
            self.dead = True
            pending, self._pending = self._pending, {}
        LOG.info("connection %s failed: %s", self.address, err)
        for fut in pending.values():
            fut.set_exception(TransportError("connection to {}:{} lost: {}".format(
                self.address[0], self.address[1], err)))
        try:
            self._sock.close()
        except OSError:
            pass

    def close(self):
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._fail(EOFError("closed by client"))


class SocketTransport(Transport):
    def __init__(self, cluster, timeout=DEFAULT_TIMEOUT):
        super().__init__(len(cluster))
        self._cluster = list(cluster)
        self._timeout = timeout
        self._connLock = threading.Lock()
        self._conns = {}

    @classmethod
    def fromConfig(cls, config):
        return cls(config.cluster, timeout=config.timeout)

    def _connection(self, dest):
        with self._connLock:
            conn = self._conns.get(dest)
            if conn is None or conn.dead:
                conn = _Connection(self._cluster[dest], self._timeout)
                self._conns[dest] = conn
            return conn

    def sendAsync(self, dest, msg):
        """Sends without waiting; the returned Future yields the reply."""
        self.checkDest(dest)
        msg = msg.withRequestId(self.nextRequestId())
        conn = self._connection(dest)
        return conn, msg.requestId, conn.submit(msg)

    def wait(self, pending):
        conn, requestId, fut = pending
        try:
            return fut.result(timeout=self._timeout)
        except FutureTimeout as err:
            conn.forget(requestId)
            raise TransportError("request {} to {}:{} timed out after {}s".format(
                requestId, conn.address[0], conn.address[1],
                self._timeout)) from err

    def sendRequest(self, dest, msg):
        LOG.debug("-> %d %s", dest, msg.kind.name)
        return self.wait(self.sendAsync(dest, msg))

    def close(self):
        with self._connLock:
            conns, self._conns = self._conns, {}
        for conn in conns.values():
            conn.close()
