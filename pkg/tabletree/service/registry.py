from __future__ import absolute_import

from . import service
from ..wire.loopback import LoopbackTransport
from ..wire.transport import SocketTransport


def registerServices(testing=False):
    if testing:
        service().clear(thisIsATest=testing)
        service().register("net.transport", LoopbackTransport)
    else:
        service().register("net.transport", SocketTransport)
