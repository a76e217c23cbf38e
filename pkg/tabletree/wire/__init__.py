"""
Binary messages exchanged between clients and storage servers, and the
transports that carry them.
"""
from __future__ import absolute_import, division, print_function


class WireError(Exception):
    pass


class EncodeError(WireError):
    pass


class DecodeError(WireError):
    def __init__(self, offset, reason):
        super().__init__("decode error at offset {}: {}".format(offset, reason))
        self.offset = offset
        self.reason = reason


class TransportError(WireError):
    pass
