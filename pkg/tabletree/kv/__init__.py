"""
Storage server side: multi-version key-value store, two-phase commit
participant and timestamp oracle.
"""
from __future__ import absolute_import, division, print_function

from ..wire.codec import ErrorCode, Kind, message


class KvError(Exception):
    code = ErrorCode.INTERNAL


class NotOwnerError(KvError):
    code = ErrorCode.NOT_OWNER


class ProtocolError(KvError):
    code = ErrorCode.PROTOCOL


class NotOracleError(KvError):
    code = ErrorCode.NOT_ORACLE


class BadRequestError(KvError):
    code = ErrorCode.BAD_REQUEST


_BY_CODE = {cls.code: cls for cls in
            (KvError, NotOwnerError, ProtocolError, NotOracleError,
             BadRequestError)}


def errorReply(err):
    return message(Kind.ERROR, code=err.code, message=str(err))


def errorFromReply(reply):
    return _BY_CODE.get(reply.code, KvError)(reply.message)
