"""
Row encoding: cells in column-definition order, each a type tag followed
by the value (i64, f64 or a length-prefixed UTF-8 string).
"""
from ..wire import DecodeError, EncodeError
from ..wire.primitives import Packer, Unpacker
from . import ColumnType, ExecError, SqlError
from .keys import checkValue

MAX_TEXT = 64 * 1024

_TAGS = {ColumnType.INT: 1, ColumnType.FLOAT: 2, ColumnType.TEXT: 3}
_TYPES = {tag: ctype for ctype, tag in _TAGS.items()}


def encodeRow(types, values):
    packer = Packer()
    for ctype, value in zip(types, values):
        checkValue(ctype, value)
        packer.u8(_TAGS[ctype])
        if ctype == ColumnType.INT:
            packer.i64(value)
        elif ctype == ColumnType.FLOAT:
            packer.f64(value)
        else:
            try:
                packer.blob(value.encode("utf-8"), MAX_TEXT)
            except EncodeError as err:
                raise ExecError("TEXT value longer than {} bytes".format(
                    MAX_TEXT)) from err
    return packer.getvalue()


def decodeRow(data):
    unpacker = Unpacker(data)
    values = []
    try:
        while not unpacker.atEnd():
            tag = unpacker.u8("cell tag")
            ctype = _TYPES.get(tag)
            if ctype == ColumnType.INT:
                values.append(unpacker.i64())
            elif ctype == ColumnType.FLOAT:
                values.append(unpacker.f64())
            elif ctype == ColumnType.TEXT:
                values.append(unpacker.blob("text").decode("utf-8"))
            else:
                raise SqlError("unknown cell tag {}".format(tag))
    except (DecodeError, UnicodeDecodeError) as err:
        raise SqlError("corrupt row: {}".format(err)) from err
    return values
