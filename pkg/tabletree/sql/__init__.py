"""
Embedded SQL-subset query processor: parse, plan and execute statements as
operations on distributed trees.
"""
from __future__ import absolute_import, division, print_function

import enum


class ColumnType(enum.Enum):
    INT = "INT"
    TEXT = "TEXT"
    FLOAT = "FLOAT"


class SqlError(Exception):
    retryable = False


class LexError(SqlError):
    def __init__(self, line, col, reason):
        super().__init__("line {} column {}: {}".format(line, col, reason))
        self.line = line
        self.col = col
        self.reason = reason


class ParseError(SqlError):
    def __init__(self, line, col, token, reason):
        super().__init__("line {} column {}: {} at {}".format(line, col, reason, token))
        self.line = line
        self.col = col
        self.token = token
        self.reason = reason


class PlanError(SqlError):
    pass


class TypeMismatch(PlanError):
    pass


class UnknownTable(PlanError):
    pass


class ExecError(SqlError):
    pass


class DuplicateKeyError(ExecError):
    pass


class DuplicateTableError(ExecError):
    pass


class ConflictError(ExecError):
    retryable = True
