"""
Single-process reference executor on sqlite3 in memory. It accepts the
same statements (parsed by our parser and validated by the same helpers)
and returns the same result types, so randomized workloads can compare
the distributed engine against it statement by statement.
"""
import copy
from logging import getLogger
import sqlite3

from . import ColumnType, ConflictError, DuplicateKeyError, \
    DuplicateTableError, ExecError, UnknownTable
from .ast import (Begin, Commit, CreateIndex, CreateTable, Delete, Insert,
                  Rollback, Select, Update)
from .catalog import IndexDef
from .executor import (ResultSet, StatusResult, indexTarget, insertValues,
                       tableDefFor)
from .parser import parse
from .planner import plan, resolveWhere
from .rows import encodeRow

LOG = getLogger(__name__)

SQLITE_TYPES = {
    ColumnType.INT: "INTEGER",
    ColumnType.FLOAT: "REAL",
    ColumnType.TEXT: "TEXT",
}


def connectDb(filename=":memory:"):
    conn = sqlite3.connect(filename)
    conn.isolation_level = None
    return conn


def quote(name):
    return '"{}"'.format(name)


def whereClause(conjuncts):
    if not conjuncts:
        return "", []
    text = " WHERE " + " AND ".join(
        "{} {} ?".format(quote(comp.column), comp.op) for comp in conjuncts)
    return text, [comp.literal.value for comp in conjuncts]


class ReferenceSession(object):
    def __init__(self, filename=":memory:"):
        self.conn = connectDb(filename)
        self.schema = {}
        self._saved = None

    def tables(self):
        return sorted(self.schema)

    @property
    def inTransaction(self):
        return self._saved is not None

    def close(self):
        self.conn.close()

    def execute(self, text):
        return self.executeStatement(parse(text))

    def executeStatement(self, stmt):
        if isinstance(stmt, Begin):
            if self._saved is not None:
                raise ExecError("a transaction is already in progress")
            self.conn.execute("BEGIN")
            self._saved = copy.deepcopy(self.schema)
            return StatusResult("BEGIN")
        if isinstance(stmt, (Commit, Rollback)):
            if self._saved is None:
                raise ExecError("no transaction in progress")
            if isinstance(stmt, Rollback):
                self._rollback()
                return StatusResult("ROLLBACK")
            self.conn.execute("COMMIT")
            self._saved = None
            return StatusResult("COMMIT")
        handler = {
            CreateTable: self._createTable,
            CreateIndex: self._createIndex,
            Insert: self._insert,
            Select: self._select,
            Update: self._update,
            Delete: self._delete,
        }[type(stmt)]
        try:
            return handler(stmt)
        except BaseException:
            if self._saved is not None:
                self._rollback()
            raise

    def _rollback(self):
        self.conn.execute("ROLLBACK")
        self.schema, self._saved = self._saved, None

    def _doQuery(self, query, *args):
        LOG.debug("reference: %s %r", query, args)
        cursor = self.conn.cursor()
        try:
            cursor.execute(query, args)
        except sqlite3.IntegrityError as err:
            raise DuplicateKeyError(str(err)) from err
        except sqlite3.OperationalError as err:
            raise ConflictError(str(err)) from err
        return cursor

    def _table(self, name):
        if name not in self.schema:
            raise UnknownTable("no such table: {}".format(name))
        return self.schema[name]

    def _createTable(self, stmt):
        tableDef = tableDefFor(stmt, 0)
        if stmt.name in self.schema:
            raise DuplicateTableError("table {} already exists".format(stmt.name))
        columns = ", ".join("{} {}".format(quote(name), SQLITE_TYPES[ctype])
                            for name, ctype in tableDef.columns)
        self._doQuery("CREATE TABLE {} ({}, PRIMARY KEY ({}))".format(
            quote(stmt.name), columns, quote(stmt.pk)))
        self.schema[stmt.name] = tableDef
        return StatusResult("CREATE TABLE")

    def _createIndex(self, stmt):
        tableDef = indexTarget(self.schema, stmt)
        self._doQuery("CREATE INDEX {} ON {} ({})".format(
            quote(stmt.name), quote(stmt.table), quote(stmt.column)))
        tableDef.indexes.append(IndexDef(stmt.name, stmt.column, 0))
        return StatusResult("CREATE INDEX")

    def _insert(self, stmt):
        tableDef = self._table(stmt.table)
        values = insertValues(tableDef, stmt)
        encodeRow(tableDef.types, values)
        self._doQuery("INSERT INTO {} VALUES ({})".format(
            quote(stmt.table), ", ".join(["?"] * len(values))), *values)
        return StatusResult("INSERT", 1)

    def _select(self, stmt):
        tableDef = self._table(stmt.table)
        thePlan = plan(stmt, tableDef)
        where, args = whereClause(resolveWhere(tableDef, stmt.where))
        query = "SELECT {} FROM {}{}".format(
            ", ".join(quote(col) for col in thePlan.projection),
            quote(stmt.table), where)
        if thePlan.orderBy is not None:
            query += " ORDER BY {}, {}".format(quote(thePlan.orderBy),
                                               quote(tableDef.pk))
        if thePlan.limit is not None:
            query += " LIMIT {:d}".format(thePlan.limit)
        rows = self._doQuery(query, *args).fetchall()
        return ResultSet(list(thePlan.projection), [tuple(row) for row in rows])

    def _update(self, stmt):
        tableDef = self._table(stmt.table)
        thePlan = plan(stmt, tableDef)
        where, args = whereClause(resolveWhere(tableDef, stmt.where))
        sets = ", ".join("{} = ?".format(quote(col)) for col, _ in thePlan.assignments)
        for column, value in thePlan.assignments:
            encodeRow([tableDef.typeOf(column)], [value])
        sql = "UPDATE {} SET {}{}".format(quote(stmt.table), sets, where)
        cursor = self._doQuery(sql, *([value for _, value in thePlan.assignments] + args))
        return StatusResult("UPDATE", cursor.rowcount)

    def _delete(self, stmt):
        tableDef = self._table(stmt.table)
        plan(stmt, tableDef)
        where, args = whereClause(resolveWhere(tableDef, stmt.where))
        cursor = self._doQuery("DELETE FROM {}{}".format(quote(stmt.table), where), *args)
        return StatusResult("DELETE", cursor.rowcount)

    def dump(self, table):
        """Every row of table in primary-key order."""
        tableDef = self._table(table)
        return [tuple(row) for row in self._doQuery(
            "SELECT * FROM {} ORDER BY {}".format(quote(table), quote(tableDef.pk)))]

