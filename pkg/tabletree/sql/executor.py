"""
Sessions execute statements against distributed trees. Outside BEGIN each
statement runs in its own transaction, retried on conflict; inside BEGIN
all statements share one TxnContext, and any error aborts it.
"""
from dataclasses import dataclass, field
import logging
import operator
from typing import List, Optional

from ..dbt import DbtError
from ..txn import TxnAborted, TxnError
from . import (ColumnType, ConflictError, DuplicateKeyError,
               DuplicateTableError, ExecError, PlanError,
               UnknownTable)
from .ast import (Begin, Commit, CreateIndex, CreateTable, Delete, Insert,
                  Rollback, Select, Update)
from .catalog import Catalog, IndexDef, TableDef
from .keys import decodeKey, encodeKey, prefixEnd
from .parser import parse
from .planner import AccessPath, coerce, plan
from .rows import decodeRow, encodeRow

LOG = logging.getLogger(__name__)

COMPARE = {
    "=": operator.eq,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass
class ResultSet:
    columns: List[str]
    rows: List[tuple] = field(default_factory=list)


@dataclass
class StatusResult:
    tag: str
    count: Optional[int] = None

    def __str__(self):
        return self.tag if self.count is None else "{} {}".format(self.tag, self.count)


def inBounds(value, lower, upper):
    if lower is not None:
        if value < lower.value or (value == lower.value and not lower.inclusive):
            return False
    if upper is not None:
        if value > upper.value or (value == upper.value and not upper.inclusive):
            return False
    return True


def matches(tableDef, values, conjuncts):
    return all(COMPARE[comp.op](values[tableDef.position(comp.column)],
                                comp.literal.value)
               for comp in conjuncts)


def indexKey(tableDef, index, values, pkKey):
    ctype = tableDef.typeOf(index.column)
    return encodeKey(ctype, values[tableDef.position(index.column)]) + pkKey


def tableDefFor(stmt, dataTree):
    """Validated TableDef for a CREATE TABLE statement."""
    names = [col.name for col in stmt.columns]
    if len(set(names)) != len(names):
        raise PlanError("duplicate column name in table {}".format(stmt.name))
    if stmt.pk is None:
        raise PlanError("table {} needs a PRIMARY KEY".format(stmt.name))
    if stmt.pk not in names:
        raise PlanError("primary key {} is not a column of {}".format(
            stmt.pk, stmt.name))
    tableDef = TableDef(stmt.name, [(col.name, col.type) for col in stmt.columns],
                        stmt.pk, dataTree)
    if tableDef.pkType == ColumnType.FLOAT:
        raise PlanError("primary key {} must be INT or TEXT".format(stmt.pk))
    return tableDef


def insertValues(tableDef, stmt):
    """INSERT values coerced and laid out in table column order."""
    columns = stmt.columns or tableDef.columnNames
    if len(columns) != len(stmt.values):
        raise PlanError("{} values for {} columns".format(
            len(stmt.values), len(columns)))
    if sorted(columns) != sorted(tableDef.columnNames):
        raise PlanError("INSERT must name every column of {} exactly once".format(
            tableDef.name))
    values = [None] * len(columns)
    for column, literal in zip(columns, stmt.values):
        values[tableDef.position(column)] = coerce(tableDef.typeOf(column), literal)
    return values


def indexTarget(tables, stmt):
    """TableDef a CREATE INDEX statement applies to, after validation."""
    if stmt.table not in tables:
        raise UnknownTable("no such table: {}".format(stmt.table))
    tableDef = tables[stmt.table]
    tableDef.position(stmt.column)
    for other in tables.values():
        if any(index.name == stmt.name for index in other.indexes):
            raise DuplicateTableError("index {} already exists".format(stmt.name))
    return tableDef


class Session(object):
    def __init__(self, dbt, retries=5):
        self.dbt = dbt
        self.client = dbt.client
        self.catalog = Catalog(dbt)
        self.retries = retries
        self.ctx = None

    @classmethod
    def fromConfig(cls, dbt, config):
        return cls(dbt, config.retries)

    @property
    def inTransaction(self):
        return self.ctx is not None

    def execute(self, text):
        return self.executeStatement(parse(text))

    def executeStatement(self, stmt):
        if isinstance(stmt, Begin):
            if self.ctx is not None:
                raise ExecError("a transaction is already in progress")
            self.ctx = self.client.begin()
            return StatusResult("BEGIN")
        if isinstance(stmt, (Commit, Rollback)):
            return self._finish(stmt)
        if self.ctx is not None:
            try:
                return self._run(self.ctx, stmt)
            except BaseException:
                if self.ctx.active:
                    self.client.abort(self.ctx)
                self.ctx = None
                raise
        try:
            return self.client.runInTxn(lambda ctx: self._run(ctx, stmt), self.retries)
        except TxnAborted as err:
            raise ConflictError("statement gave up after {} retries: {}".format(
                self.retries, err.reason)) from err

    def _finish(self, stmt):
        if self.ctx is None:
            raise ExecError("no transaction in progress")
        ctx, self.ctx = self.ctx, None
        if isinstance(stmt, Rollback):
            self.client.abort(ctx)
            return StatusResult("ROLLBACK")
        outcome = self.client.commit(ctx)
        if not outcome.committed:
            raise ConflictError("transaction aborted: {}".format(outcome.reason))
        return StatusResult("COMMIT")

    def _run(self, ctx, stmt):
        handler = {
            CreateTable: self._createTable,
            CreateIndex: self._createIndex,
            Insert: self._insert,
            Select: self._select,
            Update: self._update,
            Delete: self._delete,
        }[type(stmt)]
        try:
            return handler(ctx, stmt)
        except (DbtError, TxnError) as err:
            if isinstance(err, TxnAborted):
                raise
            raise ExecError(str(err)) from err

    def tables(self):
        """Table names, read in a transaction of their own."""
        return sorted(self.client.runInTxn(self.catalog.load, self.retries))

    def dump(self, table):
        """Every row of table in primary-key order, read in its own transaction."""
        def body(ctx):
            tableDef = self.catalog.lookup(ctx, table)
            return [tuple(decodeRow(data))
                    for _, data in self.dbt.scan(ctx, tableDef.dataTree)]
        return self.client.runInTxn(body, self.retries)

    def _createTable(self, ctx, stmt):
        tableDef = tableDefFor(stmt, 0)
        if self.catalog.find(ctx, stmt.name) is not None:
            raise DuplicateTableError("table {} already exists".format(stmt.name))
        tableDef.dataTree = self.dbt.createTree(ctx)
        self.catalog.store(ctx, tableDef)
        return StatusResult("CREATE TABLE")

    def _createIndex(self, ctx, stmt):
        tableDef = indexTarget(self.catalog.load(ctx), stmt)
        index = IndexDef(stmt.name, stmt.column, self.dbt.createTree(ctx))
        for pkKey, data in self.dbt.scan(ctx, tableDef.dataTree):
            self.dbt.insert(ctx, index.tree,
                            indexKey(tableDef, index, decodeRow(data), pkKey), pkKey)
        self.dbt.touch(ctx, tableDef.dataTree)
        tableDef.indexes.append(index)
        self.catalog.store(ctx, tableDef)
        return StatusResult("CREATE INDEX")

    def _insert(self, ctx, stmt):
        tableDef = self.catalog.lookup(ctx, stmt.table)
        values = insertValues(tableDef, stmt)
        row = encodeRow(tableDef.types, values)
        pkKey = encodeKey(tableDef.pkType, values[tableDef.position(tableDef.pk)])
        if self.dbt.lookup(ctx, tableDef.dataTree, pkKey) is not None:
            raise DuplicateKeyError("duplicate primary key {!r} in {}".format(
                values[tableDef.position(tableDef.pk)], tableDef.name))
        self.dbt.insert(ctx, tableDef.dataTree, pkKey, row)
        for index in tableDef.indexes:
            self.dbt.insert(ctx, index.tree,
                            indexKey(tableDef, index, values, pkKey), pkKey)
        return StatusResult("INSERT", 1)

    def _dataRow(self, ctx, tableDef, pkKey):
        data = self.dbt.lookup(ctx, tableDef.dataTree, pkKey)
        if data is None:
            raise ExecError("index of {} points at missing row {}".format(
                tableDef.name, pkKey.hex()))
        return decodeRow(data)

    def _pathRows(self, ctx, thePlan):
        """(pkKey, values) for rows the access path selects, in path order."""
        tableDef = thePlan.table
        access = thePlan.access
        if access == AccessPath.PK_POINT:
            pkKey = encodeKey(tableDef.pkType, thePlan.point)
            data = self.dbt.lookup(ctx, tableDef.dataTree, pkKey)
            if data is not None:
                yield pkKey, decodeRow(data)
            return
        if access in (AccessPath.PK_RANGE, AccessPath.FULL_SCAN):
            start, end = b"", None
            if thePlan.lower is not None:
                start = encodeKey(tableDef.pkType, thePlan.lower.value)
            if thePlan.upper is not None:
                end = prefixEnd(encodeKey(tableDef.pkType, thePlan.upper.value))
            pkPos = tableDef.position(tableDef.pk)
            for pkKey, data in self.dbt.scan(ctx, tableDef.dataTree, start, end):
                values = decodeRow(data)
                if inBounds(values[pkPos], thePlan.lower, thePlan.upper):
                    yield pkKey, values
            return
        ctype = tableDef.typeOf(thePlan.index.column)
        if access == AccessPath.INDEX_POINT:
            prefix = encodeKey(ctype, thePlan.point)
            start, end = prefix, prefixEnd(prefix)
        else:
            start = b"" if thePlan.lower is None else \
                encodeKey(ctype, thePlan.lower.value)
            end = None if thePlan.upper is None else \
                prefixEnd(encodeKey(ctype, thePlan.upper.value))
        for ixKey, pkKey in self.dbt.scan(ctx, thePlan.index.tree, start, end):
            value = decodeKey(ixKey[:len(ixKey) - len(pkKey)], ctype)
            if access == AccessPath.INDEX_POINT:
                if value != thePlan.point:
                    continue
            elif not inBounds(value, thePlan.lower, thePlan.upper):
                continue
            yield pkKey, self._dataRow(ctx, tableDef, pkKey)

    def _matchingRows(self, ctx, thePlan):
        for pkKey, values in self._pathRows(ctx, thePlan):
            if matches(thePlan.table, values, thePlan.residual):
                yield pkKey, values

    def _select(self, ctx, stmt):
        tableDef = self.catalog.lookup(ctx, stmt.table)
        thePlan = plan(stmt, tableDef)
        rows = []
        if thePlan.limit != 0:
            for _, values in self._matchingRows(ctx, thePlan):
                rows.append(values)
                if not thePlan.needsSort and thePlan.limit is not None and \
                        len(rows) >= thePlan.limit:
                    break
        if thePlan.needsSort:
            pos = tableDef.position(thePlan.orderBy)
            pkPos = tableDef.position(tableDef.pk)
            rows.sort(key=lambda values: (values[pos], values[pkPos]))
        if thePlan.limit is not None:
            rows = rows[:thePlan.limit]
        positions = [tableDef.position(column) for column in thePlan.projection]
        return ResultSet(list(thePlan.projection),
                         [tuple(values[pos] for pos in positions) for values in rows])

    def _update(self, ctx, stmt):
        tableDef = self.catalog.lookup(ctx, stmt.table)
        thePlan = plan(stmt, tableDef)
        targets = list(self._matchingRows(ctx, thePlan))
        for pkKey, values in targets:
            newValues = list(values)
            for column, value in thePlan.assignments:
                newValues[tableDef.position(column)] = value
            self.dbt.insert(ctx, tableDef.dataTree, pkKey,
                            encodeRow(tableDef.types, newValues))
            for index in tableDef.indexes:
                oldKey = indexKey(tableDef, index, values, pkKey)
                newKey = indexKey(tableDef, index, newValues, pkKey)
                if oldKey != newKey:
                    self.dbt.delete(ctx, index.tree, oldKey)
                    self.dbt.insert(ctx, index.tree, newKey, pkKey)
        return StatusResult("UPDATE", len(targets))

    def _delete(self, ctx, stmt):
        tableDef = self.catalog.lookup(ctx, stmt.table)
        thePlan = plan(stmt, tableDef)
        targets = list(self._matchingRows(ctx, thePlan))
        for pkKey, values in targets:
            self.dbt.delete(ctx, tableDef.dataTree, pkKey)
            for index in tableDef.indexes:
                self.dbt.delete(ctx, index.tree, indexKey(tableDef, index, values, pkKey))
        return StatusResult("DELETE", len(targets))


def checkIndexes(dbt, ctx, tableDef):
    """
    Returns a list of problems: index entries with no matching row, and
    rows missing from an index.
    """
    problems = []
    rows = {pkKey: decodeRow(data)
            for pkKey, data in dbt.scan(ctx, tableDef.dataTree)}
    for index in tableDef.indexes:
        expected = {indexKey(tableDef, index, values, pkKey): pkKey
                    for pkKey, values in rows.items()}
        actual = dict(dbt.scan(ctx, index.tree))
        for key in sorted(set(expected) ^ set(actual)):
            problems.append("{}.{}: {} entry {}".format(
                tableDef.name, index.name,
                "missing" if key in expected else "stray", key.hex()))
        for key in sorted(set(expected) & set(actual)):
            if expected[key] != actual[key]:
                problems.append("{}.{}: entry {} points at the wrong row".format(
                    tableDef.name, index.name, key.hex()))
    return problems


__all__ = ["ResultSet", "Session", "StatusResult", "checkIndexes"]
