"""
The catalog is tree 0: one entry per table, keyed by encodeKey(TEXT name),
holding the TableDef as JSON. It is read and written inside the caller's
transaction, so DDL commits or aborts together with everything else.
"""
from dataclasses import dataclass, field
import json
import logging
from typing import List, Tuple

from ..dbt import CATALOG_TREE
from . import ColumnType, PlanError, SqlError, UnknownTable
from .keys import encodeKey

LOG = logging.getLogger(__name__)


@dataclass
class IndexDef:
    name: str
    column: str
    tree: int


@dataclass
class TableDef:
    name: str
    columns: List[Tuple[str, ColumnType]]
    pk: str
    dataTree: int
    indexes: List[IndexDef] = field(default_factory=list)

    @property
    def columnNames(self):
        return [name for name, _ in self.columns]

    @property
    def types(self):
        return [ctype for _, ctype in self.columns]

    def position(self, column):
        for pos, (name, _) in enumerate(self.columns):
            if name == column:
                return pos
        raise PlanError("table {} has no column {}".format(self.name, column))

    def typeOf(self, column):
        return self.columns[self.position(column)][1]

    @property
    def pkType(self):
        return self.typeOf(self.pk)

    def indexOn(self, column):
        for index in self.indexes:
            if index.column == column:
                return index
        return None

    def toJson(self):
        return json.dumps({
            "name": self.name,
            "columns": [[name, ctype.value] for name, ctype in self.columns],
            "pk": self.pk,
            "tree": self.dataTree,
            "indexes": [{"name": ix.name, "column": ix.column, "tree": ix.tree}
                        for ix in self.indexes],
        }, sort_keys=True)

    @classmethod
    def fromJson(cls, text):
        try:
            obj = json.loads(text)
            return cls(obj["name"],
                       [(name, ColumnType(ctype)) for name, ctype in obj["columns"]],
                       obj["pk"], obj["tree"],
                       [IndexDef(ix["name"], ix["column"], ix["tree"])
                        for ix in obj["indexes"]])
        except (ValueError, KeyError, TypeError) as err:
            raise SqlError("corrupt catalog entry: {}".format(err)) from err


class Catalog(object):
    def __init__(self, dbt):
        self.dbt = dbt

    @staticmethod
    def _key(name):
        return encodeKey(ColumnType.TEXT, name)

    def load(self, ctx):
        """{table name: TableDef} as of ctx."""
        if not self.dbt.hasTree(ctx, CATALOG_TREE):
            return {}
        tables = {}
        for _, value in self.dbt.scan(ctx, CATALOG_TREE):
            tableDef = TableDef.fromJson(value.decode("utf-8"))
            tables[tableDef.name] = tableDef
        return tables

    def find(self, ctx, name):
        if not self.dbt.hasTree(ctx, CATALOG_TREE):
            return None
        value = self.dbt.lookup(ctx, CATALOG_TREE, self._key(name))
        return None if value is None else TableDef.fromJson(value.decode("utf-8"))

    def lookup(self, ctx, name):
        tableDef = self.find(ctx, name)
        if tableDef is None:
            raise UnknownTable("no such table: {}".format(name))
        return tableDef

    def store(self, ctx, tableDef):
        self.dbt.ensureTree(ctx, CATALOG_TREE)
        self.dbt.insert(ctx, CATALOG_TREE, self._key(tableDef.name),
                        tableDef.toJson().encode("utf-8"))
        LOG.debug("catalog: stored %s", tableDef.name)
