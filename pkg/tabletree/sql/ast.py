"""
Statement trees produced by the parser. sexpr() renders a canonical
one-line form used by the parser corpus and in debug logs.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import ColumnType

OPS = ("=", "<", "<=", ">", ">=")
FLIPPED = {"=": "=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


def _list(items):
    return " ".join(item.sexpr() for item in items)


@dataclass(frozen=True)
class Literal:
    type: ColumnType
    value: object

    def sexpr(self):
        if self.type == ColumnType.TEXT:
            return "'{}'".format(self.value.replace("'", "''"))
        return repr(self.value)


@dataclass(frozen=True)
class Comparison:
    column: str
    op: str
    literal: Literal

    def sexpr(self):
        return "({} {} {})".format(self.op, self.column, self.literal.sexpr())


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: ColumnType

    def sexpr(self):
        return "({} {})".format(self.name, self.type.value)


class Statement(object):
    def sexpr(self):
        raise NotImplementedError


def _where(where):
    return "(where{}{})".format(" " if where else "", _list(where))


@dataclass
class CreateTable(Statement):
    name: str
    columns: List[ColumnDef]
    pk: Optional[str]

    def sexpr(self):
        return "(create-table {} {} (pk {}))".format(
            self.name, _list(self.columns), self.pk or "-")


@dataclass
class CreateIndex(Statement):
    name: str
    table: str
    column: str

    def sexpr(self):
        return "(create-index {} {} {})".format(self.name, self.table, self.column)


@dataclass
class Insert(Statement):
    table: str
    columns: Optional[List[str]]
    values: List[Literal]

    def sexpr(self):
        cols = "(cols {})".format(" ".join(self.columns)) if self.columns else "*"
        return "(insert {} {} (values {}))".format(self.table, cols, _list(self.values))


@dataclass
class Select(Statement):
    table: str
    columns: Optional[List[str]]
    where: List[Comparison] = field(default_factory=list)
    orderBy: Optional[str] = None
    limit: Optional[int] = None

    def sexpr(self):
        cols = "({})".format(" ".join(self.columns)) if self.columns else "*"
        return "(select {} {} {} (order {}) (limit {}))".format(
            self.table, cols, _where(self.where), self.orderBy or "-",
            "-" if self.limit is None else self.limit)


@dataclass
class Update(Statement):
    table: str
    assignments: List[Tuple[str, Literal]]
    where: List[Comparison] = field(default_factory=list)

    def sexpr(self):
        sets = " ".join("({} {})".format(col, lit.sexpr())
                        for col, lit in self.assignments)
        return "(update {} (set {}) {})".format(self.table, sets, _where(self.where))


@dataclass
class Delete(Statement):
    table: str
    where: List[Comparison] = field(default_factory=list)

    def sexpr(self):
        return "(delete {} {})".format(self.table, _where(self.where))


@dataclass
class Begin(Statement):
    def sexpr(self):
        return "(begin)"


@dataclass
class Commit(Statement):
    def sexpr(self):
        return "(commit)"


@dataclass
class Rollback(Statement):
    def sexpr(self):
        return "(rollback)"
