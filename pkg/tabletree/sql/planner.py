"""
Rule-based access-path selection:

1. pk = literal                                   -> pk-point
2. first indexed column (table order) with = or a
   range bound: = gives index-point, else
   index-range                                    -> index-point / index-range
3. pk range bounds                                -> pk-range
4. otherwise                                      -> full-scan

Conjuncts absorbed by the access path are dropped from the residual.
"""
from dataclasses import dataclass, field
import enum
import logging
from typing import List, Optional

from . import ColumnType, PlanError, TypeMismatch
from .ast import Comparison, Delete, Literal, Select, Update
from .catalog import IndexDef, TableDef

LOG = logging.getLogger(__name__)


class AccessPath(enum.Enum):
    PK_POINT = "pk-point"
    PK_RANGE = "pk-range"
    INDEX_POINT = "index-point"
    INDEX_RANGE = "index-range"
    FULL_SCAN = "full-scan"


@dataclass(frozen=True)
class Bound:
    value: object
    inclusive: bool


@dataclass
class Plan:
    # pylint: disable=too-many-instance-attributes
    table: TableDef
    access: AccessPath
    index: Optional[IndexDef] = None
    point: object = None
    lower: Optional[Bound] = None
    upper: Optional[Bound] = None
    residual: List[Comparison] = field(default_factory=list)
    projection: List[str] = field(default_factory=list)
    orderBy: Optional[str] = None
    needsSort: bool = False
    limit: Optional[int] = None
    assignments: list = field(default_factory=list)

    @property
    def column(self):
        """Column the access path ranges over, or None for a full scan."""
        if self.access in (AccessPath.PK_POINT, AccessPath.PK_RANGE):
            return self.table.pk
        if self.index is not None:
            return self.index.column
        return None

    def describe(self):
        parts = [self.access.value]
        if self.index is not None:
            parts.append("on " + self.index.name)
        if self.residual:
            parts.append("filter " + " ".join(c.sexpr() for c in self.residual))
        if self.needsSort:
            parts.append("sort by " + self.orderBy)
        return ", ".join(parts)


def coerce(ctype, literal):
    """Literal value as ctype; INT literals widen to FLOAT."""
    if literal.type == ctype:
        return literal.value
    if ctype == ColumnType.FLOAT and literal.type == ColumnType.INT:
        return float(literal.value)
    raise TypeMismatch("{} literal {} used where {} expected".format(
        literal.type.value, literal.sexpr(), ctype.value))


def resolveWhere(tableDef, where):
    """Checks columns and types; returns conjuncts with coerced literals."""
    resolved = []
    for comp in where:
        ctype = tableDef.typeOf(comp.column)
        resolved.append(Comparison(comp.column, comp.op,
                                   Literal(ctype, coerce(ctype, comp.literal))))
    return resolved


def _tighter(current, candidate, lower):
    if current is None:
        return candidate
    if candidate.value == current.value:
        return candidate if not candidate.inclusive else current
    if lower:
        return candidate if candidate.value > current.value else current
    return candidate if candidate.value < current.value else current


def _bounds(conjuncts):
    lower = upper = None
    for comp in conjuncts:
        value = comp.literal.value
        if comp.op in (">", ">="):
            lower = _tighter(lower, Bound(value, comp.op == ">="), True)
        else:
            upper = _tighter(upper, Bound(value, comp.op == "<="), False)
    return lower, upper


def _choose(tableDef, where):
    """Returns (access, index, point, lower, upper, residual)."""
    for pos, comp in enumerate(where):
        if comp.column == tableDef.pk and comp.op == "=":
            return (AccessPath.PK_POINT, None, comp.literal.value, None, None,
                    where[:pos] + where[pos + 1:])
    for column in tableDef.columnNames:
        index = tableDef.indexOn(column)
        if index is None:
            continue
        onColumn = [c for c in where if c.column == column]
        if not onColumn:
            continue
        for pos, comp in enumerate(where):
            if comp.column == column and comp.op == "=":
                return (AccessPath.INDEX_POINT, index, comp.literal.value,
                        None, None, where[:pos] + where[pos + 1:])
        lower, upper = _bounds(onColumn)
        return (AccessPath.INDEX_RANGE, index, None, lower, upper,
                [c for c in where if c.column != column])
    onPk = [c for c in where if c.column == tableDef.pk]
    if onPk:
        lower, upper = _bounds(onPk)
        return (AccessPath.PK_RANGE, None, None, lower, upper,
                [c for c in where if c.column != tableDef.pk])
    return AccessPath.FULL_SCAN, None, None, None, None, list(where)


def _needsSort(result):
    """Data trees yield pk order; index trees yield (column, pk) order."""
    if result.orderBy == result.column:
        return False
    if result.orderBy != result.table.pk:
        return True
    return result.access == AccessPath.INDEX_RANGE


def plan(stmt, tableDef):
    if not isinstance(stmt, (Select, Update, Delete)):
        raise PlanError("{} statements are not planned".format(type(stmt).__name__))
    where = resolveWhere(tableDef, stmt.where)
    access, index, point, lower, upper, residual = _choose(tableDef, where)
    result = Plan(tableDef, access, index, point, lower, upper, residual)
    if isinstance(stmt, Select):
        result.projection = list(stmt.columns or tableDef.columnNames)
        for column in result.projection:
            tableDef.position(column)
        if stmt.orderBy is not None:
            tableDef.position(stmt.orderBy)
            result.orderBy = stmt.orderBy
            result.needsSort = _needsSort(result)
        result.limit = stmt.limit
    elif isinstance(stmt, Update):
        for column, literal in stmt.assignments:
            ctype = tableDef.typeOf(column)
            if column == tableDef.pk:
                raise PlanError("cannot update primary key column {}".format(column))
            result.assignments.append((column, coerce(ctype, literal)))
    LOG.debug("plan for %s: %s", tableDef.name, result.describe())
    return result
