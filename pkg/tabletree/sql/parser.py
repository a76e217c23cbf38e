"""
Recursive-descent parser for the SQL subset. The grammar is documented in
docs/grammar.md.
"""
import logging

from . import ColumnType, ParseError
from .ast import (FLIPPED, OPS, Begin, ColumnDef, Commit, Comparison,
                  CreateIndex, CreateTable, Delete, Insert, Literal, Rollback,
                  Select, Update)
from .lexer import TokenKind, tokenize

LOG = logging.getLogger(__name__)

_LITERAL_TYPES = {
    TokenKind.INT: ColumnType.INT,
    TokenKind.FLOAT: ColumnType.FLOAT,
    TokenKind.STRING: ColumnType.TEXT,
}


class _Parser(object):
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def current(self):
        return self.tokens[self.pos]

    def error(self, reason, token=None):
        token = token or self.current
        return ParseError(token.line, token.col, token.describe(), reason)

    def next(self):
        token = self.current
        if token.kind != TokenKind.EOF:
            self.pos += 1
        return token

    def isKeyword(self, *words):
        return self.current.kind == TokenKind.KEYWORD and self.current.value in words

    def isSymbol(self, symbol):
        return self.current.kind == TokenKind.SYMBOL and self.current.value == symbol

    def keyword(self, word):
        if not self.isKeyword(word):
            raise self.error("expected {}".format(word))
        return self.next()

    def symbol(self, symbol):
        if not self.isSymbol(symbol):
            raise self.error("expected {!r}".format(symbol))
        return self.next()

    def ident(self):
        token = self.current
        if token.kind == TokenKind.KEYWORD:
            raise self.error("reserved word {} used as identifier".format(token.value))
        if token.kind != TokenKind.IDENT:
            raise self.error("expected identifier")
        return self.next().value

    def identList(self):
        names = [self.ident()]
        while self.isSymbol(","):
            self.next()
            names.append(self.ident())
        return names

    def literal(self):
        token = self.current
        if token.kind not in _LITERAL_TYPES:
            raise self.error("expected literal")
        self.next()
        return Literal(_LITERAL_TYPES[token.kind], token.value)

    def columnType(self):
        if not self.isKeyword("INT", "TEXT", "FLOAT"):
            raise self.error("expected column type")
        return ColumnType(self.next().value)

    def statement(self):
        token = self.current
        if token.kind != TokenKind.KEYWORD:
            raise self.error("expected statement")
        handler = {
            "CREATE": self.create,
            "INSERT": self.insert,
            "SELECT": self.select,
            "UPDATE": self.update,
            "DELETE": self.delete,
            "BEGIN": self.begin,
            "COMMIT": lambda: self.single(Commit),
            "ROLLBACK": lambda: self.single(Rollback),
        }.get(token.value)
        if handler is None:
            raise self.error("expected statement")
        stmt = handler()
        if self.isSymbol(";"):
            self.next()
        if self.current.kind != TokenKind.EOF:
            raise self.error("unexpected token after statement")
        return stmt

    def single(self, cls):
        self.next()
        return cls()

    def begin(self):
        self.keyword("BEGIN")
        if self.isKeyword("TRANSACTION"):
            self.next()
        return Begin()

    def create(self):
        self.keyword("CREATE")
        if self.isKeyword("TABLE"):
            return self.createTable()
        if self.isKeyword("INDEX"):
            return self.createIndex()
        raise self.error("expected TABLE or INDEX")

    def primaryKey(self):
        token = self.keyword("PRIMARY")
        self.keyword("KEY")
        return token

    def createTable(self):
        self.keyword("TABLE")
        name = self.ident()
        self.symbol("(")
        columns = []
        pk = None
        while True:
            if self.isKeyword("PRIMARY") and columns:
                token = self.primaryKey()
                if pk is not None:
                    raise self.error("duplicate PRIMARY KEY", token)
                self.symbol("(")
                pk = self.ident()
                self.symbol(")")
                break
            column = ColumnDef(self.ident(), self.columnType())
            columns.append(column)
            if self.isKeyword("PRIMARY"):
                token = self.primaryKey()
                if pk is not None:
                    raise self.error("duplicate PRIMARY KEY", token)
                pk = column.name
            if not self.isSymbol(","):
                break
            self.next()
        self.symbol(")")
        return CreateTable(name, columns, pk)

    def createIndex(self):
        self.keyword("INDEX")
        name = self.ident()
        self.keyword("ON")
        table = self.ident()
        self.symbol("(")
        column = self.ident()
        self.symbol(")")
        return CreateIndex(name, table, column)

    def insert(self):
        self.keyword("INSERT")
        self.keyword("INTO")
        table = self.ident()
        columns = None
        if self.isSymbol("("):
            self.next()
            columns = self.identList()
            self.symbol(")")
        self.keyword("VALUES")
        self.symbol("(")
        values = [self.literal()]
        while self.isSymbol(","):
            self.next()
            values.append(self.literal())
        self.symbol(")")
        return Insert(table, columns, values)

    def comparison(self):
        if self.current.kind in _LITERAL_TYPES:
            literal = self.literal()
            op = self.operator()
            return Comparison(self.ident(), FLIPPED[op], literal)
        column = self.ident()
        op = self.operator()
        return Comparison(column, op, self.literal())

    def operator(self):
        if self.current.kind == TokenKind.SYMBOL and self.current.value in OPS:
            return self.next().value
        raise self.error("expected comparison operator")

    def where(self):
        if not self.isKeyword("WHERE"):
            return []
        self.next()
        conjuncts = [self.comparison()]
        while self.isKeyword("AND"):
            self.next()
            conjuncts.append(self.comparison())
        return conjuncts

    def select(self):
        self.keyword("SELECT")
        if self.isSymbol("*"):
            self.next()
            columns = None
        else:
            columns = self.identList()
        self.keyword("FROM")
        table = self.ident()
        where = self.where()
        orderBy = limit = None
        if self.isKeyword("ORDER"):
            self.next()
            self.keyword("BY")
            orderBy = self.ident()
            if self.isKeyword("ASC"):
                self.next()
        if self.isKeyword("LIMIT"):
            self.next()
            token = self.current
            if token.kind != TokenKind.INT or token.value < 0:
                raise self.error("expected non-negative integer")
            limit = self.next().value
        return Select(table, columns, where, orderBy, limit)

    def update(self):
        self.keyword("UPDATE")
        table = self.ident()
        self.keyword("SET")
        assignments = []
        while True:
            column = self.ident()
            self.symbol("=")
            assignments.append((column, self.literal()))
            if not self.isSymbol(","):
                break
            self.next()
        return Update(table, assignments, self.where())

    def delete(self):
        self.keyword("DELETE")
        self.keyword("FROM")
        table = self.ident()
        return Delete(table, self.where())


def parse(text):
    stmt = _Parser(text).statement()
    LOG.debug("parsed %s", stmt.sexpr())
    return stmt
