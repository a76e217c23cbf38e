"""
Tokenizer. Keywords are case-insensitive; identifiers keep their spelling.
"""
from dataclasses import dataclass
import enum

from . import LexError

KEYWORDS = frozenset("""
    AND ASC BEGIN BY COMMIT CREATE DELETE FLOAT FROM INDEX INSERT INT INTO KEY
    LIMIT ON ORDER PRIMARY ROLLBACK SELECT SET TABLE TEXT TRANSACTION UPDATE
    VALUES WHERE
""".split())

SYMBOLS = ("<=", ">=", "(", ")", ",", ";", "*", "=", "<", ">")

INT_MIN = -(1 << 63)
INT_MAX = (1 << 63) - 1


def _isDigit(char):
    return len(char) == 1 and char in "0123456789"


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer"
    FLOAT = "float"
    STRING = "string"
    SYMBOL = "symbol"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    value: object
    text: str
    line: int
    col: int

    def describe(self):
        if self.kind == TokenKind.EOF:
            return "end of input"
        return repr(self.text)


class _Scanner(object):
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def peek(self, ahead=0):
        pos = self.pos + ahead
        return self.text[pos] if pos < len(self.text) else ""

    def advance(self, count=1):
        for _ in range(count):
            if self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1


def _number(scanner, line, col):
    start = scanner.pos
    if scanner.peek() == "-":
        scanner.advance()
    while _isDigit(scanner.peek()):
        scanner.advance()
    isFloat = False
    if scanner.peek() == "." and _isDigit(scanner.peek(1)):
        isFloat = True
        scanner.advance()
        while _isDigit(scanner.peek()):
            scanner.advance()
    if scanner.peek() in ("e", "E"):
        skip = 2 if scanner.peek(1) in ("+", "-") else 1
        if _isDigit(scanner.peek(skip)):
            isFloat = True
            scanner.advance(skip)
            while _isDigit(scanner.peek()):
                scanner.advance()
    text = scanner.text[start:scanner.pos]
    if scanner.peek().isalpha() or scanner.peek() == "_":
        raise LexError(line, col, "malformed number {!r}".format(
            text + scanner.peek()))
    if isFloat:
        return Token(TokenKind.FLOAT, float(text), text, line, col)
    value = int(text)
    if not INT_MIN <= value <= INT_MAX:
        raise LexError(line, col, "integer literal {} out of range".format(text))
    return Token(TokenKind.INT, value, text, line, col)


def _string(scanner, line, col):
    start = scanner.pos
    scanner.advance()
    chars = []
    while True:
        char = scanner.peek()
        if not char:
            raise LexError(line, col, "unterminated string literal")
        scanner.advance()
        if char == "'":
            if scanner.peek() != "'":
                break
            scanner.advance()
        chars.append(char)
    return Token(TokenKind.STRING, "".join(chars), scanner.text[start:scanner.pos],
                 line, col)


def _word(scanner, line, col):
    start = scanner.pos
    while scanner.peek().isalnum() or scanner.peek() == "_":
        scanner.advance()
    text = scanner.text[start:scanner.pos]
    if text.upper() in KEYWORDS:
        return Token(TokenKind.KEYWORD, text.upper(), text, line, col)
    return Token(TokenKind.IDENT, text, text, line, col)


def tokenize(text):
    scanner = _Scanner(text)
    tokens = []
    while True:
        char = scanner.peek()
        if not char:
            tokens.append(Token(TokenKind.EOF, None, "", scanner.line, scanner.col))
            return tokens
        line, col = scanner.line, scanner.col
        if char.isspace():
            scanner.advance()
        elif char == "-" and scanner.peek(1) == "-":
            while scanner.peek() and scanner.peek() != "\n":
                scanner.advance()
        elif _isDigit(char) or (char == "-" and _isDigit(scanner.peek(1))):
            tokens.append(_number(scanner, line, col))
        elif char == "'":
            tokens.append(_string(scanner, line, col))
        elif char.isalpha() or char == "_":
            tokens.append(_word(scanner, line, col))
        else:
            for symbol in SYMBOLS:
                if scanner.text.startswith(symbol, scanner.pos):
                    scanner.advance(len(symbol))
                    tokens.append(Token(TokenKind.SYMBOL, symbol, symbol, line, col))
                    break
            else:
                raise LexError(line, col, "unexpected character {!r}".format(char))
