"""Tokenizer for MiniJ source text."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset({
    "if", "else", "while", "for", "try", "catch", "finally",
    "return", "throw", "new", "true", "false", "void",
})

# Multi-character operators first so the lexer takes the longest match.
OPERATORS = (
    "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "=",
)

PUNCTUATION = frozenset({"(", ")", "{", "}", ",", ";", "."})

KW = "kw"
IDENT = "ident"
INT = "int"
STRING = "string"
OP = "op"
PUNCT = "punct"
EOF = "eof"

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class LexError(Exception):
    """Raised on input outside the MiniJ token alphabet."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    start: int
    end: int
    line: int
    col: int

    def __repr__(self) -> str:
        return f"{self.kind}:{self.value}"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(source: str) -> list[Token]:
    """Convert MiniJ text into tokens, dropping whitespace and comments.

    Raises LexError (with line/column) on any character outside the
    token alphabet, on malformed integer literals such as ``0x``, and on
    unterminated strings or block comments.
    """
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        if source.startswith("/*", i):
            start_line, start_col = line, col
            advance(2)
            while i < n and not source.startswith("*/", i):
                advance(1)
            if i >= n:
                raise LexError("unterminated block comment", start_line, start_col)
            advance(2)
            continue

        start, tok_line, tok_col = i, line, col
        if _is_ident_start(c):
            while i < n and _is_ident_char(source[i]):
                advance(1)
            text = source[start:i]
            kind = KW if text in KEYWORDS else IDENT
            tokens.append(Token(kind, text, start, i, tok_line, tok_col))
            continue
        if c.isdigit():
            while i < n and source[i].isdigit():
                advance(1)
            if i < n and _is_ident_start(source[i]):
                # "0x" and friends: MiniJ has decimal integer literals only.
                while i < n and _is_ident_char(source[i]):
                    advance(1)
                raise LexError(
                    f"malformed integer literal '{source[start:i]}'", tok_line, tok_col
                )
            tokens.append(Token(INT, source[start:i], start, i, tok_line, tok_col))
            continue
        if c == '"':
            advance(1)
            value = []
            while i < n and source[i] != '"':
                if source[i] == "\n":
                    raise LexError("unterminated string literal", tok_line, tok_col)
                if source[i] == "\\":
                    if i + 1 >= n or source[i + 1] not in _ESCAPES:
                        raise LexError("bad escape sequence", line, col)
                    value.append(_ESCAPES[source[i + 1]])
                    advance(2)
                    continue
                value.append(source[i])
                advance(1)
            if i >= n:
                raise LexError("unterminated string literal", tok_line, tok_col)
            advance(1)
            tokens.append(Token(STRING, "".join(value), start, i, tok_line, tok_col))
            continue
        matched = False
        for op in OPERATORS:
            if source.startswith(op, i):
                advance(len(op))
                tokens.append(Token(OP, op, start, i, tok_line, tok_col))
                matched = True
                break
        if matched:
            continue
        if c in PUNCTUATION:
            advance(1)
            tokens.append(Token(PUNCT, c, start, i, tok_line, tok_col))
            continue
        raise LexError(f"unexpected character {c!r}", tok_line, tok_col)

    tokens.append(Token(EOF, "", n, n, line, col))
    return tokens
