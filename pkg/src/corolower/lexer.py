"""Tokenizer. Whitespace and `//` line comments are discarded; every token
carries a 1-based line/column."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LexError

KEYWORDS = frozenset(
    [
        "fn",
        "let",
        "yield",
        "if",
        "else",
        "while",
        "return",
        "print",
        "true",
        "false",
        "null",
        "next",
    ]
)

_TWO_CHAR_OPS = ("==", "!=", "<=", ">=", "&&", "||")
_ONE_CHAR_OPS = "*(){},.:=&+-/%<>!"

INT_MAX = 2**63 - 1


@dataclass(frozen=True)
class Token:
    kind: str  # "kw" | "ident" | "int" | "op" | "eof"
    text: str
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def lex(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def advance(k=1):
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
            advance()
            continue
        if c == "/" and i + 1 < n and source[i + 1] == "/":
            while i < n and source[i] != "\n":
                advance()
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            if int(text) > INT_MAX:
                raise LexError(
                    f"integer literal {text} out of range", start_line, start_col
                )
            tokens.append(Token("int", text, start_line, start_col))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, start_line, start_col))
            advance(j - i)
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token("op", two, start_line, start_col))
            advance(2)
            continue
        if c in _ONE_CHAR_OPS:
            tokens.append(Token("op", c, start_line, start_col))
            advance()
            continue
        raise LexError(f"unexpected character {c!r}", start_line, start_col)

    tokens.append(Token("eof", "", line, col))
    return tokens
