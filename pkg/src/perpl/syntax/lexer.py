"""Tokenizer for PERPL source text."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

KEYWORDS = {
    "define", "data", "case", "of", "if", "then", "else", "let", "in", "amb",
    "factor", "fail", "fold", "unfold", "and", "true", "false",
}

# longest operators first
OPERATORS = ["==", "=>", "->", "=", "|", ".", ",", "(", ")", "<", ">", "\\", ":", ";", "*", "&", "+"]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NUMBER = re.compile(r"\d+(?:\.\d+)?(?:/\d+)?")
_INT = re.compile(r"\d+")


@dataclass
class Token:
    kind: str  # "ident", "kw", "num", "op", "eof"
    text: str
    line: int
    col: int
    bol: bool = False  # first token on its line

    @property
    def pos(self):
        return (self.line, self.col)

    def __repr__(self):
        return f"{self.kind}:{self.text}@{self.line}:{self.col}"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    line_has_token = False

    def advance(k):
        nonlocal i, line, col, line_has_token
        for ch in source[i:i + k]:
            if ch == "\n":
                line += 1
                col = 1
                line_has_token = False
            else:
                col += 1
        i += k

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if source.startswith("(*", i):
            start = (line, col)
            depth = 0
            while True:
                if i >= n:
                    raise ParseError("unterminated comment", start)
                if source.startswith("(*", i):
                    depth += 1
                    advance(2)
                elif source.startswith("*)", i):
                    depth -= 1
                    advance(2)
                    if depth == 0:
                        break
                else:
                    advance(1)
            continue
        bol = not line_has_token
        after_dot = bool(tokens) and tokens[-1].kind == "op" and tokens[-1].text == "."
        m = _INT.match(source, i) if after_dot else _NUMBER.match(source, i)
        if m and ch.isdigit():
            tokens.append(Token("num", m.group(), line, col, bol))
        else:
            m = _IDENT.match(source, i)
            if m:
                word = m.group()
                tokens.append(Token("kw" if word in KEYWORDS else "ident", word, line, col, bol))
            else:
                for op in OPERATORS:
                    if source.startswith(op, i):
                        tokens.append(Token("op", op, line, col, bol))
                        break
                else:
                    raise ParseError(f"unexpected character {ch!r}", (line, col))
        line_has_token = True
        advance(len(tokens[-1].text))
    tokens.append(Token("eof", "", line, col, True))
    return tokens
