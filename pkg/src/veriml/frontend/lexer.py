"""Lexer for the mini-ML surface language and its annotation comments.

``(*@ ... *)`` regions become single ``annot`` tokens carrying the interior
text; plain ``(* ... *)`` comments are dropped.  Comments nest.
"""
from __future__ import annotations

from dataclasses import dataclass

from veriml.frontend.ast import Span


class LexError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{message} at offset {span[0]}")
        self.message = message
        self.span = span


@dataclass
class Token:
    kind: str  # 'int' | 'ident' | 'uident' | 'tyvar' | 'annot' | 'op' | 'eof'
    value: str
    span: Span

    def __repr__(self) -> str:  # compact for test failure output
        return f"{self.kind}:{self.value!r}@{self.span[0]}"


# longest-match first
_OPERATORS = [
    "<->", "->", ":=", "::", "<>", "<=", ">=", "&&", "||", "/\\", "\\/",
    "++", "[|", "|]", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".",
    "|", "=", "<", ">", "+", "-", "*", "@", "!", "?",
]


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def tokenize(text: str, base: int = 0) -> list[Token]:
    """Tokenize ``text``; spans are offsets shifted by ``base`` so that
    annotation interiors keep positions relative to the whole file."""
    toks: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if text.startswith("(*", i):
            start = i
            is_annot = text.startswith("(*@", i)
            j = i + (3 if is_annot else 2)
            depth = 1
            while j < n and depth:
                if text.startswith("(*", j):
                    depth += 1
                    j += 2
                elif text.startswith("*)", j):
                    depth -= 1
                    j += 2
                else:
                    j += 1
            if depth:
                kind = "annotation" if is_annot else "comment"
                raise LexError(f"unterminated {kind}", (base + start, base + n))
            if is_annot:
                interior = text[i + 3 : j - 2]
                toks.append(Token("annot", interior, (base + start, base + j)))
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], (base + i, base + j)))
            i = j
            continue
        if c == "'" and i + 1 < n and _is_ident_start(text[i + 1]):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            toks.append(Token("tyvar", text[i + 1 : j], (base + i, base + j)))
            i = j
            continue
        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = "uident" if word[0].isupper() else "ident"
            # join module-qualified lowercase names: List.mem, Array.length
            if (
                kind == "uident"
                and j < n
                and text[j] == "."
                and j + 1 < n
                and (text[j + 1].islower() or text[j + 1] == "_")
            ):
                k = j + 1
                while k < n and _is_ident_char(text[k]):
                    k += 1
                word = text[i:k]
                toks.append(Token("ident", word, (base + i, base + k)))
                i = k
                continue
            toks.append(Token(kind, word, (base + i, base + j)))
            i = j
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                toks.append(Token("op", op, (base + i, base + i + len(op))))
                i += len(op)
                break
        else:
            raise LexError(f"unexpected character {c!r}", (base + i, base + i + 1))
    toks.append(Token("eof", "", (base + n, base + n)))
    return toks
