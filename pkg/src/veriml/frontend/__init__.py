"""Frontend: lexer, parser and pretty printer for the surface language."""
from veriml.frontend import ast
from veriml.frontend.lexer import LexError, Token, tokenize
from veriml.frontend.parser import (
    ParseError,
    parse_annotation,
    parse_source,
    parse_tokens,
)
from veriml.frontend.printer import pretty_print

__all__ = [
    "ast",
    "LexError",
    "Token",
    "tokenize",
    "ParseError",
    "parse_annotation",
    "parse_source",
    "parse_tokens",
    "pretty_print",
]
