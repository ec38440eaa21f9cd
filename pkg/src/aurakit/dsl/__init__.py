"""The Type-1 skill language: lexer, parser, formatter and checker."""
from .ast import *  # noqa: F401,F403
from .ast import Program, SourceSpan
from .checker import check_program, undefined_reads
from .formatter import format_expr, format_program
from .lexer import Diagnostic, DslSyntaxError, tokenize
from .parser import parse_expr, parse_program

__all__ = [
    "Program", "SourceSpan", "Diagnostic", "DslSyntaxError", "tokenize", "parse_program",
    "parse_expr", "format_program", "format_expr", "check_program", "undefined_reads",
]
