"""Tokenizer for the skill language."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import SourceSpan

KEYWORDS = frozenset({
    "click", "set", "select", "read", "into", "wait_until", "timeout", "poll", "assert",
    "if", "else", "repeat", "until", "max", "export", "to", "call", "widget",
    "true", "false", "and", "or", "not",
})

MAX_TEXT_LITERAL = 100
MAX_IDENT = 64

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z][A-Za-z0-9_]*)*")
_NUMBER = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")
_OPS = ("==", "!=", "<=", ">=", "->", "<", ">", "+", "-", "*", "/", "=", "(", ")", "{", "}", ",")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | int | real | text | op | newline | eof
    value: object
    span: SourceSpan


@dataclass
class Diagnostic:
    severity: str  # error | warning
    span: SourceSpan
    code: str
    message: str

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.column}: {self.severity}[{self.code}]: {self.message}"


class DslSyntaxError(Exception):
    """Raised by the lexer/parser; carries one or more diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.format() for d in self.diagnostics))


def _error(line, col, length, code, message):
    return DslSyntaxError([Diagnostic("error", SourceSpan(line, col, max(1, length)), code, message)])


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens.

    Newlines are significant except inside parentheses, which lets long
    expressions wrap over several lines.
    """
    text = text.replace("\r\n", "\n")
    tokens: list[Token] = []
    depth = 0
    lines = text.split("\n")
    for lineno, line in enumerate(lines, start=1):
        col = 0
        n = len(line)
        while col < n:
            ch = line[col]
            if ch in " \t":
                col += 1
                continue
            if ch == "#":
                break
            start = col + 1
            if ch == '"':
                buf = []
                col += 1
                while True:
                    if col >= n:
                        raise _error(lineno, start, n - start + 1, "unterminated-string", "unterminated string literal")
                    c = line[col]
                    if c == "\\":
                        if col + 1 >= n or line[col + 1] not in _ESCAPES:
                            raise _error(lineno, col + 1, 2 if col + 1 < n else 1, "bad-escape", "invalid escape sequence")
                        buf.append(_ESCAPES[line[col + 1]])
                        col += 2
                        continue
                    if c == '"':
                        col += 1
                        break
                    buf.append(c)
                    col += 1
                value = "".join(buf)
                if len(value) > MAX_TEXT_LITERAL:
                    raise _error(lineno, start, col - start + 1, "literal-too-long",
                                 f"text literal longer than {MAX_TEXT_LITERAL} characters")
                tokens.append(Token("text", value, SourceSpan(lineno, start, col - start + 1)))
                continue
            if "0" <= ch <= "9":
                m = _NUMBER.match(line, col)
                lit = m.group(0)
                end = m.end()
                if end < n and (line[end].isalpha() or line[end] == "_"):
                    raise _error(lineno, start, end - start + 2, "bad-number", f"malformed number {line[col:end + 1]!r}")
                if re.fullmatch(r"\d+", lit):
                    tokens.append(Token("int", int(lit), SourceSpan(lineno, start, len(lit))))
                else:
                    tokens.append(Token("real", float(lit), SourceSpan(lineno, start, len(lit))))
                col = end
                continue
            m = _IDENT.match(line, col)
            if m:
                word = m.group(0)
                if len(word) > MAX_IDENT:
                    raise _error(lineno, start, len(word), "literal-too-long", f"identifier longer than {MAX_IDENT} characters")
                kind = "keyword" if word in KEYWORDS else "ident"
                tokens.append(Token(kind, word, SourceSpan(lineno, start, len(word))))
                col = m.end()
                continue
            for op in _OPS:
                if line.startswith(op, col):
                    tokens.append(Token("op", op, SourceSpan(lineno, start, len(op))))
                    if op == "(":
                        depth += 1
                    elif op == ")":
                        depth = max(0, depth - 1)
                    col += len(op)
                    break
            else:
                raise _error(lineno, start, 1, "bad-char", f"unexpected character {ch!r}")
        if depth == 0 and lineno < len(lines):
            tokens.append(Token("newline", "\n", SourceSpan(lineno, n + 1, 1)))
    last = len(lines)
    last_col = max(1, len(lines[-1]))
    tokens.append(Token("eof", None, SourceSpan(last, last_col, 1)))
    return tokens
