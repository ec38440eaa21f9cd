"""Recursive-descent parser producing :mod:`aurakit.dsl.ast` programs."""
from __future__ import annotations

from .ast import (
    Assert, Binary, Branch, Call, Click, Export, Literal, Name, Program, Read, RepeatUntil,
    Select, SetValue, SourceSpan, Unary, WaitUntil, WidgetRef,
)
from .lexer import Diagnostic, DslSyntaxError, Token, tokenize

STEP_KEYWORDS = ("click", "set", "select", "read", "wait_until", "assert", "if", "repeat", "export", "call")


def _describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "newline":
        return "end of line"
    if tok.kind == "text":
        return "text literal"
    return repr(tok.value)


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0

    # -- token plumbing
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def fail(self, message, tok=None, code="unexpected-token"):
        tok = tok or self.tok
        raise DslSyntaxError([Diagnostic("error", tok.span, code, message)])

    def is_op(self, value) -> bool:
        return self.tok.kind == "op" and self.tok.value == value

    def is_kw(self, value) -> bool:
        return self.tok.kind == "keyword" and self.tok.value == value

    def expect_op(self, value) -> Token:
        if not self.is_op(value):
            self.fail(f"expected {value!r}, found {_describe(self.tok)}")
        return self.advance()

    def expect_kw(self, value) -> Token:
        if not self.is_kw(value):
            self.fail(f"expected {value!r}, found {_describe(self.tok)}")
        return self.advance()

    def expect_ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}, found {_describe(self.tok)}", code="missing-operand")
        return self.advance()

    def expect_int(self, what) -> int:
        if self.tok.kind != "int":
            self.fail(f"expected integer {what}, found {_describe(self.tok)}")
        return self.advance().value

    def end_of_line(self):
        if self.tok.kind == "newline":
            self.advance()
        elif self.tok.kind != "eof" and not self.is_op("}"):
            self.fail(f"expected end of line, found {_describe(self.tok)}")

    def skip_newlines(self):
        while self.tok.kind == "newline":
            self.advance()

    # -- program structure
    def program(self) -> Program:
        steps = self.block(top=True)
        return Program(tuple(steps))

    def block(self, top=False):
        steps = []
        while True:
            self.skip_newlines()
            if self.tok.kind == "eof":
                if not top:
                    self.fail("unterminated block: expected '}'", code="unexpected-token")
                return steps
            if self.is_op("}"):
                if top:
                    self.fail("unmatched '}'")
                return steps
            steps.append(self.step())

    def braced_block(self):
        self.expect_op("{")
        if self.tok.kind != "newline":
            self.fail(f"expected end of line after '{{', found {_describe(self.tok)}")
        body = self.block()
        self.expect_op("}")
        return tuple(body)

    def step(self):
        t = self.tok
        if t.kind == "ident" or (t.kind == "keyword" and t.value not in STEP_KEYWORDS):
            self.fail(f"unknown step keyword {t.value!r}", code="unknown-step")
        if t.kind != "keyword":
            self.fail(f"expected a step, found {_describe(t)}", code="unknown-step")
        kw = self.advance().value
        span = t.span
        if kw == "click":
            w = self.expect_ident("widget id")
            step = Click(w.value, span)
        elif kw in ("set", "select"):
            w = self.expect_ident("widget id")
            self.expect_op("=")
            value = self.expr()
            step = (SetValue if kw == "set" else Select)(w.value, value, span)
        elif kw == "read":
            w = self.expect_ident("widget id")
            self.expect_kw("into")
            v = self.expect_ident("variable name")
            step = Read(w.value, v.value, span)
        elif kw == "wait_until":
            cond = self.expr()
            self.expect_kw("timeout")
            timeout = self.expect_int("timeout")
            self.expect_kw("poll")
            poll = self.expect_int("poll interval")
            step = WaitUntil(cond, timeout, poll, span)
        elif kw == "assert":
            step = Assert(self.expr(), span)
        elif kw == "if":
            cond = self.expr()
            then = self.braced_block()
            orelse = ()
            if self.is_kw("else"):
                self.advance()
                orelse = self.braced_block()
            step = Branch(cond, then, orelse, span)
        elif kw == "repeat":
            self.expect_kw("until")
            cond = self.expr()
            self.expect_kw("max")
            n = self.expect_int("iteration bound")
            body = self.braced_block()
            step = RepeatUntil(cond, body, n, span)
        elif kw == "export":
            d = self.expect_ident("dataset id")
            path = None
            if self.is_kw("to"):
                self.advance()
                path = self.expr()
            step = Export(d.value, path, span)
        else:  # call
            name = self.expect_ident("skill name")
            self.expect_op("(")
            args = []
            if not self.is_op(")"):
                args.append(self.expr())
                while self.is_op(","):
                    self.advance()
                    args.append(self.expr())
            self.expect_op(")")
            step = Call(name.value, tuple(args), span)
        self.end_of_line()
        return step

    # -- expressions, lowest precedence first
    def expr(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.is_kw("or"):
            t = self.advance()
            left = Binary("or", left, self.and_expr(), t.span)
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.is_kw("and"):
            t = self.advance()
            left = Binary("and", left, self.not_expr(), t.span)
        return left

    def not_expr(self):
        if self.is_kw("not"):
            t = self.advance()
            return Unary("not", self.not_expr(), t.span)
        return self.comparison()

    def comparison(self):
        left = self.additive()
        if self.tok.kind == "op" and self.tok.value in ("==", "!=", "<", "<=", ">", ">="):
            t = self.advance()
            left = Binary(t.value, left, self.additive(), t.span)
            if self.tok.kind == "op" and self.tok.value in ("==", "!=", "<", "<=", ">", ">="):
                self.fail("chained comparisons are not allowed; use 'and'", code="chained-comparison")
        return left

    def additive(self):
        left = self.term()
        while self.tok.kind == "op" and self.tok.value in ("+", "-"):
            t = self.advance()
            left = Binary(t.value, left, self.term(), t.span)
        return left

    def term(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.value in ("*", "/"):
            t = self.advance()
            left = Binary(t.value, left, self.unary(), t.span)
        return left

    def unary(self):
        if self.is_op("-"):
            t = self.advance()
            # a minus directly before a number literal is part of the literal
            if self.tok.kind in ("int", "real"):
                lit = self.advance()
                return Literal(lit.kind, -lit.value, SourceSpan(t.span.line, t.span.column,
                                                                lit.span.column + lit.span.length - t.span.column
                                                                if lit.span.line == t.span.line else 1))
            return Unary("-", self.unary(), t.span)
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind in ("int", "real", "text"):
            self.advance()
            return Literal(t.kind, t.value, t.span)
        if t.kind == "keyword" and t.value in ("true", "false"):
            self.advance()
            return Literal("bool", t.value == "true", t.span)
        if t.kind == "keyword" and t.value == "widget":
            self.advance()
            self.expect_op("(")
            w = self.expect_ident("widget id")
            self.expect_op(")")
            return WidgetRef(w.value, t.span)
        if t.kind == "ident":
            self.advance()
            return Name(t.value, t.span)
        if self.is_op("("):
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        self.fail(f"expected an expression, found {_describe(t)}", code="missing-operand")


def parse_program(text: str) -> Program:
    """Parse skill-language source.

    Raises :class:`DslSyntaxError` whose diagnostics point at the first
    offending token.
    """
    return _Parser(tokenize(text)).program()


def parse_expr(text: str):
    p = _Parser(tokenize(text))
    e = p.expr()
    p.skip_newlines()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {_describe(p.tok)} after expression")
    return e
