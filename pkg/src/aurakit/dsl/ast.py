"""Syntax tree for Type-1 skill programs.

Nodes are frozen dataclasses.  Source spans are carried for diagnostics but
excluded from equality, so a parsed program compares equal to a hand-built or
re-parsed one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError(f"invalid span {self}")


def _span():
    return field(default=None, compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    kind: str  # int | real | text | bool
    value: object
    span: Optional[SourceSpan] = _span()

    @classmethod
    def of(cls, value) -> "Literal":
        if isinstance(value, bool):
            return cls("bool", value)
        if isinstance(value, int):
            return cls("int", value)
        if isinstance(value, float):
            return cls("real", value)
        if isinstance(value, str):
            return cls("text", value)
        raise TypeError(f"no literal form for {value!r}")


@dataclass(frozen=True)
class Name:
    id: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class WidgetRef:
    id: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: "Expr"
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[SourceSpan] = _span()


Expr = Union[Literal, Name, WidgetRef, Unary, Binary]

ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or")


# -- steps -------------------------------------------------------------------

@dataclass(frozen=True)
class Click:
    widget: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SetValue:
    widget: str
    value: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Select:
    widget: str
    value: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Read:
    widget: str
    var: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class WaitUntil:
    cond: Expr
    timeout: int
    poll: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Branch:
    cond: Expr
    then: tuple
    orelse: tuple = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class RepeatUntil:
    cond: Expr
    body: tuple
    max_iter: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Export:
    dataset: str
    path: Optional[Expr] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Call:
    skill: str
    args: tuple = ()
    span: Optional[SourceSpan] = _span()


Step = Union[Click, SetValue, Select, Read, WaitUntil, Assert, Branch, RepeatUntil, Export, Call]

STEP_KINDS = {
    Click: "click", SetValue: "set", Select: "select", Read: "read", WaitUntil: "wait_until",
    Assert: "assert", Branch: "if", RepeatUntil: "repeat", Export: "export", Call: "call",
}


def step_kind(step) -> str:
    return STEP_KINDS[type(step)]


@dataclass(frozen=True)
class Program:
    steps: tuple = ()

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)


# -- traversal helpers ---------------------------------------------------------

def map_expr(expr, fn):
    """Bottom-up rebuild of ``expr``; ``fn`` may return a replacement node or None."""
    if isinstance(expr, Unary):
        expr = Unary(expr.op, map_expr(expr.operand, fn), expr.span)
    elif isinstance(expr, Binary):
        expr = Binary(expr.op, map_expr(expr.left, fn), map_expr(expr.right, fn), expr.span)
    out = fn(expr)
    return expr if out is None else out


def map_step_exprs(step, fn):
    """Apply :func:`map_expr` to every expression inside ``step`` (recursively)."""
    m = lambda e: map_expr(e, fn) if e is not None else None  # noqa: E731
    blk = lambda steps: tuple(map_step_exprs(s, fn) for s in steps)  # noqa: E731
    if isinstance(step, SetValue):
        return SetValue(step.widget, m(step.value), step.span)
    if isinstance(step, Select):
        return Select(step.widget, m(step.value), step.span)
    if isinstance(step, WaitUntil):
        return WaitUntil(m(step.cond), step.timeout, step.poll, step.span)
    if isinstance(step, Assert):
        return Assert(m(step.cond), step.span)
    if isinstance(step, Branch):
        return Branch(m(step.cond), blk(step.then), blk(step.orelse), step.span)
    if isinstance(step, RepeatUntil):
        return RepeatUntil(m(step.cond), blk(step.body), step.max_iter, step.span)
    if isinstance(step, Export):
        return Export(step.dataset, m(step.path), step.span)
    if isinstance(step, Call):
        return Call(step.skill, tuple(m(a) for a in step.args), step.span)
    return step


def iter_exprs(expr):
    yield expr
    if isinstance(expr, Unary):
        yield from iter_exprs(expr.operand)
    elif isinstance(expr, Binary):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)


def step_exprs(step):
    """Expressions directly owned by ``step`` (not those of nested blocks)."""
    if isinstance(step, (SetValue, Select)):
        return [step.value]
    if isinstance(step, (WaitUntil, Assert, Branch, RepeatUntil)):
        return [step.cond]
    if isinstance(step, Export):
        return [step.path] if step.path is not None else []
    if isinstance(step, Call):
        return list(step.args)
    return []


def walk_steps(steps):
    for s in steps:
        yield s
        if isinstance(s, Branch):
            yield from walk_steps(s.then)
            yield from walk_steps(s.orelse)
        elif isinstance(s, RepeatUntil):
            yield from walk_steps(s.body)


def strip_spans(node):
    """Return an equal node with every span cleared (useful for serialization)."""
    from dataclasses import fields, replace, is_dataclass

    if isinstance(node, tuple):
        return tuple(strip_spans(n) for n in node)
    if not is_dataclass(node) or isinstance(node, SourceSpan):
        return node
    changes = {}
    for f in fields(node):
        v = getattr(node, f.name)
        if f.name == "span":
            changes["span"] = None
        elif is_dataclass(v) or isinstance(v, tuple):
            changes[f.name] = strip_spans(v)
    return replace(node, **changes)
