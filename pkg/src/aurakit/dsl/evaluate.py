"""Expression evaluation shared by the checker (constant folding) and the runtime."""
from __future__ import annotations

from .ast import Binary, Literal, Name, Unary, WidgetRef


class EvalError(Exception):
    pass


class NotConstant(Exception):
    pass


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def apply_binary(op, a, b):
    if op == "and":
        return bool(a) and bool(b)
    if op == "or":
        return bool(a) or bool(b)
    if op == "+":
        if isinstance(a, str) and isinstance(b, str):
            return a + b
        if _num(a) and _num(b):
            return a + b
        raise EvalError(f"cannot add {a!r} and {b!r}")
    if op in ("-", "*", "/"):
        if not (_num(a) and _num(b)):
            raise EvalError(f"arithmetic on non-numbers {a!r} {op} {b!r}")
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if b == 0:
            raise EvalError("division by zero")
        return a / b
    if op == "==":
        return a == b and (_num(a) == _num(b)) and isinstance(a, bool) == isinstance(b, bool)
    if op == "!=":
        return not apply_binary("==", a, b)
    if not (_num(a) and _num(b)):
        raise EvalError(f"ordering comparison on non-numbers {a!r} {op} {b!r}")
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def evaluate(expr, env, widget=None):
    """Evaluate ``expr``.

    ``env`` maps names to values; ``widget`` is a callable returning the current
    value of a widget id (None disables widget access).
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Name):
        try:
            return env[expr.id]
        except KeyError:
            raise EvalError(f"undefined name {expr.id!r}") from None
    if isinstance(expr, WidgetRef):
        if widget is None:
            raise NotConstant(expr.id)
        return widget(expr.id)
    if isinstance(expr, Unary):
        v = evaluate(expr.operand, env, widget)
        if expr.op == "not":
            return not bool(v)
        if not _num(v):
            raise EvalError(f"cannot negate {v!r}")
        return -v
    if isinstance(expr, Binary):
        a = evaluate(expr.left, env, widget)
        if expr.op == "and" and not a:
            return False
        if expr.op == "or" and a:
            return True
        return apply_binary(expr.op, a, evaluate(expr.right, env, widget))
    raise EvalError(f"not an expression: {expr!r}")


def const_value(expr):
    """Value of ``expr`` if it has no names or widget reads; raises NotConstant."""

    class _NoEnv(dict):
        def __missing__(self, key):
            raise NotConstant(key)

    try:
        return evaluate(expr, _NoEnv(), None)
    except EvalError as exc:
        raise NotConstant(str(exc)) from None
