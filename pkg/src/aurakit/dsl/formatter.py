"""Canonical pretty-printer for skill programs."""
from __future__ import annotations

from .ast import (
    Assert, Binary, Branch, Call, Click, Export, Literal, Name, Read, RepeatUntil, Select,
    SetValue, Unary, WaitUntil, WidgetRef,
)

INDENT = "  "
WRAP_INDENT = "    "
MAX_LINE = 120

_PREC = {"or": 1, "and": 2, "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6}
_NOT_PREC = 3
_NEG_PREC = 7


def format_literal(lit: Literal) -> str:
    if lit.kind == "bool":
        return "true" if lit.value else "false"
    if lit.kind == "int":
        return str(int(lit.value))
    if lit.kind == "real":
        return repr(float(lit.value))
    s = str(lit.value).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{s}"'


def _prec(e) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _NOT_PREC if e.op == "not" else _NEG_PREC
    if isinstance(e, Literal) and e.kind in ("int", "real") and e.value < 0:
        # "-5" re-parses as a literal but binds like unary minus
        return _NEG_PREC
    return 8


def format_expr(e, parent_prec: int = 0) -> str:
    """Single-line rendering with the minimum parentheses needed to re-parse."""
    if isinstance(e, Literal):
        s = format_literal(e)
    elif isinstance(e, Name):
        s = e.id
    elif isinstance(e, WidgetRef):
        s = f"widget({e.id})"
    elif isinstance(e, Unary):
        if e.op == "not":
            s = "not " + format_expr(e.operand, _NOT_PREC)
        else:
            inner = format_expr(e.operand, _NEG_PREC)
            if isinstance(e.operand, Literal) and e.operand.kind in ("int", "real") or inner.startswith("-"):
                inner = f"({format_expr(e.operand)})"
            s = "-" + inner
    elif isinstance(e, Binary):
        p = _PREC[e.op]
        # left-associative: equal precedence on the right needs parentheses;
        # comparisons do not chain, so both sides need them
        lp = p + 1 if p == 4 else p
        s = f"{format_expr(e.left, lp)} {e.op} {format_expr(e.right, p + 1)}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    if _prec(e) < parent_prec:
        s = f"({s})"
    return s


def _chain(e, op):
    """Operands of a left-leaning chain of the same operator."""
    if isinstance(e, Binary) and e.op == op:
        return _chain(e.left, op) + [e.right]
    return [e]


def _wrap_expr(e, indent: str, parent_prec: int = 0) -> list[str]:
    """Multi-line rendering; first line continues the caller's line."""
    flat = format_expr(e, parent_prec)
    if len(indent) + len(flat) <= MAX_LINE:
        return [flat]
    inner = indent + WRAP_INDENT
    if isinstance(e, Binary):
        p = _PREC[e.op]
        operands = _chain(e, e.op) if p != 4 else [e.left, e.right]
        lines = ["("]
        for i, operand in enumerate(operands):
            sub_prec = (p + 1 if (i > 0 or p == 4) else p)
            sub = _wrap_expr(operand, inner, sub_prec)
            prefix = "" if i == 0 else f"{e.op} "
            lines.append(inner + prefix + sub[0])
            lines.extend(sub[1:])
        lines.append(indent + ")")
        return lines
    if isinstance(e, Unary):
        if _prec(e) < parent_prec:
            sub = _wrap_expr(e, inner, 0)
            return ["(", inner + sub[0], *sub[1:], indent + ")"]
        op = "not " if e.op == "not" else "-"
        sub = _wrap_expr(e.operand, inner, 0)
        return [op + "(", inner + sub[0], *sub[1:], indent + ")"]
    return [flat]


def _with_expr(indent: str, head: str, e, tail: str = "") -> list[str]:
    line = f"{indent}{head}{format_expr(e)}{tail}"
    if len(line) <= MAX_LINE:
        return [line]
    parts = _wrap_expr(e, indent)
    if len(parts) == 1:
        return [line]
    return [indent + head + parts[0], *parts[1:-1], parts[-1] + tail]


def _format_steps(steps, depth: int) -> list[str]:
    ind = INDENT * depth
    out: list[str] = []
    for s in steps:
        if isinstance(s, Click):
            out.append(f"{ind}click {s.widget}")
        elif isinstance(s, SetValue):
            out.extend(_with_expr(ind, f"set {s.widget} = ", s.value))
        elif isinstance(s, Select):
            out.extend(_with_expr(ind, f"select {s.widget} = ", s.value))
        elif isinstance(s, Read):
            out.append(f"{ind}read {s.widget} into {s.var}")
        elif isinstance(s, WaitUntil):
            out.extend(_with_expr(ind, "wait_until ", s.cond, f" timeout {s.timeout} poll {s.poll}"))
        elif isinstance(s, Assert):
            out.extend(_with_expr(ind, "assert ", s.cond))
        elif isinstance(s, Branch):
            out.extend(_with_expr(ind, "if ", s.cond, " {"))
            out.extend(_format_steps(s.then, depth + 1))
            if s.orelse:
                out.append(f"{ind}}} else {{")
                out.extend(_format_steps(s.orelse, depth + 1))
            out.append(f"{ind}}}")
        elif isinstance(s, RepeatUntil):
            out.extend(_with_expr(ind, "repeat until ", s.cond, f" max {s.max_iter} {{"))
            out.extend(_format_steps(s.body, depth + 1))
            out.append(f"{ind}}}")
        elif isinstance(s, Export):
            if s.path is None:
                out.append(f"{ind}export {s.dataset}")
            else:
                out.extend(_with_expr(ind, f"export {s.dataset} to ", s.path))
        elif isinstance(s, Call):
            flat = f"{ind}call {s.skill}({', '.join(format_expr(a) for a in s.args)})"
            if len(flat) <= MAX_LINE or not s.args:
                out.append(flat)
            else:
                inner = ind + WRAP_INDENT
                out.append(f"{ind}call {s.skill}(")
                for i, a in enumerate(s.args):
                    sub = _wrap_expr(a, inner)
                    comma = "," if i < len(s.args) - 1 else ""
                    out.append(inner + sub[0] + (comma if len(sub) == 1 else ""))
                    if len(sub) > 1:
                        out.extend(sub[1:-1])
                        out.append(sub[-1] + comma)
                out.append(f"{ind})")
        else:
            raise TypeError(f"not a step: {s!r}")
    return out


def format_program(program) -> str:
    """Canonical text: one step per line, two-space block indentation, LF endings."""
    steps = program.steps if hasattr(program, "steps") else program
    lines = _format_steps(steps, 0)
    return "\n".join(lines) + ("\n" if lines else "")
