"""Static checks of a program against an instrument descriptor."""
from __future__ import annotations

from .ast import (
    Assert, Binary, Branch, Call, Click, Export, Literal, Name, Read, RepeatUntil, Select,
    SetValue, SourceSpan, Unary, WaitUntil, WidgetRef,
)
from .evaluate import NotConstant, const_value
from .lexer import Diagnostic

CLICKABLE = ("button", "toggle")
WRITABLE = ("numeric_field", "text_field", "toggle")
SELECTABLE = ("dropdown",)

_NO_SPAN = SourceSpan(1, 1, 1)
_NUMERIC = ("int", "real")


def _span(node):
    return getattr(node, "span", None) or _NO_SPAN


def param_types(params) -> dict:
    """Map parameter name to value type from ParamSpecs or a plain mapping."""
    if params is None:
        return {}
    if isinstance(params, dict):
        return dict(params)
    out = {}
    for p in params:
        out[p.name] = "text" if p.value_type == "choice" else p.value_type
    return out


def widget_value_type(spec) -> str | None:
    return spec.value_type


class _Checker:
    def __init__(self, descriptor, params, resolver):
        self.desc = descriptor
        self.params = param_types(params)
        self.resolver = resolver
        self.diags: list[Diagnostic] = []

    def error(self, node, code, message):
        self.diags.append(Diagnostic("error", _span(node), code, message))

    def warn(self, node, code, message):
        self.diags.append(Diagnostic("warning", _span(node), code, message))

    def widget(self, node, wid):
        spec = self.desc.widgets.get(wid)
        if spec is None:
            self.error(node, "unknown-widget", f"unknown widget {wid!r} for model {self.desc.model!r}")
        return spec

    # -- expressions
    def type_of(self, e, env) -> str:
        if isinstance(e, Literal):
            return e.kind
        if isinstance(e, Name):
            if e.id in env:
                return env[e.id]
            if e.id in self.params:
                return self.params[e.id]
            self.error(e, "undefined-variable", f"{e.id!r} is not a parameter and is not read on every path before use")
            return "any"
        if isinstance(e, WidgetRef):
            spec = self.widget(e, e.id)
            if spec is None:
                return "any"
            if spec.value_type is None:
                self.error(e, "not-readable", f"widget {e.id!r} ({spec.kind}) has no value")
                return "any"
            return spec.value_type
        if isinstance(e, Unary):
            t = self.type_of(e.operand, env)
            if e.op == "not":
                if t not in ("bool", "any"):
                    self.error(e, "type-mismatch", f"'not' needs a bool operand, got {t}")
                return "bool"
            if t not in (*_NUMERIC, "any"):
                self.error(e, "type-mismatch", f"unary '-' needs a number, got {t}")
            return t
        if isinstance(e, Binary):
            lt = self.type_of(e.left, env)
            rt = self.type_of(e.right, env)
            op = e.op
            if op in ("and", "or"):
                for t in (lt, rt):
                    if t not in ("bool", "any"):
                        self.error(e, "type-mismatch", f"'{op}' needs bool operands, got {t}")
                return "bool"
            if op in ("==", "!="):
                if "any" not in (lt, rt) and not (lt == rt or (lt in _NUMERIC and rt in _NUMERIC)):
                    self.error(e, "type-mismatch", f"cannot compare {lt} with {rt}")
                return "bool"
            if op in ("<", "<=", ">", ">="):
                for t in (lt, rt):
                    if t not in (*_NUMERIC, "any"):
                        self.error(e, "type-mismatch", f"ordering comparison needs numbers, got {t}")
                return "bool"
            if op == "/":
                try:
                    if const_value(e.right) == 0:
                        self.error(e.right, "div-by-zero", "division by zero")
                except NotConstant:
                    pass
            if op == "+" and lt == "text" and rt == "text":
                return "text"
            for t in (lt, rt):
                if t not in (*_NUMERIC, "any"):
                    self.error(e, "type-mismatch", f"arithmetic '{op}' needs numbers, got {t}")
            if "any" in (lt, rt):
                return "any"
            if op == "/" or "real" in (lt, rt):
                return "real"
            return "int"
        return "any"

    def cond(self, e, env, what):
        t = self.type_of(e, env)
        if t not in ("bool", "any"):
            self.error(e, "type-mismatch", f"{what} must be a bool condition, got {t}")

    # -- steps; returns the variable environment after the block
    def block(self, steps, env):
        for s in steps:
            env = self.step(s, env)
        return env

    def step(self, s, env):
        if isinstance(s, Click):
            spec = self.widget(s, s.widget)
            if spec is not None and spec.kind not in CLICKABLE:
                self.error(s, "not-clickable", f"widget {s.widget!r} ({spec.kind}) cannot be clicked")
        elif isinstance(s, SetValue):
            t = self.type_of(s.value, env)
            spec = self.widget(s, s.widget)
            if spec is not None:
                if spec.kind not in WRITABLE:
                    self.error(s, "not-writable", f"widget {s.widget!r} ({spec.kind}) is not writable")
                else:
                    self._value_fits(s, spec, t)
        elif isinstance(s, Select):
            t = self.type_of(s.value, env)
            spec = self.widget(s, s.widget)
            if spec is not None:
                if spec.kind not in SELECTABLE:
                    self.error(s, "not-selectable", f"widget {s.widget!r} ({spec.kind}) is not a dropdown")
                else:
                    if t not in ("text", "any"):
                        self.error(s, "type-mismatch", f"option must be text, got {t}")
                    try:
                        v = const_value(s.value)
                        if v not in spec.options:
                            self.error(s.value, "invalid-option", f"{v!r} is not an option of {s.widget!r}")
                    except NotConstant:
                        pass
        elif isinstance(s, Read):
            spec = self.widget(s, s.widget)
            t = "any"
            if spec is not None:
                if spec.value_type is None:
                    self.error(s, "not-readable", f"widget {s.widget!r} ({spec.kind}) has no value")
                else:
                    t = spec.value_type
            if s.var in self.params:
                self.error(s, "shadowed-parameter", f"read target {s.var!r} shadows a parameter")
            env = {**env, s.var: t}
        elif isinstance(s, WaitUntil):
            self.cond(s.cond, env, "wait_until")
            if s.poll < 1:
                self.error(s, "bad-duration", "poll interval must be at least 1 ms")
            elif s.timeout < s.poll:
                self.error(s, "bad-duration", "poll interval exceeds timeout")
        elif isinstance(s, Assert):
            self.cond(s.cond, env, "assert")
        elif isinstance(s, Branch):
            self.cond(s.cond, env, "if")
            a = self.block(s.then, env)
            b = self.block(s.orelse, env)
            env = {k: (a[k] if a[k] == b[k] else "any") for k in a.keys() & b.keys()}
        elif isinstance(s, RepeatUntil):
            if s.max_iter < 1:
                self.error(s, "bad-bound", "repeat max must be at least 1")
            env = self.block(s.body, env)
            self.cond(s.cond, env, "repeat until")
            try:
                if const_value(s.cond) is False:
                    self.warn(s, "constant-condition", "loop exit condition is always false; the loop always runs max times")
            except NotConstant:
                pass
        elif isinstance(s, Export):
            if s.dataset not in self.desc.datasets:
                self.error(s, "unknown-dataset", f"model {self.desc.model!r} exports no dataset {s.dataset!r}")
            if s.path is not None:
                t = self.type_of(s.path, env)
                if t not in ("text", "any"):
                    self.error(s.path, "type-mismatch", f"export path must be text, got {t}")
        elif isinstance(s, Call):
            for a in s.args:
                self.type_of(a, env)
            if self.resolver is not None:
                try:
                    callee = self.resolver(s.skill)
                except Exception as exc:  # resolver errors become diagnostics
                    self.error(s, "unknown-skill", f"cannot resolve skill {s.skill!r}: {exc}")
                else:
                    n = len(callee.manifest.parameters)
                    if len(s.args) > n:
                        self.error(s, "arity", f"{s.skill!r} takes at most {n} arguments, got {len(s.args)}")
        return env

    def _value_fits(self, s, spec, t):
        want = spec.value_type
        ok = t == "any" or t == want or (want == "real" and t == "int")
        if not ok:
            self.error(s.value, "type-mismatch", f"widget {s.widget!r} expects {want}, got {t}")
            return
        if spec.range is not None:
            try:
                v = const_value(s.value)
            except NotConstant:
                return
            lo, hi = spec.range
            if not lo <= v <= hi:
                self.error(s.value, "out-of-range", f"{v!r} outside [{lo}, {hi}] for {s.widget!r}")


def check_program(program, descriptor, params=None, resolver=None) -> list[Diagnostic]:
    """Diagnostics for ``program`` against ``descriptor``; empty means clean.

    ``params`` gives the declared parameters (ParamSpecs or name -> type).
    """
    c = _Checker(descriptor, params, resolver)
    steps = program.steps if hasattr(program, "steps") else program
    c.block(steps, {})
    return c.diags


def undefined_reads(program, params=()) -> list[Name]:
    """Names used before they are defined on some path (definedness only)."""
    params = set(params)
    bad: list[Name] = []

    def names(e):
        from .ast import iter_exprs
        return [n for n in iter_exprs(e) if isinstance(n, Name)]

    def block(steps, defined):
        for s in steps:
            defined = step(s, defined)
        return defined

    def use(e, defined):
        for n in names(e):
            if n.id not in defined and n.id not in params:
                bad.append(n)

    def step(s, defined):
        from .ast import step_exprs
        if isinstance(s, RepeatUntil):
            out = block(s.body, defined)
            use(s.cond, out)
            return out
        for e in step_exprs(s):
            use(e, defined)
        if isinstance(s, Read):
            return defined | {s.var}
        if isinstance(s, Branch):
            return block(s.then, defined) & block(s.orelse, defined)
        return defined

    block(program.steps if hasattr(program, "steps") else program, frozenset())
    return bad
