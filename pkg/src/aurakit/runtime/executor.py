"""Run bound Type-1 programs against a simulator, recording every step."""
from __future__ import annotations

import posixpath
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

from .._canon import canonical_json, sha256_hex
from ..dsl import format_expr
from ..dsl.ast import (Assert, Branch, Call, Click, Export, Read, RepeatUntil, Select, SetValue, WaitUntil,
                       step_kind)
from ..dsl.evaluate import EvalError, evaluate
from ..sim import base as simbase
from ..sim.io import extension, write_dataset
from ..skill.model import MAX_CALL_DEPTH, BindError, BoundProgram, bind_parameters
from .trace import STATUS_ERROR, STATUS_SUCCESS, ExecutionTrace, TraceEvent


@dataclass(frozen=True)
class ExecutionLimits:
    max_time_ms: int = 24 * 3600 * 1000
    max_steps: int = 100_000
    max_iter: Optional[int] = None   # caps every RepeatUntil when set

    def __post_init__(self):
        if self.max_time_ms <= 0 or self.max_steps <= 0 or (self.max_iter is not None and self.max_iter <= 0):
            raise ValueError("execution limits must be positive")


class _Abort(Exception):
    def __init__(self, step: str, cause: str, message: str):
        super().__init__(message)
        self.step, self.cause, self.message = step, cause, message


def _value_text(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and v != v:
        return "nan"
    return v


def export_relpath(skill: str, clock: int, dataset_id: str, payload_kind: str) -> str:
    """Default export location relative to the workdir."""
    return f"{skill}/{clock}_{dataset_id}.{extension(payload_kind)}"


class _Runner:
    def __init__(self, sim, limits: ExecutionLimits, workdir, resolver, skill_name: str):
        self.sim = sim
        self.limits = limits
        self.workdir = Path(workdir) if workdir is not None else None
        self.resolver = resolver
        self.skill_name = skill_name
        self.events: list[TraceEvent] = []
        self.start = sim.clock
        self.datasets: dict[str, Any] = {}

    # -- helpers
    def digest(self) -> str:
        return self.sim.observe().digest()

    def widget_value(self, wid):
        snap = self.sim.observe()
        if wid not in snap.widgets:
            raise EvalError(f"unknown widget {wid!r}")
        return snap.widgets[wid].value

    def eval(self, expr, env, path):
        try:
            return evaluate(expr, env, self.widget_value)
        except EvalError as exc:
            raise _Abort(path, "EvalError", str(exc)) from None

    def emit(self, path, kind, detail, pre, bindings=None, exports=()):
        if len(self.events) >= self.limits.max_steps:
            raise _Abort(path, "LimitExceeded", f"step limit {self.limits.max_steps} reached")
        self.events.append(TraceEvent(len(self.events), path, kind, {k: _jsonable(v) for k, v in detail.items()},
                                      pre, self.digest(), self.sim.clock, dict(bindings or {}), tuple(exports)))

    def check_time(self, path):
        if self.sim.clock - self.start > self.limits.max_time_ms:
            raise _Abort(path, "LimitExceeded", f"simulated time limit {self.limits.max_time_ms} ms exceeded")

    def act(self, action, path):
        try:
            self.sim.apply_action(action)
        except simbase.SimError as exc:
            raise _Abort(path, "SimError", f"{type(exc).__name__}: {exc}") from None

    # -- steps
    def run_block(self, steps, env, prefix, depth):
        for i, s in enumerate(steps):
            env = self.run_step(s, env, f"{prefix}{i}", depth)
        return env

    def run_step(self, s, env, path, depth):
        kind = step_kind(s)
        pre = self.digest()
        spec = self.sim.descriptor.widgets.get(getattr(s, "widget", None) or "")
        if isinstance(s, Click):
            if spec is not None and spec.kind == "toggle":
                action = simbase.Toggle(s.widget)
            else:
                action = simbase.Click(s.widget)
            self.act(action, path)
            self.emit(path, kind, simbase.action_to_dict(action), pre)
        elif isinstance(s, SetValue):
            value = self.eval(s.value, env, path)
            if spec is not None and spec.kind == "toggle":
                current = self.sim.observe().widgets[s.widget].value
                if bool(current) != bool(value):
                    action = simbase.Toggle(s.widget)
                    self.act(action, path)
                    self.emit(path, kind, simbase.action_to_dict(action), pre)
                else:
                    self.emit(path, kind, {"action": "none", "widget": s.widget, "value": bool(value)}, pre)
            else:
                action = simbase.TypeText(s.widget, _value_text(value))
                self.act(action, path)
                self.emit(path, kind, simbase.action_to_dict(action), pre)
        elif isinstance(s, Select):
            value = self.eval(s.value, env, path)
            action = simbase.SelectOption(s.widget, _value_text(value))
            self.act(action, path)
            self.emit(path, kind, simbase.action_to_dict(action), pre)
        elif isinstance(s, Read):
            try:
                value = self.widget_value(s.widget)
            except EvalError as exc:
                raise _Abort(path, "EvalError", str(exc)) from None
            env = {**env, s.var: value}
            self.emit(path, kind, {"widget": s.widget, "var": s.var}, pre, bindings={s.var: _jsonable(value)})
        elif isinstance(s, WaitUntil):
            self.run_wait(s, env, path, pre)
        elif isinstance(s, Assert):
            ok = bool(self.eval(s.cond, env, path))
            self.emit(path, kind, {"cond": format_expr(s.cond), "result": ok}, pre)
            if not ok:
                raise _Abort(path, "AssertionFailed", f"assertion failed: {format_expr(s.cond)}")
        elif isinstance(s, Branch):
            taken = bool(self.eval(s.cond, env, path))
            self.emit(path, kind, {"cond": format_expr(s.cond), "branch": "then" if taken else "else"}, pre)
            if taken:
                env = self.run_block(s.then, env, f"{path}.then.", depth)
            else:
                env = self.run_block(s.orelse, env, f"{path}.else.", depth)
        elif isinstance(s, RepeatUntil):
            cap = s.max_iter if self.limits.max_iter is None else min(s.max_iter, self.limits.max_iter)
            for it in range(1, cap + 1):
                env = self.run_block(s.body, env, f"{path}.body.", depth)
                pre = self.digest()
                done = bool(self.eval(s.cond, env, path))
                self.emit(path, kind, {"cond": format_expr(s.cond), "iteration": it, "result": done,
                                       "exhausted": (not done and it == cap)}, pre)
                if done:
                    break
        elif isinstance(s, Export):
            self.run_export(s, env, path, pre)
        elif isinstance(s, Call):
            env = self.run_call(s, env, path, pre, depth)
        self.check_time(path)
        return env

    def run_wait(self, s, env, path, pre):
        timeout, poll = int(s.timeout), int(s.poll)
        cond = format_expr(s.cond)
        elapsed, k = 0, 0
        while True:
            k += 1
            ok = bool(self.eval(s.cond, env, path))
            self.emit(path, "wait_until", {"cond": cond, "poll": k, "elapsed": elapsed, "result": ok}, pre)
            pre = self.events[-1].post
            if ok:
                return
            step = min(poll, timeout - elapsed)
            self.sim.advance(step)
            elapsed += step
            self.check_time(path)
            if elapsed >= timeout:
                raise _Abort(path, "Timeout", f"{cond} not satisfied within {timeout} ms")

    def run_export(self, s, env, path, pre):
        try:
            ds = self.sim.export_dataset(s.dataset)
        except simbase.SimError as exc:
            raise _Abort(path, "SimError", f"{type(exc).__name__}: {exc}") from None
        if s.path is not None:
            rel = str(self.eval(s.path, env, path))
            norm = posixpath.normpath(rel.replace("\\", "/"))
            if norm.startswith("/") or norm == ".." or norm.startswith("../"):
                raise _Abort(path, "ExportError", f"export path {rel!r} escapes the workdir")
        else:
            norm = export_relpath(self.skill_name, self.sim.clock, s.dataset, ds.payload_kind)
        if self.workdir is not None:
            write_dataset(ds, self.workdir / norm)
        self.datasets[norm] = ds
        detail = {"dataset": s.dataset, "payload_kind": ds.payload_kind,
                  "data_digest": sha256_hex(ds.data.tobytes() + canonical_json(ds.provenance).encode())}
        self.emit(path, "export", detail, pre, exports=(norm,))

    def run_call(self, s, env, path, pre, depth):
        if depth + 1 > MAX_CALL_DEPTH:
            raise _Abort(path, "LimitExceeded", f"call depth exceeds {MAX_CALL_DEPTH}")
        if self.resolver is None:
            raise _Abort(path, "CallError", f"no resolver to load skill {s.skill!r}")
        try:
            callee = self.resolver(s.skill)
        except Exception as exc:
            raise _Abort(path, "CallError", f"cannot resolve {s.skill!r}: {exc}") from None
        if callee.manifest.skill_kind != "type1":
            raise _Abort(path, "CallError",
                         f"{s.skill!r} is a {callee.manifest.skill_kind} skill; only type1 skills can be called")
        params = callee.manifest.parameters
        if len(s.args) > len(params):
            raise _Abort(path, "CallError", f"{s.skill!r} takes {len(params)} arguments")
        args = {p.name: self.eval(a, env, path) for p, a in zip(params, s.args)}
        try:
            bound = bind_parameters(callee, args)
        except BindError as exc:
            raise _Abort(path, "CallError", str(exc)) from None
        self.emit(path, "call", {"skill": callee.manifest.name, "version": callee.manifest.version,
                                 "digest": callee.digest, "arguments": bound.values}, pre)
        saved = self.skill_name
        self.skill_name = callee.manifest.name
        try:
            self.run_block(bound.body.steps, {}, f"{path}.call.", depth + 1)
        finally:
            self.skill_name = saved
        return env


def execute_skill(bound: BoundProgram, sim, limits: ExecutionLimits | None = None, workdir=None,
                  resolver: Callable | None = None) -> ExecutionTrace:
    """Execute ``bound`` on ``sim``; errors end the trace instead of raising.

    Exported datasets are written below ``workdir`` when one is given.
    """
    trace, _ = run_skill(bound, sim, limits, workdir, resolver)
    return trace


def run_skill(bound: BoundProgram, sim, limits: ExecutionLimits | None = None, workdir=None,
              resolver: Callable | None = None):
    """Like :func:`execute_skill` but also returns {relative path: Dataset} of exports."""
    if bound.manifest.skill_kind != "type1":
        raise ValueError("only type1 skills execute against a simulator")
    limits = limits or ExecutionLimits()
    runner = _Runner(sim, limits, workdir, resolver, bound.manifest.name)
    status, error = STATUS_SUCCESS, None
    try:
        runner.run_block(bound.body.steps, {}, "", 0)
    except _Abort as exc:
        status, error = STATUS_ERROR, {"step": exc.step, "cause": exc.cause, "message": exc.message}
    trace = ExecutionTrace(
        skill=bound.manifest.name, version=bound.manifest.version, artifact_digest=bound.digest,
        model=sim.model_id, seed=sim.seed, arguments=dict(bound.values), events=tuple(runner.events),
        status=status, error=error, start_clock=runner.start, end_clock=sim.clock,
        terminal_digest=runner.digest(),
    )
    return trace, runner.datasets
