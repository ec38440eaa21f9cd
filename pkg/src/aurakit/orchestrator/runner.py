"""Sequential execution of workflows with gated retries."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

from .._canon import canonical_json, pretty_json, sha256_hex
from ..analysis.ops import get_field, run_pipeline, to_plain
from ..errors import AurakitError
from ..registry import make_resolver
from ..runtime import ExecutionLimits, run_skill, trace_digest
from ..sim import create_sim
from ..skill.model import BindError, bind_parameters, bind_values
from .spec import (GateExhausted, InvalidWorkflow, ResolutionError, Stage, StageError, WorkflowSpec,
                   load_workflow)

REPORT_FILE = "report.json"


@dataclass
class Attempt:
    attempt: int
    arguments: dict
    status: str = "success"
    error: Optional[str] = None
    trace: Optional[str] = None           # workdir-relative trace log
    trace_digest: Optional[str] = None
    exports: list = field(default_factory=list)
    outputs_file: Optional[str] = None
    outputs: dict = field(default_factory=dict)
    gate: Optional[dict] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass
class StageReport:
    id: str
    skill: str
    version: str
    digest: str
    kind: str
    attempts: list = field(default_factory=list)
    retries: int = 0

    @property
    def gate_values(self) -> list:
        return [a.gate["value"] for a in self.attempts if a.gate]

    def to_dict(self) -> dict:
        return {"id": self.id, "skill": self.skill, "version": self.version, "digest": self.digest,
                "kind": self.kind, "retries": self.retries, "attempts": [a.to_dict() for a in self.attempts]}


@dataclass
class WorkflowReport:
    name: str
    stages: list = field(default_factory=list)
    status: str = "running"
    error: Optional[str] = None
    files: dict = field(default_factory=dict)     # workdir-relative path -> sha256

    def stage(self, stage_id: str) -> StageReport:
        for s in self.stages:
            if s.id == stage_id:
                return s
        raise KeyError(stage_id)

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "error": self.error,
                "stages": [s.to_dict() for s in self.stages], "files": dict(sorted(self.files.items()))}

    @property
    def digest(self) -> str:
        return sha256_hex(canonical_json(self.to_dict()))


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _scalar(value):
    if hasattr(value, "item") and getattr(value, "ndim", 1) == 0:
        value = value.item()
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError(f"gate metric must be a number, got {type(value).__name__}")
    return float(value)


class _Run:
    def __init__(self, spec: WorkflowSpec, registry, sim_factory, workdir: Path, limits):
        self.spec = spec
        self.resolver = make_resolver(registry)
        self.sim_factory = sim_factory or create_sim
        self.workdir = workdir
        self.limits = limits
        self.report = WorkflowReport(spec.name)
        self.artifacts: dict = {}
        self.sims: dict = {}
        self.results: dict[str, dict] = {}
        self.overrides: dict[str, dict] = {s.id: {} for s in spec.stages}

    # -- setup
    def resolve_all(self):
        for s in self.spec.stages:
            try:
                art = self.resolver(s.skill)
            except Exception as exc:
                raise ResolutionError(f"stage {s.id!r}: cannot resolve {s.skill!r}: {exc}") from None
            m = art.manifest
            if m.skill_kind == "type1":
                if s.sim is None:
                    raise InvalidWorkflow(f"stage {s.id!r}: type1 skill {m.ref} needs a simulator binding")
                model = self.spec.simulators[s.sim]["model"]
                if m.environment != model:
                    raise InvalidWorkflow(f"stage {s.id!r}: {m.ref} targets {m.environment}, simulator is {model}")
            elif s.sim is not None:
                raise InvalidWorkflow(f"stage {s.id!r}: type2 skill {m.ref} must not bind a simulator")
            self.artifacts[s.id] = art
            self.report.stages.append(StageReport(s.id, m.name, m.version, art.digest, m.skill_kind))

    def fresh_sim(self, name):
        cfg = self.spec.simulators[name]
        self.sims[name] = self.sim_factory(cfg["model"], cfg["seed"])

    # -- bindings
    def bind(self, b):
        if isinstance(b, Mapping):
            if "param" in b:
                return self.spec.params[b["param"]]
            if "stage" in b:
                out = self.results[b["stage"]]
                name = b.get("output")
                if name is None:
                    if len(out) != 1:
                        raise StageError(f"stage {b['stage']!r} has {len(out)} outputs; name one")
                    name = next(iter(out))
                return get_field(out[name], b.get("field"))
            if "const" in b:
                return b["const"]
        return b

    def arguments(self, stage: Stage) -> dict:
        args = {k: self.bind(v) for k, v in stage.args.items()}
        args.update(self.overrides[stage.id])
        return args

    # -- stages
    def run_stage(self, stage: Stage) -> Attempt:
        rep = self.report.stage(stage.id)
        art = self.artifacts[stage.id]
        n = len(rep.attempts) + 1
        tag = f"{stage.id}-{n}"
        try:
            args = self.arguments(stage)
        except (KeyError, IndexError, AttributeError, TypeError) as exc:
            raise StageError(f"stage {stage.id!r}: cannot bind arguments: {exc!r}") from None
        attempt = Attempt(n, to_plain(args))
        rep.attempts.append(attempt)
        if art.manifest.skill_kind == "type1":
            self.run_type1(stage, art, args, attempt, tag)
        else:
            self.run_type2(stage, art, args, attempt, tag)
        return attempt

    def run_type1(self, stage, art, args, attempt, tag):
        try:
            bound = bind_parameters(art, args)
        except BindError as exc:
            attempt.status, attempt.error = "error", str(exc)
            raise StageError(f"stage {stage.id!r}: {exc}") from None
        if stage.sim not in self.sims:
            self.fresh_sim(stage.sim)
        attempt.arguments = to_plain(dict(bound.values))
        datadir = Path("data") / tag
        trace, datasets = run_skill(bound, self.sims[stage.sim], self.limits, self.workdir / datadir, self.resolver)
        trace_rel = (Path("traces") / f"{tag}.jsonl").as_posix()
        _atomic_write(self.workdir / trace_rel, trace.to_jsonl())
        attempt.trace, attempt.trace_digest = trace_rel, trace_digest(trace)
        attempt.exports = [(datadir / p).as_posix() for p in datasets]
        if not trace.ok:
            attempt.status = "error"
            attempt.error = f"{trace.error['cause']} at step {trace.error['step']}: {trace.error['message']}"
            raise StageError(f"stage {stage.id!r}: {attempt.error}")
        outputs, files = {}, {}
        for o in art.manifest.outputs:
            match = [(p, ds) for p, ds in datasets.items() if ds.payload_kind == o.payload_kind]
            if not match:
                attempt.status, attempt.error = "error", f"no exported {o.payload_kind} for output {o.name!r}"
                raise StageError(f"stage {stage.id!r}: {attempt.error}")
            path, outputs[o.name] = match[-1]
            files[o.name] = {"payload_kind": o.payload_kind, "file": (datadir / path).as_posix()}
        self.results[stage.id] = outputs
        attempt.outputs = files

    def run_type2(self, stage, art, args, attempt, tag):
        try:
            values = bind_values(art.manifest, args)
            inputs = {k: self.bind(v) for k, v in stage.inputs.items()}
            outputs = run_pipeline(art.body, inputs, values)
        except (AurakitError, KeyError, TypeError, ValueError) as exc:
            attempt.status, attempt.error = "error", f"{type(exc).__name__}: {exc}"
            raise StageError(f"stage {stage.id!r}: {attempt.error}") from None
        attempt.arguments = to_plain(values)
        self.results[stage.id] = outputs
        rel = (Path("outputs") / f"{tag}.json").as_posix()
        plain = to_plain(outputs, array_limit=4096)
        _atomic_write(self.workdir / rel, pretty_json(plain))
        attempt.outputs_file = rel
        attempt.outputs = to_plain(outputs, array_limit=16)

    def gate_value(self, stage: Stage):
        g = stage.gate
        src = g.metric.get("stage", stage.id)
        out = self.results[src]
        name = g.metric.get("output") or next(iter(out))
        return _scalar(get_field(out[name], g.metric.get("field")))

    # -- main loop
    def run(self):
        stages = self.spec.stages
        i = 0
        while i < len(stages):
            stage = stages[i]
            attempt = self.run_stage(stage)
            g = stage.gate
            if g is None:
                i += 1
                continue
            try:
                value = self.gate_value(stage)
            except (KeyError, TypeError, AttributeError, IndexError) as exc:
                raise StageError(f"stage {stage.id!r}: gate metric unavailable: {exc}") from None
            passed = g.passes(value)
            attempt.gate = {"value": value, "comparator": g.comparator, "threshold": g.threshold, "passed": passed}
            if passed:
                i += 1
                continue
            rep = self.report.stage(stage.id)
            if g.on_fail == "abort":
                self.report.status = "aborted"
                self.report.error = f"gate on {stage.id!r} failed: {value} {g.comparator} {g.threshold} is false"
                return
            if rep.retries >= g.max_retries:
                raise GateExhausted(f"gate on {stage.id!r} still failing after {rep.retries} retries "
                                    f"(last value {value:g}, needs {g.comparator} {g.threshold:g})")
            rep.retries += 1
            adj = g.adjustment
            target_id = adj.stage or stage.id
            target = stages[self.spec.stage_index(target_id)]
            trep = self.report.stage(target_id)
            current = trep.attempts[-1].arguments.get(adj.param) if trep.attempts else None
            if current is None:
                raise StageError(f"stage {target_id!r} has no argument {adj.param!r} to adjust")
            self.overrides[target_id][adj.param] = adj.apply(current)
            if target.sim is not None and not target.resume:
                self.fresh_sim(target.sim)
            i = self.spec.stage_index(target_id)
        self.report.status = "success"


def _inventory(workdir: Path) -> dict:
    out = {}
    for p in sorted(workdir.rglob("*")):
        rel = p.relative_to(workdir).as_posix()
        if p.is_file() and rel != REPORT_FILE and not p.name.startswith("."):
            out[rel] = sha256_hex(p.read_bytes())
    return out


def run_workflow(spec, registry=None, sim_factory: Callable | None = None, workdir=".",
                 limits: ExecutionLimits | None = None) -> WorkflowReport:
    """Run ``spec`` stage by stage, writing traces, data and ``report.json`` under ``workdir``.

    Raises ResolutionError before any stage runs, StageError when a stage
    fails, and GateExhausted when retries run out; the latter two carry the
    partial report (also written to disk) as ``exc.report``.
    """
    if isinstance(spec, (str, os.PathLike)):
        spec = load_workflow(spec)
    elif isinstance(spec, Mapping):
        spec = WorkflowSpec.from_dict(spec)
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    run = _Run(spec, registry, sim_factory, workdir, limits)
    run.resolve_all()
    failure = None
    try:
        run.run()
    except (StageError, GateExhausted) as exc:
        run.report.status = "gate_exhausted" if isinstance(exc, GateExhausted) else "error"
        run.report.error = str(exc)
        failure = exc
    run.report.files = _inventory(workdir)
    _atomic_write(workdir / REPORT_FILE, pretty_json(run.report.to_dict()))
    if failure is not None:
        failure.report = run.report
        raise failure
    return run.report


def read_report(path) -> dict:
    return json.loads(Path(path).read_text("utf-8"))
