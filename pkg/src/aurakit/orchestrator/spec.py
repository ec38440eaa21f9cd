"""Workflow descriptions: ordered stages, data bindings and quality gates."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from ..errors import AurakitError

COMPARATORS = {
    ">=": lambda a, b: a >= b, ">": lambda a, b: a > b, "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b, "==": lambda a, b: a == b, "!=": lambda a, b: a != b,
}


class WorkflowError(AurakitError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class InvalidWorkflow(WorkflowError):
    pass


class ResolutionError(WorkflowError):
    pass


class StageError(WorkflowError):
    pass


class GateExhausted(WorkflowError):
    pass


@dataclass(frozen=True)
class Adjustment:
    param: str
    stage: Optional[str] = None          # stage whose argument is adjusted; default: the gated stage
    multiplier: Optional[float] = None
    increment: Optional[float] = None

    def apply(self, value):
        out = value * self.multiplier if self.multiplier is not None else value + self.increment
        if isinstance(value, int) and not isinstance(value, bool) and float(out).is_integer():
            return int(out)
        return out


@dataclass(frozen=True)
class Gate:
    metric: Mapping[str, Any]            # {"output": name, "field": dotted path?, "stage": id?}
    comparator: str
    threshold: float
    on_fail: str                         # "retry" | "abort"
    adjustment: Optional[Adjustment] = None
    max_retries: int = 0

    def passes(self, value) -> bool:
        return bool(COMPARATORS[self.comparator](value, self.threshold))


@dataclass(frozen=True)
class Stage:
    id: str
    skill: str                           # "name" or "name@requirement"
    args: Mapping[str, Any] = field(default_factory=dict)
    inputs: Mapping[str, Any] = field(default_factory=dict)
    sim: Optional[str] = None
    resume: bool = False
    gate: Optional[Gate] = None

    @property
    def skill_name(self) -> str:
        return self.skill.partition("@")[0]

    @property
    def requirement(self) -> str:
        return self.skill.partition("@")[2] or "*"


@dataclass(frozen=True)
class WorkflowSpec:
    name: str
    stages: tuple
    params: Mapping[str, Any] = field(default_factory=dict)
    simulators: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)

    def stage_index(self, stage_id: str) -> int:
        for i, s in enumerate(self.stages):
            if s.id == stage_id:
                return i
        raise KeyError(stage_id)

    @classmethod
    def from_dict(cls, d: Mapping) -> "WorkflowSpec":
        try:
            spec = cls._from_dict(d)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidWorkflow(f"malformed workflow: {exc!r}") from None
        problems = spec.problems()
        if problems:
            raise InvalidWorkflow("; ".join(problems))
        return spec

    @classmethod
    def _from_dict(cls, d: Mapping) -> "WorkflowSpec":
        stages = []
        for s in d["stages"]:
            gate = None
            if s.get("gate"):
                g = s["gate"]
                on_fail = g.get("on_fail", "abort")
                adjustment, action = None, "abort"
                if isinstance(on_fail, Mapping):
                    r = on_fail.get("retry_with_adjustment")
                    if r is None:
                        raise ValueError("on_fail object must hold retry_with_adjustment")
                    adjustment = Adjustment(r["param"], r.get("stage"), r.get("multiplier"), r.get("increment"))
                    action = "retry"
                elif on_fail != "abort":
                    raise ValueError(f"unknown on_fail {on_fail!r}")
                metric = g["metric"] if isinstance(g["metric"], Mapping) else {"output": g["metric"]}
                gate = Gate(dict(metric), g.get("comparator", ">="), float(g["threshold"]), action, adjustment,
                            int(g.get("max_retries", 0)))
            stages.append(Stage(s["id"], s["skill"], dict(s.get("args", {})), dict(s.get("inputs", {})),
                                s.get("sim"), bool(s.get("resume", False)), gate))
        sims = {}
        for k, v in dict(d.get("simulators", {})).items():
            sims[k] = {"model": v["model"], "seed": int(v.get("seed", 0))}
        return cls(d.get("name", "workflow"), tuple(stages), dict(d.get("params", {})), sims)

    def problems(self) -> list[str]:
        out, seen = [], []
        for s in self.stages:
            if s.id in seen:
                out.append(f"duplicate stage id {s.id!r}")
            for where, bindings in (("args", s.args), ("inputs", s.inputs)):
                for k, b in bindings.items():
                    ref = b.get("stage") if isinstance(b, Mapping) else None
                    if ref is not None and ref not in seen:
                        out.append(f"stage {s.id!r} {where}.{k} refers to {ref!r}, which is not an earlier stage")
                    if isinstance(b, Mapping) and "param" in b and b["param"] not in self.params:
                        out.append(f"stage {s.id!r} {where}.{k} uses unknown workflow param {b['param']!r}")
            if s.sim is not None and s.sim not in self.simulators:
                out.append(f"stage {s.id!r} binds unknown simulator {s.sim!r}")
            g = s.gate
            if g is not None:
                if g.comparator not in COMPARATORS:
                    out.append(f"stage {s.id!r}: unknown comparator {g.comparator!r}")
                if g.max_retries < 0:
                    out.append(f"stage {s.id!r}: max_retries must be >= 0")
                mstage = g.metric.get("stage")
                if mstage is not None and mstage not in seen + [s.id]:
                    out.append(f"stage {s.id!r}: gate metric refers to {mstage!r}, which is not this or an earlier stage")
                if g.adjustment is not None:
                    a = g.adjustment
                    if (a.multiplier is None) == (a.increment is None):
                        out.append(f"stage {s.id!r}: adjustment needs exactly one of multiplier/increment")
                    if a.stage is not None and a.stage not in seen + [s.id]:
                        out.append(f"stage {s.id!r}: adjustment targets {a.stage!r}, which is not this or an earlier stage")
            seen.append(s.id)
        return out


def load_workflow(path) -> WorkflowSpec:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise InvalidWorkflow(f"cannot read workflow {path}: {exc}") from None
    return WorkflowSpec.from_dict(doc)
