"""Execution traces: ordered events, terminal status and a content digest."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .._canon import canonical_json, sha256_hex

STATUS_SUCCESS = "success"
STATUS_ERROR = "error"
ERROR_CAUSES = ("Timeout", "AssertionFailed", "SimError", "LimitExceeded", "EvalError", "CallError", "ExportError")


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    step: str                 # dotted path of the step in the program, e.g. "3" or "2.then.0"
    kind: str                 # step kind (click, set, wait_until, ...)
    detail: Mapping[str, Any]  # action issued or condition evaluated
    pre: str                  # snapshot digest before
    post: str                 # snapshot digest after
    clock: int                # simulated clock after the event
    bindings: Mapping[str, Any] = field(default_factory=dict)
    exports: tuple = ()

    def to_dict(self) -> dict:
        d = {"seq": self.seq, "step": self.step, "kind": self.kind, "detail": dict(self.detail),
             "pre": self.pre, "post": self.post, "clock": self.clock}
        if self.bindings:
            d["bindings"] = dict(self.bindings)
        if self.exports:
            d["exports"] = list(self.exports)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "TraceEvent":
        return cls(d["seq"], d["step"], d["kind"], d.get("detail", {}), d["pre"], d["post"], d["clock"],
                   d.get("bindings", {}), tuple(d.get("exports", ())))


@dataclass(frozen=True)
class ExecutionTrace:
    skill: str
    version: str
    artifact_digest: str
    model: str
    seed: int
    arguments: Mapping[str, Any]
    events: tuple
    status: str
    error: Optional[Mapping[str, Any]] = None   # {"step", "cause", "message"} when status == error
    start_clock: int = 0
    end_clock: int = 0
    terminal_digest: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_SUCCESS

    @property
    def total_time(self) -> int:
        return self.end_clock - self.start_clock

    @property
    def exports(self) -> list[str]:
        return [p for e in self.events for p in e.exports]

    def header(self) -> dict:
        return {"skill": self.skill, "version": self.version, "artifact_digest": self.artifact_digest,
                "model": self.model, "seed": self.seed, "arguments": dict(self.arguments),
                "start_clock": self.start_clock}

    def footer(self) -> dict:
        d = {"status": self.status, "end_clock": self.end_clock, "total_time": self.total_time,
             "terminal_digest": self.terminal_digest}
        if self.error is not None:
            d["error"] = dict(self.error)
        return d

    def to_dict(self) -> dict:
        return {"header": self.header(), "events": [e.to_dict() for e in self.events], "footer": self.footer()}

    def to_jsonl(self) -> str:
        lines = [canonical_json({"header": self.header()})]
        lines += [canonical_json({"event": e.to_dict()}) for e in self.events]
        lines.append(canonical_json({"footer": self.footer()}))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "ExecutionTrace":
        header, footer, events = None, None, []
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            if "header" in rec:
                header = rec["header"]
            elif "event" in rec:
                events.append(TraceEvent.from_dict(rec["event"]))
            elif "footer" in rec:
                footer = rec["footer"]
        if header is None or footer is None:
            raise ValueError("trace log needs a header and a footer line")
        return cls(header["skill"], header["version"], header["artifact_digest"], header["model"], header["seed"],
                   header.get("arguments", {}), tuple(events), footer["status"], footer.get("error"),
                   header.get("start_clock", 0), footer["end_clock"], footer.get("terminal_digest", ""))


def trace_digest(trace: ExecutionTrace) -> str:
    return sha256_hex(canonical_json(trace.to_dict()))
