"""Record scripted demonstrations against a simulator."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from .._canon import canonical_json
from ..sim.base import GuiSnapshot, SimError, action_from_dict, action_to_dict

SAMPLE_MS = 100


class FeedError(ValueError):
    """The action feed violates its preconditions (ordering or timing)."""


@dataclass(frozen=True)
class IdleGap:
    start: int       # clock of the previous action (idle time as the operator saw it)
    end: int
    samples: tuple   # (clock, {widget: value}) changes since the previous sample

    @property
    def duration(self) -> int:
        return self.end - self.start

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "samples": [[c, dict(ch)] for c, ch in self.samples]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "IdleGap":
        return cls(d["start"], d["end"], tuple((c, ch) for c, ch in d["samples"]))


@dataclass(frozen=True)
class DemoStep:
    clock: int
    action: Any
    pre: GuiSnapshot
    post: GuiSnapshot
    gap: Optional[IdleGap] = None

    def to_dict(self) -> dict:
        return {"clock": self.clock, "action": action_to_dict(self.action), "pre": self.pre.to_dict(),
                "post": self.post.to_dict(), "gap": self.gap.to_dict() if self.gap else None}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DemoStep":
        return cls(d["clock"], action_from_dict(d["action"]), GuiSnapshot.from_dict(d["pre"]),
                   GuiSnapshot.from_dict(d["post"]), IdleGap.from_dict(d["gap"]) if d.get("gap") else None)


@dataclass(frozen=True)
class DemonstrationTrace:
    model: str
    seed: int
    initial: GuiSnapshot
    steps: tuple = ()

    def __len__(self):
        return len(self.steps)

    @property
    def terminal(self) -> GuiSnapshot:
        return self.steps[-1].post if self.steps else self.initial

    @property
    def terminal_digest(self) -> str:
        return self.terminal.digest()

    def to_jsonl(self) -> str:
        lines = [canonical_json({"model": self.model, "seed": self.seed, "initial": self.initial.to_dict()})]
        lines += [canonical_json(s.to_dict()) for s in self.steps]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "DemonstrationTrace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows:
            raise ValueError("empty demonstration file")
        head = rows[0]
        return cls(head["model"], head["seed"], GuiSnapshot.from_dict(head["initial"]),
                   tuple(DemoStep.from_dict(r) for r in rows[1:]))


def _changes(before: GuiSnapshot, after: GuiSnapshot) -> dict:
    return {k: w.value for k, w in after.widgets.items() if before.widgets[k].value != w.value}


def record_session(sim, feed) -> DemonstrationTrace:
    """Replay ``feed`` of (clock ms, action) pairs, sampling idle time every 100 ms.

    Clocks must increase strictly and leave room for the previous action's
    cost; a simulator error is re-raised with ``feed_index`` set.
    """
    feed = list(feed)
    for i in range(1, len(feed)):
        if feed[i][0] <= feed[i - 1][0]:
            raise FeedError(f"feed clocks must increase strictly (entry {i}: {feed[i][0]} after {feed[i - 1][0]})")
    initial = sim.observe()
    steps = []
    prev = sim.clock
    for i, (clock, action) in enumerate(feed):
        clock = int(clock)
        if clock < sim.clock:
            raise FeedError(f"entry {i} at {clock} ms precedes the simulator clock {sim.clock} ms")
        gap = None
        if clock > sim.clock:
            samples = []
            last = sim.observe()
            while sim.clock < clock:
                sim.advance(min(SAMPLE_MS, clock - sim.clock))
                now = sim.observe()
                ch = _changes(last, now)
                if ch:
                    samples.append((sim.clock, ch))
                last = now
            gap = IdleGap(prev, clock, tuple(samples))
        pre = sim.observe()
        try:
            sim.apply_action(action)
        except SimError as exc:
            exc.feed_index = i
            raise
        steps.append(DemoStep(clock, action, pre, sim.observe(), gap))
        prev = clock
    return DemonstrationTrace(sim.model_id, sim.seed, initial, tuple(steps))
