"""Turn two recorded UV-Vis demonstrations into a parameterized skill.

The feeds in demos/feeds differ only in the start wavelength, so abstraction
lifts that literal into a parameter.  Run: python3 demos/demonstration_to_skill.py
"""
from __future__ import annotations

from pathlib import Path

from aurakit.cli import read_feed
from aurakit.dsl import format_program
from aurakit.runtime import abstract_traces, execute_skill, record_session
from aurakit.sim import create_sim
from aurakit.skill.model import SkillArtifact, SkillManifest, bind_parameters

FEEDS = Path(__file__).parent / "feeds"
SEED = 3


def main() -> None:
    traces = []
    for feed in sorted(FEEDS.glob("*.csv")):
        t = record_session(create_sim("uvvis", SEED), read_feed(feed))
        print(f"recorded {feed.name}: {len(t.steps)} actions, terminal digest {t.terminal_digest[:12]}")
        traces.append(t)

    ab = abstract_traces(traces)
    print("\nabstracted program:")
    print(format_program(ab.program))
    for p in ab.params:
        print(f"parameter {p.name} ({p.value_type}), default {p.default!r}")

    art = SkillArtifact(SkillManifest("uvvis-scan", "0.1.0", "type1", parameters=ab.params,
                                      environment="uvvis"), ab.program)
    print("\nreplaying each demonstration through the skill:")
    for t, args in zip(traces, ab.arguments):
        tr = execute_skill(bind_parameters(art, args), create_sim("uvvis", t.seed))
        same = tr.terminal_digest == t.terminal_digest
        print(f"  {args}: {tr.status}, same terminal state as the demonstration: {same}")

    tr = execute_skill(bind_parameters(art, {"wavelength_start": 350}), create_sim("uvvis", SEED))
    print(f"  new argument wavelength_start=350: {tr.status}")


if __name__ == "__main__":
    main()
