"""Acquire a UV-Vis spectrum with a shipped skill, then fit its peaks.

Run: python3 demos/uvvis_acquire_and_fit.py [workdir]
"""
from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from aurakit.analysis.ops import run_pipeline
from aurakit.runtime import run_skill, trace_digest
from aurakit.sim import create_sim
from aurakit.skill.model import bind_parameters, bind_values
from aurakit.skills import builtin_skill


def main(workdir: Path) -> None:
    acquire = builtin_skill("uvvis-acquire")
    bound = bind_parameters(acquire, {"wavelength_start": 400, "wavelength_end": 700, "step_nm": 1.0})
    print(f"running {acquire.manifest.ref} with {dict(bound.values)}")

    trace, exports = run_skill(bound, create_sim("uvvis", 42), workdir=workdir)
    print(f"  {trace.status} after {trace.total_time} simulated ms, {len(trace.events)} trace events")
    print(f"  trace digest {trace_digest(trace)[:16]}...")
    (path, spectrum), = exports.items()
    print(f"  exported {path} ({spectrum.data.size} points)")

    # the same seed and arguments always give the same trace
    again = run_skill(bound, create_sim("uvvis", 42))[0]
    print(f"  replay digest matches: {trace_digest(again) == trace_digest(trace)}")

    fit = builtin_skill("uvvis-peak-fit")
    # a broad band needs a stiffer baseline than the default or the baseline absorbs its wings
    values = bind_values(fit.manifest, {"lo": 400.0, "hi": 700.0, "lam": 1e7})
    out = run_pipeline(fit.body, {"spectrum": spectrum}, values)
    print(f"\nfitting with {fit.manifest.ref}")
    for f in out["fits"]:
        print(f"  peak at {f.center:.2f} nm, sigma {f.sigma:.2f} nm, amplitude {f.amplitude:.4f}")
    truth = spectrum.provenance.get("truth", {})
    if truth:
        print(f"  simulator ground truth: {truth}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="aurakit-uvvis-")))
