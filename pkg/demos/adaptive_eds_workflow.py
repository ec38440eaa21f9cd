"""Closed-loop EDS acquisition: keep doubling the dwell time until SNR >= 10.

Run: python3 demos/adaptive_eds_workflow.py [workdir]
"""
from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

from aurakit.orchestrator import run_workflow

SPEC = Path(__file__).parent / "workflows" / "adaptive_eds.json"


def main(workdir: Path) -> None:
    spec = json.loads(SPEC.read_text())
    for seed in (106, 276):
        spec["simulators"]["sem"]["seed"] = seed
        report = run_workflow(spec, workdir=workdir / f"seed-{seed}")
        q = report.stage("quality")
        dwells = [a.arguments["dwell"] for a in report.stage("acquire").attempts]
        print(f"seed {seed}: {report.status} after {q.retries} retries")
        print(f"  dwell per attempt (ms): {dwells}")
        print(f"  SNR per attempt:        {[round(v, 2) for v in q.gate_values]}")
        print(f"  report: {workdir / f'seed-{seed}' / 'report.json'} (digest {report.digest[:12]})")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="aurakit-eds-")))
