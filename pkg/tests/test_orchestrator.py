from __future__ import annotations

import copy
import json
from pathlib import Path

import pytest

from aurakit.orchestrator import (GateExhausted, InvalidWorkflow, ResolutionError, StageError, WorkflowSpec,
                                  load_workflow, read_report, run_workflow)
from aurakit.sim import create_sim

WF = Path(__file__).parent / "fixtures" / "workflows"
LOW_SEED, HIGH_SEED = 106, 276


def adaptive(seed=LOW_SEED, **gate):
    d = json.loads((WF / "adaptive_eds.json").read_text())
    d["simulators"]["sem"]["seed"] = seed
    d["stages"][1]["gate"].update(gate)
    return d


def assert_files_consistent(workdir: Path, report):
    for rel in report.files:
        assert (workdir / rel).is_file()
    assert not list(workdir.rglob("*.tmp"))
    on_disk = read_report(workdir / "report.json")
    assert on_disk["status"] == report.status
    for stage in report.stages:
        for a in stage.attempts:
            for rel in [a.trace, a.outputs_file, *a.exports]:
                if rel:
                    assert rel in report.files


def test_single_stage_uvvis(tmp_path):
    rep = run_workflow(load_workflow(WF / "uvvis_single.json"), workdir=tmp_path)
    assert rep.status == "success"
    (stage,) = rep.stages
    (attempt,) = stage.attempts
    assert attempt.trace and len(attempt.exports) == 1
    assert attempt.exports[0].endswith(".csv") or attempt.exports[0].endswith(".json")
    assert_files_consistent(tmp_path, rep)


def test_acquire_then_analyze(tmp_path):
    d = json.loads((WF / "uvvis_single.json").read_text())
    d["stages"].append({"id": "fit", "skill": "uvvis-peak-fit", "args": {"lo": 300.0, "hi": 500.0},
                        "inputs": {"spectrum": {"stage": "scan"}}})
    rep = run_workflow(d, workdir=tmp_path)
    fit = rep.stage("fit").attempts[0]
    assert rep.status == "success" and fit.outputs_file
    out = json.loads((tmp_path / fit.outputs_file).read_text())
    assert set(out) == {"fits", "baseline"}
    assert_files_consistent(tmp_path, rep)


def test_adaptive_eds_low_count_seed(tmp_path):
    rep = run_workflow(adaptive(LOW_SEED), workdir=tmp_path)
    q = rep.stage("quality")
    assert rep.status == "success"
    assert 1 <= q.retries <= 5 and q.gate_values[-1] >= 10
    assert all(b >= a for a, b in zip(q.gate_values, q.gate_values[1:]))
    dwells = [a.arguments["dwell"] for a in rep.stage("acquire").attempts]
    assert dwells == [500 * 2 ** k for k in range(len(dwells))]
    assert_files_consistent(tmp_path, rep)


def test_adaptive_eds_high_count_seed(tmp_path):
    rep = run_workflow(adaptive(HIGH_SEED), workdir=tmp_path)
    q = rep.stage("quality")
    assert rep.status == "success" and q.retries == 0 and q.gate_values[0] >= 10


def test_resume_accumulates_counts(tmp_path):
    """With resume the live simulator keeps counting; without it each retry starts over."""
    rep = run_workflow(adaptive(LOW_SEED), workdir=tmp_path / "a")
    fresh = adaptive(LOW_SEED)
    fresh["stages"][0]["resume"] = False
    rep2 = run_workflow(fresh, workdir=tmp_path / "b")
    a = rep.stage("quality").gate_values
    b = rep2.stage("quality").gate_values
    assert a[0] == b[0]
    assert len(a) <= len(b)


def test_gate_exhausted(tmp_path):
    with pytest.raises(GateExhausted) as ei:
        run_workflow(adaptive(LOW_SEED, threshold=1e9, max_retries=2), workdir=tmp_path)
    rep = ei.value.report
    assert rep.status == "gate_exhausted" and rep.stage("quality").retries == 2
    assert len(rep.stage("acquire").attempts) == 3
    assert read_report(tmp_path / "report.json")["status"] == "gate_exhausted"
    assert_files_consistent(tmp_path, rep)


def test_gate_abort(tmp_path):
    d = adaptive(LOW_SEED, threshold=1e9, on_fail="abort")
    d["stages"][1]["gate"]["on_fail"] = "abort"
    rep = run_workflow(d, workdir=tmp_path)
    assert rep.status == "aborted" and rep.stage("quality").retries == 0


def test_resolution_error(tmp_path):
    d = adaptive()
    d["stages"][1]["skill"] = "eds-snr@^7.0.0"
    with pytest.raises(ResolutionError):
        run_workflow(d, workdir=tmp_path)
    d["stages"][1]["skill"] = "nonexistent"
    with pytest.raises(ResolutionError):
        run_workflow(d, workdir=tmp_path)


def test_stage_error_carries_report(tmp_path):
    d = adaptive()
    d["params"]["dwell"] = 10          # below the skill's declared range
    with pytest.raises(StageError) as ei:
        run_workflow(d, workdir=tmp_path)
    assert ei.value.report.status == "error"


def test_invalid_workflows():
    base = adaptive()
    bad = copy.deepcopy(base)
    bad["stages"][0]["inputs"] = {"x": {"stage": "quality"}}
    with pytest.raises(InvalidWorkflow):
        WorkflowSpec.from_dict(bad)
    bad = copy.deepcopy(base)
    bad["stages"][1]["gate"]["max_retries"] = -1
    with pytest.raises(InvalidWorkflow):
        WorkflowSpec.from_dict(bad)
    bad = copy.deepcopy(base)
    bad["stages"][1]["sim"] = "sem"
    with pytest.raises(InvalidWorkflow):
        run_workflow(bad, workdir="/tmp/unused-wf")
    bad = copy.deepcopy(base)
    del bad["stages"][0]["sim"]
    with pytest.raises(InvalidWorkflow):
        run_workflow(bad, workdir="/tmp/unused-wf")
    with pytest.raises(InvalidWorkflow):
        WorkflowSpec.from_dict({"stages": [{"id": "a"}]})


def test_report_digest_reproducible(tmp_path):
    a = run_workflow(adaptive(), workdir=tmp_path / "a")
    b = run_workflow(adaptive(), workdir=tmp_path / "b")
    assert a.digest == b.digest


def test_custom_sim_factory(tmp_path):
    made = []

    def factory(model, seed):
        made.append((model, seed))
        return create_sim(model, seed)

    run_workflow(adaptive(HIGH_SEED), sim_factory=factory, workdir=tmp_path)
    assert made == [("sem-eds", HIGH_SEED)]
