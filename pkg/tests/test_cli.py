from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from aurakit import __version__
from aurakit.cli import main
from aurakit.skills import builtin_dir

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    return code, json.loads(out)


def test_sim_list(capsys):
    code, out, _ = run(capsys, "sim", "list")
    assert code == 0
    assert out.split() == ["microct", "sem-eds", "uvvis"]


def test_sim_describe(capsys):
    code, out, _ = run(capsys, "sim", "describe", "uvvis")
    assert code == 0 and "wavelength_start" in out
    code, doc = run_json(capsys, "sim", "describe", "sem-eds")
    assert code == 0 and doc["model"] == "sem-eds"


def test_run_twice_prints_same_digest(capsys):
    argv = ["run", "uvvis-acquire@1.0.0", "--param", "wavelength_start=300", "--sim", "uvvis", "--seed", "42"]
    digests = []
    for _ in range(2):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        (line,) = [x for x in out.splitlines() if x.startswith("trace digest")]
        digests.append(line.split()[-1])
    assert digests[0] == digests[1] and len(digests[0]) == 64
    code, doc = run_json(capsys, *argv)
    assert doc["trace_digest"] == digests[0] and doc["status"] == "success"
    code, doc = run_json(capsys, *argv[:-1], "43")
    assert doc["trace_digest"] != digests[0]


def test_run_writes_only_inside_workdir(capsys, tmp_path):
    wd = tmp_path / "wd"
    code, doc = run_json(capsys, "run", "uvvis-acquire", "--workdir", str(wd))
    assert code == 0
    written = sorted(p.relative_to(wd).as_posix() for p in wd.rglob("*") if p.is_file())
    assert any(w.startswith("traces/") for w in written)
    assert all(any(w.startswith(e) for w in written) for e in doc["exports"])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["wd"]


def test_run_failure_is_domain_error(capsys):
    code, doc = run_json(capsys, "run", "uvvis-acquire", "--limits", "max_steps=2")
    assert code == 1 and doc["status"] != "success" and doc["error"]["cause"]


def test_eds_convert_csv(capsys, tmp_path):
    comp = tmp_path / "comp.csv"
    comp.write_text("element,wt%,atomic_mass\nCu,50,63.546\nAl,50,26.982\n")
    out = tmp_path / "at.csv"
    code, _, _ = run(capsys, "analyze", "eds_convert", "--in", str(comp), "--to", "atomic", "--out", str(out))
    assert code == 0
    rows = {r["element"]: float(r["at%"]) for r in csv.DictReader(out.open())}
    assert rows["Cu"] == pytest.approx(29.80, abs=0.01)
    assert rows["Al"] == pytest.approx(70.20, abs=0.01)


def test_analyze_type2_skill(capsys, tmp_path):
    code, _, _ = run(capsys, "run", "sem-eds-acquire", "--workdir", str(tmp_path))
    assert code == 0
    (spec,) = [p for p in tmp_path.rglob("*.csv")]
    code, doc = run_json(capsys, "analyze", "eds-snr", "--in", f"spectrum={spec}")
    assert code == 0 and doc["snr"] > 0


def test_record_and_abstract(capsys, tmp_path):
    traces = []
    for f in sorted((FIX / "demos" / "uvvis_two").glob("*.csv")):
        out = tmp_path / f"{f.stem}.trace"
        code, doc = run_json(capsys, "record", "--sim", "uvvis", "--seed", "3", "--feed", str(f), "--out", str(out))
        assert code == 0 and out.is_file() and doc["steps"] > 0
        traces.append(str(out))
    skill = tmp_path / "skill"
    code, doc = run_json(capsys, "abstract", *traces, "--out", str(skill), "--name", "uvvis-scan")
    assert code == 0 and (skill / "skill.json").is_file()
    assert [p["name"] for p in doc["parameters"]] == ["wavelength_start"]
    code, doc = run_json(capsys, "run", str(skill), "--seed", "3", "--param", "wavelength_start=350")
    assert code == 0 and doc["status"] == "success"


def test_record_bad_feed(capsys, tmp_path):
    feed = tmp_path / "feed.csv"
    feed.write_text("0,click,tab_settings,\n0,click,tab_settings,\n")
    code, _, err = run(capsys, "record", "--sim", "uvvis", "--feed", str(feed), "--out", str(tmp_path / "x"))
    assert code == 1 and "FeedError" in err


def test_registry_commands(capsys, tmp_path, registry_root):
    arch = tmp_path / "snr.zip"
    code, doc = run_json(capsys, "registry", "pack", str(builtin_dir("eds-snr")), "--out", str(arch))
    assert code == 0 and arch.stat().st_size == doc["bytes"]
    code, again = run_json(capsys, "registry", "pack", str(builtin_dir("eds-snr")), "--out", str(tmp_path / "b.zip"))
    assert (tmp_path / "b.zip").read_bytes() == arch.read_bytes()
    code, doc = run_json(capsys, "registry", "import", str(arch))
    assert code == 0 and doc["name"] == "eds-snr"
    code, doc = run_json(capsys, "registry", "list")
    assert [e["name"] for e in doc["entries"]] == ["eds-snr"]
    code, doc = run_json(capsys, "registry", "resolve", "eds-snr", "^1.0.0")
    assert doc["version"] == "1.0.0"
    code, doc = run_json(capsys, "registry", "audit")
    assert code == 0 and doc["ok"]
    code, _, err = run(capsys, "registry", "resolve", "eds-snr", "^2.0.0")
    assert code == 1 and err


def test_registry_flag_overrides_env(capsys, tmp_path, registry_root):
    other = tmp_path / "other"
    code, doc = run_json(capsys, "registry", "list", "--registry", str(other))
    assert code == 0 and doc["root"] == str(other)


def test_corrupt_archive_is_domain_error(capsys, tmp_path, registry_root):
    bad = tmp_path / "bad.zip"
    bad.write_bytes(b"PK not really")
    code, _, err = run(capsys, "registry", "import", str(bad))
    assert code == 1 and err


def test_workflow_run(capsys, tmp_path):
    code, doc = run_json(capsys, "workflow", "run", str(FIX / "workflows" / "adaptive_eds.json"),
                         "--workdir", str(tmp_path))
    assert code == 0 and doc["status"] == "success"
    assert (tmp_path / "report.json").is_file()


def test_workflow_gate_exhausted_exit_code(capsys, tmp_path):
    d = json.loads((FIX / "workflows" / "adaptive_eds.json").read_text())
    d["stages"][1]["gate"].update(threshold=1e9, max_retries=1)
    spec = tmp_path / "wf.json"
    spec.write_text(json.dumps(d))
    code, out, err = run(capsys, "--json", "workflow", "run", str(spec), "--workdir", str(tmp_path / "wd"))
    assert code == 1 and json.loads(out)["status"] == "gate_exhausted" and "gate_exhausted" in err


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["run"],
    ["run", "uvvis-acquire", "--param", "no-equals-sign"],
    ["run", "uvvis-acquire", "--limits", "max_widgets=3"],
    ["sim", "describe"],
    ["registry", "pack"],
    ["sim", "list", "--bogus"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err and out == ""


@pytest.mark.parametrize("argv", [
    ["run", "no-such-skill"],
    ["run", "uvvis-acquire", "--param", "wavelength_start=5"],
    ["run", "uvvis-acquire", "--sim", "microct"],
    ["sim", "describe", "xrd"],
])
def test_domain_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.strip() == __version__


def test_console_script_entry_point():
    p = subprocess.run([sys.executable, "-m", "aurakit.cli", "--json", "sim", "list"],
                       capture_output=True, text=True, check=False)
    assert p.returncode == 0 and json.loads(p.stdout)["models"] == ["microct", "sem-eds", "uvvis"]
