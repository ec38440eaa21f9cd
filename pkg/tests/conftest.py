from __future__ import annotations

import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
sys.path.insert(0, str(HERE))


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def registry_root(tmp_path, monkeypatch) -> Path:
    root = tmp_path / "registry"
    monkeypatch.setenv("AURAKIT_REGISTRY", str(root))
    return root


@pytest.fixture
def registry(registry_root):
    from aurakit.registry import Registry
    return Registry(registry_root)


def pytest_terminal_summary(terminalreporter):
    lines = [v for reps in terminalreporter.stats.values() for r in reps
             if getattr(r, "when", None) == "call"
             for k, v in r.user_properties if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("]")[0].split("[")[1].strip().zfill(2)):
            terminalreporter.write_line(line)
