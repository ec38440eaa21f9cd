"""Throwaway skill directories for registry tests."""
from __future__ import annotations

import dataclasses
import zlib
from pathlib import Path

from aurakit.dsl import parse_program
from aurakit.skill.model import SkillArtifact, save_artifact
from aurakit.skills import builtin_skill


def make_skill(root: Path, version="1.0.0", name="sem-vent", note="") -> Path:
    """A copy of a builtin with a new version and, optionally, a different body."""
    base = builtin_skill(name)
    m = dataclasses.replace(base.manifest, version=version)
    body = base.body
    if note:
        body = parse_program(f"# {note}\nclick tab_chamber\n")
    d = root / f"{name}-{version}-{zlib.crc32(note.encode())}"
    save_artifact(SkillArtifact(m, body, base.aux), d)
    return d
