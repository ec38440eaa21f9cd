"""Pack a skill, install it in a scratch registry and resolve versions.

Run: python3 demos/registry_round_trip.py [workdir]
"""
from __future__ import annotations

import dataclasses
import sys
import tempfile
from pathlib import Path

from aurakit.registry import Registry, pack
from aurakit.registry.errors import DigestMismatch, VersionConflict
from aurakit.registry.archive import unpack
from aurakit.skill.model import SkillArtifact, save_artifact
from aurakit.skills import builtin_skill


def versioned(root: Path, version: str, description: str | None = None) -> Path:
    """A copy of the shipped sem-vent skill under a new version number."""
    base = builtin_skill("sem-vent")
    m = dataclasses.replace(base.manifest, version=version,
                            description=description or base.manifest.description)
    return save_artifact(SkillArtifact(m, base.body, base.aux), root / f"sem-vent-{version}{'-alt' if description else ''}")


def main(tmp: Path) -> None:
    reg = Registry(tmp / "registry")

    src = versioned(tmp, "1.9.0")
    archive = pack(src)
    print(f"packed sem-vent 1.9.0: {len(archive)} bytes, identical on repack: {pack(src) == archive}")

    broken = bytearray(archive)
    broken[archive.index(b"click")] ^= 1
    try:
        unpack(bytes(broken))
    except DigestMismatch as exc:
        print(f"a flipped byte is rejected: {exc}")

    for v in ("1.9.0", "1.10.0", "2.0.0"):
        e = reg.import_artifact(versioned(tmp, v))
        print(f"installed {e.name}@{e.version} ({e.digest[:12]})")
    try:
        reg.import_artifact(versioned(tmp, "1.9.0", "same version, other content"))
    except VersionConflict as exc:
        print(f"re-publishing 1.9.0 with other content is refused: {exc}")

    for req in ("^1.0.0", ">=1.0.0 <1.10.0", "*"):
        print(f"resolve sem-vent {req!r} -> {reg.resolve('sem-vent', req).version}")
    print(f"audit issues: {reg.audit() or 'none'}")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="aurakit-registry-")))
