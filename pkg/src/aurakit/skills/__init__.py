"""Skill artifacts shipped with the package."""
from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..skill.model import SkillArtifact, artifact_from_files


def _read_tree(node, prefix=""):
    files = {}
    for child in node.iterdir():
        if child.name.startswith((".", "__")):
            continue
        if child.is_dir():
            files.update(_read_tree(child, f"{prefix}{child.name}/"))
        else:
            files[prefix + child.name] = child.read_bytes()
    return files


@lru_cache(maxsize=None)
def _load() -> dict:
    out = {}
    root = resources.files(__name__)
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.is_dir() and not entry.name.startswith((".", "__")):
            art = artifact_from_files(_read_tree(entry))
            out[art.manifest.name] = art
    return out


def builtin_names() -> list[str]:
    return sorted(_load())


def builtin_skill(name: str) -> SkillArtifact:
    """The shipped artifact called ``name`` (KeyError if there is none)."""
    try:
        return _load()[name]
    except KeyError:
        raise KeyError(f"no builtin skill {name!r}") from None


def builtin_skills() -> dict[str, SkillArtifact]:
    return dict(_load())


def builtin_dir(name: str):
    """Traversable directory holding the shipped files for ``name``."""
    builtin_skill(name)
    return resources.files(__name__).joinpath(name)
