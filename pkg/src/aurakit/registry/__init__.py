"""Versioned local store of skill artifacts."""
from .archive import pack, pack_files, read_archive, unpack
from .errors import DigestMismatch, FetchError, NotFound, RegistryError, VersionConflict
from .store import (ENV_ROOT, AuditIssue, Registry, RegistryEntry, default_root, fetch_url,
                    load_artifact_excluding_entry)

__all__ = [
    "pack", "pack_files", "read_archive", "unpack", "DigestMismatch", "FetchError", "NotFound", "RegistryError",
    "VersionConflict", "ENV_ROOT", "AuditIssue", "Registry", "RegistryEntry", "default_root", "fetch_url",
    "load_artifact_excluding_entry", "make_resolver",
]


def make_resolver(registry: "Registry | None" = None):
    """Callable mapping ``name`` or ``name@range`` to an artifact: registry first, then builtins."""
    from ..skills import builtin_skill

    def resolve(ref: str):
        name, _, req = ref.partition("@")
        if registry is not None:
            try:
                return registry.load(registry.resolve(name, req or "*"))
            except NotFound:
                pass
        try:
            art = builtin_skill(name)
        except KeyError:
            raise NotFound(f"skill {name!r} is neither installed nor built in") from None
        if req and not _matches(art.manifest.version, req):
            raise NotFound(f"builtin {art.manifest.ref} does not satisfy {req!r}")
        return art

    return resolve


def _matches(version: str, req: str) -> bool:
    from ..semver import Requirement, SemverError
    try:
        return Requirement.parse(req).matches(version)
    except SemverError as exc:
        raise NotFound(f"bad version requirement {req!r}: {exc}") from None
