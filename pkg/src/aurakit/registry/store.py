"""On-disk skill registry: `<root>/<name>/<version>/` plus a `registry.json` index."""
from __future__ import annotations

import json
import os
import shutil
import tempfile
import time
import urllib.error
import urllib.request
import uuid
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from filelock import FileLock

from ..semver import Requirement, SemverError, Version, best_match
from ..skill.model import InvalidArtifact, SkillArtifact, artifact_from_files
from .archive import pack, read_source_files, unpack
from .errors import DigestMismatch, FetchError, NotFound, VersionConflict

INDEX_FILE = "registry.json"
ENTRY_FILE = "entry.json"
STAGING_DIR = ".staging"
ENV_ROOT = "AURAKIT_REGISTRY"

FETCH_ATTEMPTS = 3        # first try plus two retries
FETCH_BACKOFF_S = 1.0
FETCH_TOTAL_S = 30.0


def default_root() -> Path:
    env = os.environ.get(ENV_ROOT)
    if env:
        return Path(env)
    return Path.home() / ".aurakit" / "registry"


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    version: str
    skill_kind: str
    digest: str
    path: str
    source: str
    imported_at: str

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "RegistryEntry":
        return cls(d["name"], d["version"], d["skill_kind"], d["digest"], d.get("path", ""),
                   d.get("source", ""), d.get("imported_at", ""))


@dataclass(frozen=True)
class AuditIssue:
    name: str
    version: str
    message: str

    def __str__(self):
        return f"{self.name}@{self.version}: {self.message}"


def fetch_url(url: str, attempts: int = FETCH_ATTEMPTS, backoff: float = FETCH_BACKOFF_S,
              total: float = FETCH_TOTAL_S) -> bytes:
    """GET ``url`` with retries; proxies come from the standard environment variables."""
    deadline = time.monotonic() + total
    last = None
    for attempt in range(attempts):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            break
        try:
            with urllib.request.urlopen(url, timeout=remaining) as resp:
                status = getattr(resp, "status", 200)
                if status is not None and not 200 <= status < 300:
                    raise FetchError(f"{url}: HTTP {status}")
                return resp.read()
        except urllib.error.HTTPError as exc:
            last = f"HTTP {exc.code}"
        except (urllib.error.URLError, OSError, ValueError, FetchError) as exc:
            last = str(getattr(exc, "reason", exc))
        if attempt + 1 < attempts:
            time.sleep(min(backoff, max(0.0, deadline - time.monotonic())))
    raise FetchError(f"could not fetch {url}: {last or 'timed out'}")


def _is_url(source: str) -> bool:
    return "://" in source and not Path(source).exists()


class Registry:
    """A versioned store of skill artifacts.

    Writers hold an exclusive lock on the index; installs are staged in a
    scratch directory and renamed into place, so a crash never leaves a
    half-written version behind.
    """

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_root()
        self._lock = FileLock(str(self.root / (INDEX_FILE + ".lock")))

    # -- index
    @property
    def index_path(self) -> Path:
        return self.root / INDEX_FILE

    def _scan(self) -> list[RegistryEntry]:
        out = []
        for entry_file in sorted(self.root.glob(f"*/*/{ENTRY_FILE}")):
            if entry_file.parts[-3].startswith("."):
                continue
            try:
                e = RegistryEntry.from_dict(json.loads(entry_file.read_text("utf-8")))
            except (ValueError, KeyError):
                continue
            out.append(RegistryEntry(**{**e.to_dict(), "path": str(entry_file.parent)}))
        return out

    def _write_index(self, entries) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        doc = {"format": 1, "entries": [e.to_dict() for e in sorted(entries, key=lambda e: (e.name, e.version))]}
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".index-", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self.index_path)

    def _read_index(self) -> list[RegistryEntry]:
        try:
            doc = json.loads(self.index_path.read_text("utf-8"))
            entries = [RegistryEntry.from_dict(d) for d in doc["entries"]]
            for e in entries:
                if not (Path(e.path) / ENTRY_FILE).is_file():
                    raise ValueError("index points at a missing install")
            return entries
        except FileNotFoundError:
            return self._scan()
        except (ValueError, KeyError, TypeError):
            return self.rebuild_index()

    def rebuild_index(self) -> list[RegistryEntry]:
        """Regenerate the index from the installed directories."""
        self.root.mkdir(parents=True, exist_ok=True)
        with self._lock:
            entries = self._scan()
            self._write_index(entries)
        return entries

    def entries(self) -> list[RegistryEntry]:
        return self._read_index()

    # -- queries
    def list_skills(self, kind: Optional[str] = None, prefix: Optional[str] = None) -> list[RegistryEntry]:
        """Entries sorted by name, then by version from newest to oldest."""
        out = [e for e in self.entries()
               if (kind is None or e.skill_kind == kind) and (prefix is None or e.name.startswith(prefix))]
        out.sort(key=lambda e: Version.parse(e.version), reverse=True)
        out.sort(key=lambda e: e.name)
        return out

    def get(self, name: str, version: str) -> RegistryEntry:
        for e in self.entries():
            if e.name == name and e.version == version:
                return e
        raise NotFound(f"{name}@{version} is not installed")

    def resolve(self, name: str, requirement: str = "*") -> RegistryEntry:
        """Highest installed version of ``name`` satisfying ``requirement``."""
        try:
            req = Requirement.parse(requirement)
        except SemverError as exc:
            raise NotFound(f"bad version requirement {requirement!r}: {exc}") from None
        candidates = {e.version: e for e in self.entries() if e.name == name}
        best = best_match(candidates, req)
        if best is None:
            have = ", ".join(sorted(candidates, key=Version.parse)) or "none installed"
            raise NotFound(f"no version of {name!r} satisfies {requirement!r} ({have})")
        return candidates[str(best)]

    def load(self, entry: RegistryEntry) -> SkillArtifact:
        return load_artifact_excluding_entry(entry.path)

    def resolve_artifact(self, ref: str) -> SkillArtifact:
        name, _, req = ref.partition("@")
        return self.load(self.resolve(name, req or "*"))

    # -- import
    def import_artifact(self, source) -> RegistryEntry:
        """Install from an archive file, an artifact directory or a URL."""
        source = str(source)
        if _is_url(source):
            data = fetch_url(source)
        else:
            p = Path(source)
            if p.is_dir():
                data = pack(p)
            elif p.is_file():
                data = p.read_bytes()
            else:
                raise FetchError(f"no such file or directory: {source}")
        return self.import_bytes(data, source)

    def import_bytes(self, data: bytes, source: str = "<bytes>") -> RegistryEntry:
        artifact, files = unpack(data)
        m = artifact.manifest
        self.root.mkdir(parents=True, exist_ok=True)
        with self._lock:
            existing = [e for e in self._read_index() if e.name == m.name and e.version == m.version]
            if existing:
                if existing[0].digest == artifact.digest:
                    return existing[0]
                raise VersionConflict(f"{m.ref} is already installed with digest {existing[0].digest[:12]}, "
                                      f"refusing {artifact.digest[:12]}")
            target = self.root / m.name / m.version
            if target.exists():
                raise VersionConflict(f"{target} exists but is not indexed; run audit")
            staging = self.root / STAGING_DIR / uuid.uuid4().hex
            staging.mkdir(parents=True)
            try:
                for rel, blob in files.items():
                    dest = staging / rel
                    dest.parent.mkdir(parents=True, exist_ok=True)
                    dest.write_bytes(blob)
                entry = RegistryEntry(m.name, m.version, m.skill_kind, artifact.digest, str(target), source,
                                      datetime.now(timezone.utc).isoformat(timespec="seconds"))
                record = entry.to_dict()
                record.pop("path")
                (staging / ENTRY_FILE).write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", "utf-8")
                if load_artifact_excluding_entry(staging).digest != artifact.digest:
                    raise DigestMismatch(f"staged copy of {m.ref} does not re-digest")
                target.parent.mkdir(parents=True, exist_ok=True)
                os.rename(staging, target)
            finally:
                if staging.exists():
                    shutil.rmtree(staging, ignore_errors=True)
            others = [e for e in self._read_index() if (e.name, e.version) != (entry.name, entry.version)]
            self._write_index(others + [entry])
            return entry

    # -- integrity
    def audit(self) -> list[AuditIssue]:
        """Re-verify every install against the index; an empty list means healthy."""
        issues = []
        indexed = self.entries()
        seen = set()
        for e in indexed:
            seen.add((e.name, e.version))
            try:
                art = load_artifact_excluding_entry(e.path)
            except (InvalidArtifact, OSError) as exc:
                issues.append(AuditIssue(e.name, e.version, f"cannot load: {exc}"))
                continue
            if art.digest != e.digest:
                issues.append(AuditIssue(e.name, e.version, f"digest {art.digest[:12]} != recorded {e.digest[:12]}"))
            if (art.manifest.name, art.manifest.version) != (e.name, e.version):
                issues.append(AuditIssue(e.name, e.version, f"directory holds {art.manifest.ref}"))
        for e in self._scan():
            if (e.name, e.version) not in seen:
                issues.append(AuditIssue(e.name, e.version, "installed but missing from the index"))
        if len(seen) != len(indexed):
            issues.append(AuditIssue("*", "*", "duplicate index entries"))
        staging = self.root / STAGING_DIR
        if staging.is_dir() and any(staging.iterdir()):
            issues.append(AuditIssue("*", "*", "leftover staging directories"))
        return issues


def load_artifact_excluding_entry(directory) -> SkillArtifact:
    """Load an installed artifact, ignoring the registry's own ``entry.json``."""
    files = read_source_files(directory)
    files.pop(ENTRY_FILE, None)
    return artifact_from_files(files)
