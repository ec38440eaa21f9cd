"""Deterministic ZIP archives of skill artifacts."""
from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

from ..skill.model import (MANIFEST_FILE, InvalidArtifact, SkillArtifact, artifact_from_files, validate_artifact)
from .errors import DigestMismatch

ARCHIVE_FORMAT = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)
_TEXT_SUFFIXES = (".json", ".sk", ".csv", ".txt", ".md")


def _normalize(path: str, data: bytes) -> bytes:
    if path.endswith(_TEXT_SUFFIXES):
        return data.replace(b"\r\n", b"\n")
    return data


def read_source_files(directory) -> dict[str, bytes]:
    root = Path(directory)
    if not root.is_dir():
        raise InvalidArtifact(f"{root} is not a directory")
    files = {}
    for p in sorted(root.rglob("*")):
        rel = p.relative_to(root)
        if p.is_file() and not any(part.startswith(".") or part == "__pycache__" for part in rel.parts):
            files[rel.as_posix()] = _normalize(rel.as_posix(), p.read_bytes())
    return files


def _ordered(files: dict[str, bytes], artifact: SkillArtifact) -> list[tuple[str, bytes]]:
    body = artifact.body_file()
    head = [(MANIFEST_FILE, files[MANIFEST_FILE]), (body, files[body])]
    return head + sorted((k, v) for k, v in files.items() if k not in (MANIFEST_FILE, body))


def check_artifact(artifact: SkillArtifact) -> None:
    """Raise InvalidArtifact when the manifest or body fails validation."""
    from ..analysis.ops import known_ops
    from ..sim import load_descriptor, model_ids
    diags = validate_artifact(artifact, set(model_ids()), known_ops(), load_descriptor)
    if diags:
        raise InvalidArtifact(f"{artifact.manifest.ref}: {len(diags)} validation problem(s): {diags[0]}", diags)


def pack_files(files: dict[str, bytes]) -> bytes:
    files = {k: _normalize(k, v) for k, v in files.items()}
    artifact = artifact_from_files(files)
    check_artifact(artifact)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        for name, data in _ordered(files, artifact):
            info = zipfile.ZipInfo(name, date_time=_EPOCH)
            info.compress_type = zipfile.ZIP_STORED
            info.create_system = 3
            info.external_attr = 0o644 << 16
            zf.writestr(info, data)
        zf.comment = json.dumps({"format": ARCHIVE_FORMAT, "digest": artifact.digest},
                                sort_keys=True, separators=(",", ":")).encode()
    return buf.getvalue()


def pack(directory) -> bytes:
    """Archive the artifact in ``directory``; identical inputs give identical bytes."""
    return pack_files(read_source_files(directory))


def read_archive(data: bytes) -> tuple[dict[str, bytes], str]:
    """(files, embedded digest); a corrupt entry is reported as DigestMismatch."""
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise InvalidArtifact(f"not a skill archive: {exc}") from None
    with zf:
        try:
            meta = json.loads(zf.comment.decode() or "{}")
            embedded = str(meta["digest"])
        except (ValueError, KeyError, UnicodeDecodeError):
            raise InvalidArtifact("archive carries no artifact digest") from None
        files = {}
        for info in zf.infolist():
            name = info.filename
            if info.is_dir():
                continue
            if name.startswith("/") or ".." in name.split("/"):
                raise InvalidArtifact(f"unsafe archive path {name!r}")
            try:
                files[name] = zf.read(info)
            except zipfile.BadZipFile as exc:   # CRC failure
                raise DigestMismatch(f"archive entry {name!r} is corrupt: {exc}") from None
            except Exception as exc:
                raise InvalidArtifact(f"cannot read archive entry {name!r}: {exc}") from None
    return files, embedded


def unpack(data: bytes) -> tuple[SkillArtifact, dict[str, bytes]]:
    """Verify an archive and return (artifact, files)."""
    files, embedded = read_archive(data)
    try:
        artifact = artifact_from_files(files)
    except InvalidArtifact as exc:
        # a flipped byte usually breaks parsing first; report that it no longer matches
        raise DigestMismatch(f"archive content does not reproduce digest {embedded[:12]}: {exc}") from None
    if artifact.digest != embedded:
        raise DigestMismatch(f"archive digest {embedded[:12]} but content digests to {artifact.digest[:12]}")
    check_artifact(artifact)
    return artifact, files
