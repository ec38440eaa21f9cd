"""Dataset files: CSV for 1-D payloads, text float grids (or PGM) for 2-D payloads,
each with a ``.meta.json`` sidecar holding axes, units and provenance."""
from __future__ import annotations

import io
import json
import os
from pathlib import Path

import numpy as np

from .._canon import pretty_json
from .dataset import Axis, Dataset

ONE_D = ("spectrum", "tga_curve")
GRIDS = ("image", "height_map", "sinogram", "orientation_map")


def extension(payload_kind: str) -> str:
    if payload_kind in ONE_D or payload_kind == "complex_spectrum":
        return "csv"
    if payload_kind in GRIDS:
        return "grid"
    return "json"


def sidecar_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def _fmt(a: np.ndarray) -> str:
    return "%d" if a.dtype.kind in "iub" else "%.17g"


def _atomic_write(path: Path, data: bytes):
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def write_dataset(ds: Dataset, path) -> Path:
    """Write ``ds`` to ``path`` plus sidecar; returns the data path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    if ds.payload_kind in ONE_D:
        ax = ds.axes[0]
        buf.write(f"# unit: {ax.unit},{ds.unit}\n{ax.name},value\n")
        for x, y in zip(ax.values, ds.data):
            buf.write(f"{float(x)!r},{(_fmt(ds.data) % y)}\n")
    elif ds.payload_kind == "complex_spectrum":
        ax = ds.axes[0]
        buf.write(f"# unit: {ax.unit},{ds.unit},{ds.unit}\n{ax.name},re,im\n")
        for x, v in zip(ax.values, ds.data):
            buf.write(f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r}\n")
    elif ds.payload_kind in GRIDS:
        np.savetxt(buf, np.atleast_2d(ds.data), fmt=_fmt(ds.data), delimiter=" ")
    else:
        buf.write(pretty_json(np.asarray(ds.data).tolist()))
    _atomic_write(path, buf.getvalue().encode("utf-8"))
    meta = {
        "payload_kind": ds.payload_kind, "unit": ds.unit, "dtype": ds.data.dtype.kind,
        "axes": [{"name": a.name, "unit": a.unit,
                  "values": None if a.values is None or ds.payload_kind in ONE_D + ("complex_spectrum",)
                  else a.values.tolist()} for a in ds.axes],
        "provenance": ds.provenance,
    }
    _atomic_write(sidecar_path(path), pretty_json(meta).encode("utf-8"))
    return path


def read_dataset(path) -> Dataset:
    path = Path(path)
    meta_file = sidecar_path(path)
    meta = json.loads(meta_file.read_text("utf-8")) if meta_file.exists() else None
    if meta is None:
        return read_csv_spectrum(path)
    kind = meta["payload_kind"]
    int_data = meta.get("dtype") in ("i", "u")
    if kind in ONE_D or kind == "complex_spectrum":
        arr = np.loadtxt(path, delimiter=",", comments="#", skiprows=2, ndmin=2)
        x = arr[:, 0]
        data = arr[:, 1] + 1j * arr[:, 2] if kind == "complex_spectrum" else arr[:, 1]
        ax = meta["axes"][0]
        axes = (Axis(ax["name"], ax["unit"], x),)
    elif kind in GRIDS:
        data = np.loadtxt(path, ndmin=2)
        axes = tuple(Axis(a["name"], a["unit"], a["values"]) for a in meta["axes"])
    else:
        data = np.asarray(json.loads(path.read_text("utf-8")))
        axes = tuple(Axis(a["name"], a["unit"], a["values"]) for a in meta["axes"])
    if int_data:
        data = np.rint(data).astype(np.int64)
    return Dataset(kind, axes, data, meta.get("unit", ""), meta.get("provenance", {}))


def read_csv_spectrum(path, payload_kind: str = "spectrum") -> Dataset:
    """Read a bare 2-column CSV (optional ``# unit: x,y`` comment and header row)."""
    units = ("", "")
    names = ("x", "y")
    rows = []
    for line in Path(path).read_text("utf-8").splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s[1:].strip()
            if body.lower().startswith("unit:"):
                parts = [p.strip() for p in body[5:].split(",")]
                units = (parts[0], parts[1] if len(parts) > 1 else "")
            continue
        cells = [c.strip() for c in s.split(",")]
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            if not rows:
                names = tuple(cells[:2])
                continue
            raise
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError(f"{path}: expected at least two numeric columns")
    if arr.shape[1] >= 3:
        return Dataset("complex_spectrum", (Axis(names[0], units[0], arr[:, 0]),), arr[:, 1] + 1j * arr[:, 2],
                       units[1], {"source": str(path)})
    return Dataset(payload_kind, (Axis(names[0], units[0], arr[:, 0]),), arr[:, 1], units[1], {"source": str(path)})


def write_pgm(image, path, lo: float | None = None, hi: float | None = None) -> Path:
    """8-bit binary portable graymap of ``image`` scaled from [lo, hi]."""
    a = np.asarray(getattr(image, "data", image), dtype=float)
    lo = float(a.min()) if lo is None else lo
    hi = float(a.max()) if hi is None else hi
    scaled = np.zeros_like(a) if hi <= lo else (a - lo) / (hi - lo)
    px = np.clip(np.rint(scaled * 255), 0, 255).astype(np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(path, f"P5\n{a.shape[1]} {a.shape[0]}\n255\n".encode() + px.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        end = pos
        while not raw[end:end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end])
        pos = end
    if tokens[0] not in (b"P5", b"P2"):
        raise ValueError("not a PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if tokens[0] == b"P2":
        return np.array(raw[pos:].split(), dtype=float).reshape(h, w)
    pos += 1
    dtype = np.uint8 if maxval < 256 else ">u2"
    return np.frombuffer(raw[pos:], dtype=dtype, count=w * h).reshape(h, w).astype(float)
