"""FTIR band assignment against a group-frequency table."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources

from .types import FTIRAssignment


@dataclass(frozen=True)
class Band:
    group: str
    lo: float
    hi: float


def load_band_table(path=None) -> list[Band]:
    """Read a (group, lo, hi) CSV; the shipped 20-entry table when ``path`` is None."""
    if path is None:
        text = resources.files("aurakit.analysis").joinpath("data", "ftir_bands.csv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if rows and rows[0][0].strip().lower() == "group":
        rows = rows[1:]
    bands = [Band(r[0].strip(), float(r[1]), float(r[2])) for r in rows]
    for b in bands:
        if b.lo > b.hi:
            raise ValueError(f"band {b.group!r} has lo > hi")
    return bands


def ftir_assign(peaks, band_table=None, tol: float = 0.0) -> list[FTIRAssignment]:
    """Match each peak to the nearest band within ``tol``.

    Distance to a band is 0 inside [lo, hi] and the gap to the nearer edge
    outside it.  Ties go to the narrower band, then to the earlier table row.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    bands = load_band_table() if band_table is None else [b if isinstance(b, Band) else Band(*b) for b in band_table]
    out = []
    for pk in peaks:
        pos = float(getattr(pk, "position", pk))
        best = None
        for order, b in enumerate(bands):
            dist = 0.0 if b.lo <= pos <= b.hi else min(abs(pos - b.lo), abs(pos - b.hi))
            if dist <= tol:
                key = (dist, b.hi - b.lo, order)
                if best is None or key < best[0]:
                    best = (key, b)
        if best is None:
            out.append(FTIRAssignment(pos))
        else:
            b = best[1]
            out.append(FTIRAssignment(pos, b.group, b.lo, b.hi))
    return out
