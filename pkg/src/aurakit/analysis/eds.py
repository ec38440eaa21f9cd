"""EDS quantification helpers."""
from __future__ import annotations

import math

import numpy as np

from .types import Composition, CompositionEntry, EmptyWindow, Spectrum, ZeroMass

BASES = ("weight", "atomic")


def eds_convert(c: Composition, to: str) -> Composition:
    """Convert between weight and atomic percentages."""
    if to not in BASES:
        raise ValueError(f"basis must be one of {BASES}")
    for e in c.entries:
        if not e.atomic_mass > 0:
            raise ZeroMass(f"atomic mass of {e.element} must be positive")
    if to == c.basis:
        return c
    f = np.array([e.fraction for e in c.entries], dtype=float)
    m = np.array([e.atomic_mass for e in c.entries], dtype=float)
    raw = f / m if to == "atomic" else f * m
    total = raw.sum()
    out = raw / total * 100.0 if total > 0 else raw
    entries = tuple(CompositionEntry(e.element, e.atomic_mass, float(v)) for e, v in zip(c.entries, out))
    return Composition(entries, to)


def _window(x, y, win, name):
    lo, hi = min(win), max(win)
    m = (x >= lo) & (x <= hi)
    if not m.any():
        raise EmptyWindow(f"{name} window [{lo}, {hi}] contains no samples")
    return y[m], (lo, hi)


def eds_snr(s: Spectrum, peak_window, bg_window) -> float:
    """(peak max - background mean) / background std (population)."""
    x, y = np.asarray(s.x), np.asarray(s.y, dtype=float)
    peak, (plo, phi) = _window(x, y, peak_window, "peak")
    bg, (blo, bhi) = _window(x, y, bg_window, "background")
    if plo <= bhi and blo <= phi:
        raise ValueError("peak and background windows overlap")
    num = float(peak.max() - bg.mean())
    sd = float(bg.std())
    if sd == 0:
        if num == 0:
            return 0.0
        return math.inf if num > 0 else 0.0
    return max(num / sd, 0.0)
