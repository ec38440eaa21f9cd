"""Synthetic datasets with embedded ground truth for the analysis-only modalities.

Each generator takes a plain dict of parameters (missing keys fall back to
seeded random draws or defaults) and records everything needed to check an
analysis result under ``provenance["truth"]``.
"""
from __future__ import annotations

import math

import numpy as np

from .. import rng
from .base import InvalidSpec
from .dataset import Axis, Dataset

MODALITIES = ("ftir", "nmr", "tga", "afm", "ebsd")


def _require(cond: bool, message: str):
    if not cond:
        raise InvalidSpec(message)


def _num(spec, key, default, lo=-math.inf, hi=math.inf, integer=False):
    v = spec.get(key, default)
    try:
        v = int(v) if integer else float(v)
    except (TypeError, ValueError):
        raise InvalidSpec(f"{key} must be numeric, got {v!r}") from None
    _require(lo <= v <= hi, f"{key}={v} outside [{lo}, {hi}]")
    return v


def _provenance(modality, seed, spec, truth):
    return {"model": f"synthetic-{modality}", "seed": int(seed), "clock": 0,
            "parameters": _plain(spec), "truth": _plain(truth)}


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


# -- FTIR --------------------------------------------------------------------

def ftir(spec: dict, seed: int) -> Dataset:
    """Absorbance spectrum: Gaussian bands (position cm^-1, amplitude, sigma) on a linear baseline."""
    lo, hi = spec.get("x_range", (400.0, 4000.0))
    _require(0 < lo < hi <= 10000, "x_range must satisfy 0 < lo < hi <= 10000")
    n = _num(spec, "n", 1801, 16, 200000, integer=True)
    noise = _num(spec, "noise", 0.0, 0.0)
    g = rng.stream(seed, "synthetic-ftir")
    bands = spec.get("bands")
    if bands is None:
        k = int(g.integers(3, 7))
        bands = [(float(g.uniform(lo + 100, hi - 100)), float(g.uniform(0.2, 1.0)), float(g.uniform(8, 25)))
                 for _ in range(k)]
    bands = [tuple(float(v) for v in b) for b in bands]
    for pos, amp, sig in bands:
        _require(lo <= pos <= hi and sig > 0, f"band {pos} outside range or non-positive width")
    b0, b1 = spec.get("baseline", (0.02, 0.0))
    x = np.linspace(lo, hi, n)
    y = b0 + b1 * (x - lo)
    for pos, amp, sig in bands:
        y = y + amp * np.exp(-0.5 * ((x - pos) / sig) ** 2)
    if noise > 0:
        y = y + g.normal(0.0, noise, n)
    truth = {"bands": [list(b) for b in sorted(bands)], "noise_std": noise}
    return Dataset("spectrum", (Axis("wavenumber", "cm-1", x),), y, "absorbance",
                   _provenance("ftir", seed, spec, truth))


# -- NMR ---------------------------------------------------------------------

def nmr(spec: dict, seed: int) -> Dataset:
    """Complex spectrum of absorptive Lorentzians rotated by a known phase error.

    Peaks are (center ppm, area, half-width ppm).  The stored values equal the
    real Lorentzian sum passed through the phase operator with (phi0, phi1),
    so correcting with (-phi0, -phi1) at the axis midpoint restores it.
    """
    lo, hi = spec.get("ppm_range", (0.0, 10.0))
    _require(lo < hi, "ppm_range must be increasing")
    n = _num(spec, "n", 4096, 64, 1 << 20, integer=True)
    phi0 = _num(spec, "phi0", 0.0, -360, 360)
    phi1 = _num(spec, "phi1", 0.0, -180, 180)
    noise = _num(spec, "noise", 0.0, 0.0)
    g = rng.stream(seed, "synthetic-nmr")
    peaks = spec.get("peaks")
    if peaks is None:
        peaks = [(float(g.uniform(lo + 1, hi - 1)), float(a), 0.01) for a in (3.0, 2.0, 1.0)]
    peaks = [tuple(float(v) for v in p) for p in peaks]
    for c, a, w in peaks:
        _require(lo <= c <= hi and w > 0 and a >= 0, f"invalid peak {(c, a, w)}")
    x = np.linspace(lo, hi, n)
    real = np.zeros(n)
    for c, a, w in peaks:
        real += a * (w / math.pi) / ((x - c) ** 2 + w * w)
    if noise > 0:
        real = real + g.normal(0.0, noise, n)
    pivot = 0.5 * (lo + hi)
    angle = np.deg2rad(phi0 + phi1 * (x - pivot) / (hi - lo))
    values = real * np.exp(-1j * angle)
    truth = {"peaks": [list(p) for p in peaks], "phi0": phi0, "phi1": phi1, "pivot": pivot,
             "correction": [-phi0, -phi1]}
    return Dataset("complex_spectrum", (Axis("shift", "ppm", x),), values, "a.u.",
                   _provenance("nmr", seed, spec, truth))


# -- TGA ---------------------------------------------------------------------

def tga(spec: dict, seed: int) -> Dataset:
    """Mass (%) vs temperature (K) as a sum of logistic steps (loss %, center K, width K).

    With ``channel="heat_flow"`` the heat flow (mW) on the same axis is returned
    instead; each step contributes enthalpy (J/g) times mass (mg) times heating
    rate (K/s) times the step's normalized derivative.
    """
    lo, hi = spec.get("T_range", (300.0, 1000.0))
    _require(0 < lo < hi, "T_range must be positive and increasing")
    n = _num(spec, "n", 1401, 16, 200000, integer=True)
    m0 = _num(spec, "initial", 100.0, 0.0, 100.0)
    noise = _num(spec, "noise", 0.0, 0.0)
    rate = _num(spec, "heating_rate", 10.0, 1e-6)
    mass_mg = _num(spec, "mass_mg", 10.0, 1e-9)
    channel = spec.get("channel", "mass")
    _require(channel in ("mass", "heat_flow"), "channel must be 'mass' or 'heat_flow'")
    g = rng.stream(seed, "synthetic-tga")
    steps = spec.get("steps")
    if steps is None:
        steps = [(float(g.uniform(5, 30)), float(g.uniform(lo + 150, hi - 150)), float(g.uniform(5, 20)))]
    steps = [tuple(float(v) for v in s) for s in steps]
    _require(sum(s[0] for s in steps) <= m0, "total loss exceeds initial mass")
    for loss, c, w in steps:
        _require(loss > 0 and w > 0, "steps need positive loss and width")
    enthalpies = [float(h) for h in spec.get("enthalpies", [0.0] * len(steps))]
    _require(len(enthalpies) == len(steps), "one enthalpy per step")
    T = np.linspace(lo, hi, n)
    mass = np.full(n, m0)
    heat = np.zeros(n)
    for (loss, c, w), dh in zip(steps, enthalpies):
        z = (T - c) / w
        frac = 0.5 * (1.0 + np.tanh(0.5 * z))        # logistic, overflow-safe
        mass -= loss * frac
        heat += dh * mass_mg * (rate / 60.0) * frac * (1 - frac) / w
    if noise > 0:
        mass = mass + g.normal(0.0, noise, n)
    truth = {"steps": [{"loss_pct": s[0], "center": s[1], "width": s[2], "onset": s[1] - 2 * s[2],
                        "enthalpy": h} for s, h in zip(steps, enthalpies)],
             "heating_rate": rate, "mass_mg": mass_mg}
    if channel == "heat_flow":
        return Dataset("spectrum", (Axis("temperature", "K", T),), heat, "mW",
                       _provenance("tga", seed, spec, truth))
    return Dataset("tga_curve", (Axis("temperature", "K", T),), mass, "%",
                   _provenance("tga", seed, spec, truth))


# -- AFM ---------------------------------------------------------------------

def afm(spec: dict, seed: int) -> Dataset:
    """Height map: i.i.d. Gaussian roughness (std) plus a tilt plane a + b*col + c*row
    and optional sinusoid (amplitude, period px) along columns."""
    shape = tuple(int(v) for v in spec.get("shape", (256, 256)))
    _require(len(shape) == 2 and min(shape) >= 2, "shape must be 2-D with sides >= 2")
    std = _num(spec, "std", 1.0, 0.0)
    a, b, c = (float(v) for v in spec.get("tilt", (0.0, 0.0, 0.0)))
    amp, period = (float(v) for v in spec.get("sinusoid", (0.0, 16.0)))
    _require(period > 0, "sinusoid period must be positive")
    g = rng.stream(seed, "synthetic-afm")
    rows, cols = np.indices(shape, dtype=float)
    z = g.normal(0.0, std, shape) if std > 0 else np.zeros(shape)
    z = z + amp * np.sin(2 * math.pi * cols / period) + a + b * cols + c * rows
    truth = {"std": std, "rq": std, "ra": std * math.sqrt(2 / math.pi), "tilt": [a, b, c],
             "sinusoid": [amp, period]}
    return Dataset("height_map", (Axis("y", "px"), Axis("x", "px")), z, "nm",
                   _provenance("afm", seed, spec, truth))


# -- EBSD --------------------------------------------------------------------

def _misorientation(a, b):
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


def _components_ok(labels, k):
    from scipy import ndimage

    for lab in range(1, k + 1):
        _, n = ndimage.label(labels == lab)
        if n != 1:
            return False
    return True


def ebsd(spec: dict, seed: int) -> Dataset:
    """Voronoi orientation map (degrees in [0, 180)) with ground-truth labels.

    Seeds are drawn until every cell is a single 4-connected region, so the
    stored labels are exactly what a segmentation should recover.
    """
    shape = tuple(int(v) for v in spec.get("shape", (96, 96)))
    _require(len(shape) == 2 and min(shape) >= 4, "shape must be 2-D with sides >= 4")
    orientations = spec.get("orientations")
    k = int(spec.get("n_grains", len(orientations) if orientations is not None else 5))
    _require(1 <= k <= shape[0] * shape[1] // 16, "n_grains out of range")
    offset = _num(spec, "offset", 0.0, -360, 360)
    noise = _num(spec, "noise_deg", 0.0, 0.0, 5.0)
    g = rng.stream(seed, "synthetic-ebsd")
    if orientations is None:
        _require(k <= 18, "cannot draw more than 18 orientations 10 degrees apart")
        orientations = []
        while len(orientations) < k:
            cand = float(g.uniform(0, 180))
            if all(_misorientation(cand, o) >= 10 for o in orientations):
                orientations.append(cand)
    orientations = [float(o) % 180.0 for o in orientations]
    _require(len(orientations) == k, "need one orientation per grain")
    rows, cols = np.indices(shape, dtype=float)
    for attempt in range(100):
        gs = rng.stream(seed, "synthetic-ebsd-seeds", attempt)
        flat = gs.choice(shape[0] * shape[1], size=k, replace=False)
        pts = np.column_stack(np.unravel_index(flat, shape)).astype(float)
        d = (rows[None] - pts[:, 0, None, None]) ** 2 + (cols[None] - pts[:, 1, None, None]) ** 2
        labels = np.argmin(d, axis=0) + 1
        if _components_ok(labels, k):
            break
    else:
        raise InvalidSpec("could not draw a connected Voronoi tessellation")
    theta = np.asarray(orientations)[labels - 1]
    if noise > 0:
        theta = theta + g.normal(0.0, noise, shape)
    theta = (theta + offset) % 180.0
    truth = {"labels": labels, "orientations": orientations, "seeds": pts, "offset": offset}
    return Dataset("orientation_map", (Axis("y", "px"), Axis("x", "px")), theta, "deg",
                   _provenance("ebsd", seed, spec, truth))


GENERATORS = {"ftir": ftir, "nmr": nmr, "tga": tga, "afm": afm, "ebsd": ebsd}


def generate_synthetic(modality: str, spec: dict | None = None, seed: int = 0) -> Dataset:
    if modality not in GENERATORS:
        raise InvalidSpec(f"unknown modality {modality!r}; expected one of {MODALITIES}")
    if spec is not None and not isinstance(spec, dict):
        raise InvalidSpec("spec must be a mapping")
    if not 0 <= int(seed) < 2**64:
        raise InvalidSpec("seed must be a 64-bit unsigned integer")
    try:
        return GENERATORS[modality](dict(spec or {}), int(seed))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpec):
            raise
        raise InvalidSpec(str(exc)) from exc
