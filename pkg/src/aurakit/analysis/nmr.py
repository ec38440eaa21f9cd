"""1-D NMR processing: phase correction and integration."""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .types import AnalysisError, ComplexSpectrum, EmptyRange, Spectrum

COARSE_SAMPLES = 1024


def _ratio(x, pivot):
    span = float(x[-1] - x[0]) if x.size > 1 else 1.0
    return (np.asarray(x) - pivot) / span


def nmr_phase(cs: ComplexSpectrum, phi0: float, phi1: float = 0.0, pivot: float | None = None) -> ComplexSpectrum:
    """Multiply by exp(-i (phi0 + phi1 (x - pivot) / span) pi / 180); angles in degrees."""
    x = cs.x
    if pivot is None:
        pivot = 0.5 * float(x[0] + x[-1])
    elif not min(x[0], x[-1]) <= pivot <= max(x[0], x[-1]):
        raise ValueError("pivot must lie within the axis")
    angle = (phi0 + phi1 * _ratio(x, pivot)) * (np.pi / 180.0)
    return ComplexSpectrum(x, cs.values * np.exp(-1j * angle), cs.x_unit)


def _imag_l1(values, r, phi0, phi1):
    return float(np.abs((values * np.exp(-1j * np.deg2rad(phi0 + phi1 * r))).imag).sum())


def nmr_autophase(cs: ComplexSpectrum, pivot: float | None = None) -> tuple[float, float]:
    """Phase angles (phi0, phi1) that make the spectrum absorptive.

    The dispersive magnitude sum |Im| is minimized on a coarse grid (phi0 in
    1 degree steps over [-180, 180), phi1 in 2 degree steps over [-90, 90]) and
    refined by a pattern search down to 0.01 degree steps and a final
    Nelder-Mead polish.  Of the two solutions
    180 degrees apart the one with a positive real integral is returned.
    """
    x = cs.x
    if pivot is None:
        pivot = 0.5 * float(x[0] + x[-1])
    r = _ratio(x, pivot)
    v = cs.values
    # the coarse grid only looks at the strongest samples; refinement uses all of them
    if v.size > COARSE_SAMPLES:
        keep = np.sort(np.argsort(-np.abs(v), kind="stable")[:COARSE_SAMPLES])
    else:
        keep = np.arange(v.size)
    vc, rc = v[keep], r[keep]
    phi0_grid = np.arange(-180.0, 180.0, 1.0)
    c0, s0 = np.cos(np.deg2rad(phi0_grid))[:, None], np.sin(np.deg2rad(phi0_grid))[:, None]
    best = (np.inf, 0.0, 0.0)
    for phi1 in np.arange(-90.0, 90.0 + 1e-9, 2.0):
        p = vc * np.exp(-1j * np.deg2rad(phi1 * rc))
        # Im(p * exp(-i phi0)) = Im(p) cos(phi0) - Re(p) sin(phi0)
        cost = np.abs(p.imag[None, :] * c0 - p.real[None, :] * s0).sum(axis=1)
        k = int(np.argmin(cost))
        if cost[k] < best[0]:
            best = (float(cost[k]), float(phi0_grid[k]), float(phi1))
    _, a, b = best
    f = _imag_l1(v, r, a, b)
    # pattern search over the axis and diagonal directions, halving the step
    # when no move helps; diagonals matter because the minimum sits in a
    # narrow valley along which phi0 and phi1 trade off
    directions = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)]
    steps = [1.0, 2.0]
    while max(steps) >= 0.01:
        moved = False
        for d0, d1 in directions:
            ca, cb = a + d0 * steps[0], b + d1 * steps[1]
            fc = _imag_l1(v, r, ca, cb)
            if fc < f:
                f, a, b, moved = fc, ca, cb, True
                break
        if not moved:
            steps = [s / 2 for s in steps]
    res = minimize(lambda p: _imag_l1(v, r, p[0], p[1]), [a, b], method="Nelder-Mead",
                   options={"xatol": 1e-3, "fatol": 0.0, "initial_simplex": [[a, b], [a + 0.05, b], [a, b + 0.05]]})
    if res.fun < f:
        a, b = float(res.x[0]), float(res.x[1])
    phased = v * np.exp(-1j * np.deg2rad(a + b * r))
    if phased.real.sum() < 0:
        a += 180.0
    a = (a + 180.0) % 360.0 - 180.0
    return float(a), float(b)


def nmr_integrate(s: Spectrum, ranges, reference: int = 0, reference_value: float = 1.0) -> list[float]:
    """Trapezoidal integrals over each (lo, hi) range, scaled so the reference
    range integrates to ``reference_value``."""
    ranges = list(ranges)
    if not ranges:
        raise ValueError("at least one integration range is required")
    if not 0 <= reference < len(ranges):
        raise ValueError("reference must index into ranges")
    x, y = np.asarray(s.x), np.asarray(s.y)
    raw = []
    for lo, hi in ranges:
        lo, hi = min(lo, hi), max(lo, hi)
        m = (x >= lo) & (x <= hi)
        if not m.any():
            raise EmptyRange(f"no samples inside [{lo}, {hi}]")
        raw.append(float(np.trapezoid(y[m], x[m])) if m.sum() > 1 else 0.0)
    ref = raw[reference]
    if ref == 0:
        raise AnalysisError("reference range integrates to zero")
    return [v * reference_value / ref for v in raw]
