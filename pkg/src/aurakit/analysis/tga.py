"""Thermogravimetric step analysis."""
from __future__ import annotations

import numpy as np

from .types import NonMonotonicTemperature, Spectrum, TgaStep

PLATEAU_FRACTION = 0.01


def _smooth(y, window: int):
    if window <= 1:
        return np.asarray(y, dtype=float)
    if window % 2 == 0:
        raise ValueError("smooth_window must be odd")
    half = window // 2
    padded = np.pad(np.asarray(y, dtype=float), half, mode="edge")
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def dtg(curve: Spectrum, smooth_window: int = 5) -> np.ndarray:
    """-d(mass)/dT of the moving-average smoothed curve (central differences)."""
    return -np.gradient(_smooth(curve.y, smooth_window), curve.x)


def tga_steps(curve: Spectrum, heat_flow: Spectrum | None = None, smooth_window: int = 5,
              min_loss_pct: float = 1.0, heating_rate: float = 10.0, initial_mass_mg: float = 10.0) -> list[TgaStep]:
    """Decomposition steps of a mass(%) vs temperature curve.

    Candidate steps are DTG maxima with prominence at least
    ``min_loss_pct / (T_max - T_min)``: the DTG height of a step losing
    ``min_loss_pct`` spread uniformly over the whole temperature range, the
    flattest step that could still qualify.  Each candidate's plateaus are the
    masses where DTG falls to 1% of its peak on either side; steps losing less
    than ``min_loss_pct`` are dropped.  The onset T_d is where the horizontal
    pre-step plateau meets the tangent through the DTG maximum.

    With a heat-flow channel (mW vs K) the enthalpy in J/g is the baseline-
    corrected heat-flow integral over the step window divided by the heating
    rate (K/min) and the initial sample mass (mg).
    """
    T = np.asarray(curve.x, dtype=float)
    if np.any(np.diff(T) <= 0):
        raise NonMonotonicTemperature("temperature must increase strictly")
    if min_loss_pct <= 0:
        raise ValueError("min_loss_pct must be positive")
    mass = _smooth(curve.y, smooth_window)
    d = -np.gradient(mass, T)
    threshold = min_loss_pct / float(T[-1] - T[0])
    from scipy.signal import find_peaks

    idx, _ = find_peaks(np.concatenate([[-np.inf], d, [-np.inf]]), prominence=threshold)
    idx = idx - 1
    steps = []
    for i in idx:
        peak = d[i]
        if peak <= 0:
            continue
        level = PLATEAU_FRACTION * peak
        lo = i
        while lo > 0 and d[lo] > level:
            lo -= 1
        hi = i
        while hi < d.size - 1 and d[hi] > level:
            hi += 1
        before, after = float(mass[lo]), float(mass[hi])
        loss = before - after
        if loss < min_loss_pct:
            continue
        tp = float(T[i])
        onset = tp - (before - float(mass[i])) / peak
        enthalpy = None
        if heat_flow is not None:
            enthalpy = _enthalpy(heat_flow, float(T[lo]), float(T[hi]), heating_rate, initial_mass_mg)
        steps.append(TgaStep(float(onset), float(loss), tp, enthalpy, (float(T[lo]), float(T[hi]))))
    return steps


def _enthalpy(hf: Spectrum, t_lo: float, t_hi: float, heating_rate: float, mass_mg: float) -> float:
    x, q = np.asarray(hf.x), np.asarray(hf.y, dtype=float)
    m = (x >= t_lo) & (x <= t_hi)
    if m.sum() < 2:
        return 0.0
    xs, qs = x[m], q[m]
    base = qs[0] + (qs[-1] - qs[0]) * (xs - xs[0]) / (xs[-1] - xs[0])
    area = float(np.trapezoid(qs - base, xs))        # mW * K
    return area / (heating_rate / 60.0) / mass_mg   # mW * s / mg = J / g
