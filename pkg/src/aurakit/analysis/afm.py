"""Height-map leveling, roughness and line profiles."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import map_coordinates

from .types import AFMRoughness, OutOfBounds, Spectrum


def _as_map(h) -> np.ndarray:
    z = np.asarray(getattr(h, "data", h), dtype=float)
    if z.ndim != 2 or min(z.shape) < 2:
        raise ValueError("height map must be 2-D with both sides >= 2")
    return z


def afm_level_plane(h) -> np.ndarray:
    """Subtract the least-squares plane a + b x + c y (x = column, y = row)."""
    z = _as_map(h)
    rows, cols = np.indices(z.shape, dtype=float)
    A = np.column_stack([np.ones(z.size), cols.ravel(), rows.ravel()])
    coef, *_ = np.linalg.lstsq(A, z.ravel(), rcond=None)
    return z - (A @ coef).reshape(z.shape)


def afm_roughness(h) -> AFMRoughness:
    """Ra and Rq about the mean. Expects a leveled map."""
    z = np.asarray(getattr(h, "data", h), dtype=float)
    if z.size == 0:
        raise ValueError("empty height map")
    d = z - z.mean()
    return AFMRoughness(ra=float(np.mean(np.abs(d))), rq=float(np.sqrt(np.mean(d * d))))


def afm_profile(h, p0, p1, n: int = 100) -> Spectrum:
    """``n`` bilinear samples from p0 to p1, points given as (x, y) = (col, row)."""
    z = _as_map(h)
    if n < 2:
        raise ValueError("n must be at least 2")
    rows, cols = z.shape
    for x, y in (p0, p1):
        if not (0 <= x <= cols - 1 and 0 <= y <= rows - 1):
            raise OutOfBounds(f"point ({x}, {y}) lies outside the {cols}x{rows} map")
    length = float(np.hypot(p1[0] - p0[0], p1[1] - p0[1]))
    if length == 0:
        raise OutOfBounds("profile endpoints coincide")
    s = np.linspace(0.0, 1.0, n)
    xs = p0[0] + s * (p1[0] - p0[0])
    ys = p0[1] + s * (p1[1] - p0[1])
    vals = map_coordinates(z, [ys, xs], order=1, mode="nearest")
    return Spectrum(s * length, vals, x_unit="px", y_unit="height")
