"""Parallel-beam forward projection and phantom rasterization."""
from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import map_coordinates

from .base import InvalidGeometry


def projection_angles(n_angles: int) -> np.ndarray:
    """Angles in radians, k * pi / n_angles."""
    return np.arange(n_angles) * (math.pi / n_angles)


def simulate_sinogram(phantom, n_angles: int, n_detectors: int, step: float = 0.5) -> np.ndarray:
    """Line integrals through ``phantom`` for uniformly spaced angles in [0, 180).

    Pixel (row, col) sits at x = col - c, y = row - c with c the image centre;
    detector j measures the ray x cos(theta) + y sin(theta) = j - (n_detectors - 1) / 2.
    Rays are sampled every ``step`` pixels with bilinear interpolation.
    """
    img = np.asarray(phantom, dtype=float)
    if img.ndim != 2 or img.shape[0] != img.shape[1] or img.shape[0] < 1:
        raise InvalidGeometry("phantom must be a non-empty square image")
    if n_angles < 1:
        raise InvalidGeometry("n_angles must be at least 1")
    n = img.shape[0]
    if n_detectors < n:
        raise InvalidGeometry(f"n_detectors ({n_detectors}) must be at least the phantom side ({n})")
    c = (n - 1) / 2.0
    half = math.ceil(n * math.sqrt(2) / 2) + 1
    t = np.arange(-half, half + step / 2, step)
    s = np.arange(n_detectors) - (n_detectors - 1) / 2.0
    theta = projection_angles(n_angles)
    cos, sin = np.cos(theta)[:, None, None], np.sin(theta)[:, None, None]
    S, T = s[None, :, None], t[None, None, :]
    x = S * cos - T * sin
    y = S * sin + T * cos
    vals = map_coordinates(img, [(y + c).ravel(), (x + c).ravel()], order=1, mode="constant", cval=0.0)
    return vals.reshape(n_angles, n_detectors, t.size).sum(axis=2) * step


def rasterize_disks(n: int, disks, supersample: int = 4) -> np.ndarray:
    """Area-weighted rasterization of (cx, cy, radius, value) disks in pixel units.

    Later disks replace earlier ones where they overlap.
    """
    k = supersample
    offs = (np.arange(k) + 0.5) / k - 0.5
    grid = np.arange(n)
    yy = (grid[:, None] + offs[None, :]).reshape(-1)
    xx = yy.copy()
    Y, X = np.meshgrid(yy, xx, indexing="ij")
    fine = np.zeros_like(X)
    for cx, cy, r, v in disks:
        fine[(X - cx) ** 2 + (Y - cy) ** 2 <= r * r] = v
    return fine.reshape(n, k, n, k).mean(axis=(1, 3))
