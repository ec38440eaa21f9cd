"""Filtered back-projection for parallel-beam sinograms."""
from __future__ import annotations

import math

import numpy as np

from ..sim.base import InvalidGeometry

FILTERS = ("ramlak", "none")


def ramp_filter(n_det: int) -> np.ndarray:
    """Frequency response of the band-limited ramp on a zero-padded detector row.

    Built from the spatial Ram-Lak kernel (h[0] = 1/4, h[odd n] = -1/(pi n)^2,
    zero for even n) so the DC term is handled correctly, instead of sampling |f|.
    """
    size = 1 << max(1, math.ceil(math.log2(2 * n_det)))
    n = np.concatenate([np.arange(0, size // 2 + 1), np.arange(-size // 2 + 1, 0)])
    h = np.zeros(size)
    h[0] = 0.25
    odd = n % 2 == 1
    h[odd] = -1.0 / (math.pi * n[odd]) ** 2
    return np.real(np.fft.fft(h))


def fbp_reconstruct(sg, filter: str = "ramlak") -> np.ndarray:
    """Reconstruct an n_det x n_det image from a (n_angles, n_det) sinogram.

    Angles are taken as k * 180 / n_angles degrees. Uses the same pixel
    convention as the forward projector: x = col - c, y = row - c.
    """
    data = getattr(sg, "data", sg)
    p = np.asarray(data, dtype=float)
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 2:
        raise InvalidGeometry("sinogram must be a 2-D (n_angles, n_detectors) array")
    if not np.all(np.isfinite(p)):
        raise InvalidGeometry("sinogram contains non-finite values")
    if filter not in FILTERS:
        raise ValueError(f"unknown filter {filter!r}; expected one of {FILTERS}")
    n_ang, n_det = p.shape
    if filter == "ramlak":
        H = ramp_filter(n_det)
        padded = np.zeros((n_ang, H.size))
        padded[:, :n_det] = p
        p = np.real(np.fft.ifft(np.fft.fft(padded, axis=1) * H, axis=1))[:, :n_det]
    c = (n_det - 1) / 2.0
    coords = np.arange(n_det) - c
    X, Y = np.meshgrid(coords, coords)
    det = np.arange(n_det, dtype=float)
    img = np.zeros((n_det, n_det))
    theta = np.arange(n_ang) * (math.pi / n_ang)
    for k in range(n_ang):
        t = X * math.cos(theta[k]) + Y * math.sin(theta[k]) + c
        img += np.interp(t.ravel(), det, p[k], left=0.0, right=0.0).reshape(n_det, n_det)
    return img * (math.pi / n_ang)
