"""Asymmetric least-squares baseline estimation."""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from .types import BaselineResult, SingularSystem, Spectrum

DEFAULT_LAMBDA = 1e5
DEFAULT_P = 0.01
DEFAULT_ITER = 10


def _penalty_bands(n: int, lam: float) -> np.ndarray:
    """Upper banded form of lam * D'D for the second-difference operator D."""
    d0 = np.full(n, 6.0)
    d0[[0, -1]] = 1.0
    if n == 3:
        d0[1] = 4.0
    elif n > 3:
        d0[[1, -2]] = 5.0
    d1 = np.full(n - 1, -4.0)
    d1[[0, -1]] = -2.0
    d2 = np.ones(n - 2)
    ab = np.zeros((3, n))
    ab[2] = lam * d0
    ab[1, 1:] = lam * d1
    ab[0, 2:] = lam * d2
    return ab


def baseline_asls(s: Spectrum, lam: float = DEFAULT_LAMBDA, p: float = DEFAULT_P,
                  n_iter: int = DEFAULT_ITER) -> BaselineResult:
    """Baseline z minimizing sum w (y - z)^2 + lam * sum (second difference of z)^2.

    Weights are p where y lies above the current baseline and 1 - p below;
    they start at 1 and are updated ``n_iter`` times.
    """
    if lam <= 0 or not 0 < p < 1 or n_iter < 1:
        raise ValueError("need lam > 0, 0 < p < 1, n_iter >= 1")
    y = np.asarray(s.y, dtype=float)
    n = y.size
    if n < 3:
        return BaselineResult(s.x, y.copy(), np.zeros_like(y))
    penalty = _penalty_bands(n, lam)
    w = np.ones(n)
    z = y
    for _ in range(n_iter):
        ab = penalty.copy()
        ab[2] += w
        try:
            z = solveh_banded(ab, w * y, check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise SingularSystem(f"penalized solve failed (lambda={lam:g}): {exc}") from None
        if not np.all(np.isfinite(z)):
            raise SingularSystem(f"penalized solve produced non-finite values (lambda={lam:g})")
        w = np.where(y > z, p, 1.0 - p)
    return BaselineResult(s.x, z, y - z)
