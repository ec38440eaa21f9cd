"""Multi-Gaussian least-squares fitting with Levenberg-Marquardt damping."""
from __future__ import annotations

import numpy as np

from .peaks import detect_peaks
from .types import DegenerateInit, GaussianFit, Spectrum, TooFewSamples

MAX_ITER = 200
COST_RTOL = 1e-10
GRAD_ATOL = 1e-12


def gaussian_model(x, params) -> np.ndarray:
    """Sum of Gaussians plus offset; ``params`` is [A1, mu1, s1, ..., Ak, muk, sk, c]."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(params, dtype=float)
    y = np.full_like(x, p[-1])
    for a, mu, sig in p[:-1].reshape(-1, 3):
        y += a * np.exp(-((x - mu) ** 2) / (2 * sig * sig))
    return y


def gaussian_jacobian(x, params) -> np.ndarray:
    """Analytic d(model)/d(params), shape (len(x), len(params))."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(params, dtype=float)
    J = np.empty((x.size, p.size))
    for j, (a, mu, sig) in enumerate(p[:-1].reshape(-1, 3)):
        d = x - mu
        g = np.exp(-(d * d) / (2 * sig * sig))
        J[:, 3 * j] = g
        J[:, 3 * j + 1] = a * g * d / sig ** 2
        J[:, 3 * j + 2] = a * g * d * d / sig ** 3
    J[:, -1] = 1.0
    return J


def levenberg_marquardt(x, y, p0, max_iter: int = MAX_ITER):
    """Minimize 0.5 * ||model(p) - y||^2; returns (params, converged, iterations)."""
    p = np.array(p0, dtype=float)
    r = gaussian_model(x, p) - y
    cost = 0.5 * float(r @ r)
    lam = 1.0  # conservative first steps; wide default widths otherwise overshoot
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        J = gaussian_jacobian(x, p)
        grad = J.T @ r
        if np.max(np.abs(grad)) < GRAD_ATOL or cost == 0.0:
            converged = True
            break
        A = J.T @ J
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        try:
            step = np.linalg.solve(A + lam * np.diag(diag), -grad)
        except np.linalg.LinAlgError:
            lam *= 10
            continue
        p_new = p + step
        r_new = gaussian_model(x, p_new) - y
        cost_new = 0.5 * float(r_new @ r_new)
        if np.isfinite(cost_new) and cost_new < cost:
            rel = (cost - cost_new) / cost
            p, r, cost = p_new, r_new, cost_new
            lam = max(lam / 10, 1e-15)
            if rel < COST_RTOL:
                converged = True
                break
        else:
            lam *= 10
            if lam > 1e16:
                # no descent direction left at working precision
                converged = True
                break
    return p, converged, it


def initial_guess(s: Spectrum, k: int) -> np.ndarray:
    peaks = detect_peaks(s, 0.0, 1)
    if len(peaks) < k:
        raise DegenerateInit(f"asked for {k} components but only {len(peaks)} peaks are detectable")
    peaks = sorted(peaks, key=lambda pk: (-pk.prominence, pk.index))[:k]
    c0 = float(np.min(s.y))
    width = float(s.x[-1] - s.x[0]) / (4 * k)
    p = []
    for pk in sorted(peaks, key=lambda pk: pk.position):
        p += [pk.height - c0, pk.position, width]
    return np.array(p + [c0])


def fit_gaussians(s: Spectrum, interval=None, k: int = 1, init=None) -> list[GaussianFit]:
    """Fit ``k`` Gaussians with a shared constant offset over ``interval``.

    Without ``init`` the components are seeded from the k most prominent
    detected peaks (centre = position, amplitude = height above the window
    minimum, width = interval width / 4k).  Returned fits are sorted by centre
    with positive widths.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if interval is not None:
        m = (s.x >= interval[0]) & (s.x <= interval[1])
        if int(m.sum()) < 3 * k + 1:
            raise TooFewSamples(f"need at least {3 * k + 1} samples in the interval, found {int(m.sum())}")
        w = Spectrum(s.x[m], s.y[m], s.x_unit, s.y_unit)
    else:
        w = s
        if len(w) < 3 * k + 1:
            raise TooFewSamples(f"need at least {3 * k + 1} samples")
    x, y = np.asarray(w.x), np.asarray(w.y)
    if init is None:
        p0 = initial_guess(w, k)
    else:
        init = list(init)
        if len(init) != k:
            raise ValueError(f"init needs {k} (A, mu, sigma) triples")
        p0 = np.array([v for triple in init for v in triple] + [float(np.min(y))])
    p, converged, it = levenberg_marquardt(x, y, p0)
    r = gaussian_model(x, p) - y
    rmse = float(np.sqrt(np.mean(r * r)))
    fits = [GaussianFit(float(a), float(mu), float(abs(sig)), float(p[-1]), rmse, converged, it)
            for a, mu, sig in p[:-1].reshape(-1, 3)]
    return sorted(fits, key=lambda f: f.center)
