"""Grain segmentation and coloring for scalar orientation maps (degrees in [0, 180))."""
from __future__ import annotations

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .types import GrainStats

PERIOD = 180.0
HIST_BINS = 90   # misorientation never exceeds 90 degrees


def misorientation(a, b) -> np.ndarray:
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % PERIOD
    return np.minimum(d, PERIOD - d)


def _as_map(m) -> np.ndarray:
    a = np.asarray(getattr(m, "data", m), dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("orientation map must be a non-empty 2-D array")
    return a


def ebsd_grains(m, low_angle: float = 5.0, high_angle: float = 15.0) -> GrainStats:
    """Merge 4-neighbors closer than ``low_angle`` into grains and classify boundaries.

    A boundary pixel is one with a 4-neighbor in a different grain; it is
    tagged by the largest misorientation to such neighbors (low-angle below
    ``high_angle``, high-angle otherwise).
    """
    if not 0 < low_angle < high_angle:
        raise ValueError("thresholds must satisfy 0 < low_angle < high_angle")
    a = _as_map(m)
    rows, cols = a.shape
    idx = np.arange(a.size).reshape(a.shape)
    mis_h = misorientation(a[:, :-1], a[:, 1:])
    mis_v = misorientation(a[:-1, :], a[1:, :])
    src = np.concatenate([idx[:, :-1][mis_h < low_angle], idx[:-1, :][mis_v < low_angle]])
    dst = np.concatenate([idx[:, 1:][mis_h < low_angle], idx[1:, :][mis_v < low_angle]])
    graph = coo_matrix((np.ones(src.size), (src, dst)), shape=(a.size, a.size))
    n, comp = connected_components(graph, directed=False)
    # relabel in raster order of first appearance, starting at 1
    _, first = np.unique(comp, return_index=True)
    order = np.empty(n, dtype=np.int64)
    order[np.argsort(first)] = np.arange(1, n + 1)
    labels = order[comp].reshape(a.shape)

    worst = np.zeros(a.shape)
    diff_h = labels[:, :-1] != labels[:, 1:]
    diff_v = labels[:-1, :] != labels[1:, :]
    wh = np.where(diff_h, mis_h, 0.0)
    wv = np.where(diff_v, mis_v, 0.0)
    worst[:, :-1] = np.maximum(worst[:, :-1], wh)
    worst[:, 1:] = np.maximum(worst[:, 1:], wh)
    worst[:-1, :] = np.maximum(worst[:-1, :], wv)
    worst[1:, :] = np.maximum(worst[1:, :], wv)
    on_edge = np.zeros(a.shape, dtype=bool)
    on_edge[:, :-1] |= diff_h
    on_edge[:, 1:] |= diff_h
    on_edge[:-1, :] |= diff_v
    on_edge[1:, :] |= diff_v
    boundary = np.zeros(a.shape, dtype=np.int8)
    boundary[on_edge & (worst < high_angle)] = GrainStats.LOW
    boundary[on_edge & (worst >= high_angle)] = GrainStats.HIGH
    bmis = np.where(on_edge, worst, 0.0)
    hist = np.histogram(bmis[on_edge], bins=HIST_BINS, range=(0.0, 90.0))[0]
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    return GrainStats(
        labels=labels,
        grain_count=int(n),
        areas={int(k): int(areas[k]) for k in range(1, n + 1)},
        boundary=boundary,
        boundary_misorientation=bmis,
        histogram=hist,
    )


def ipf_colormap(m) -> np.ndarray:
    """RGB uint8 image with hue = theta / 180 * 360 at full saturation and value."""
    a = _as_map(m)
    if np.any((a < 0) | (a >= PERIOD)):
        raise ValueError("orientations must lie in [0, 180)")
    h = a / PERIOD * 6.0
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    q, t = 1.0 - f, f
    one, zero = np.ones_like(f), np.zeros_like(f)
    r = np.choose(i, [one, q, zero, zero, t, one])
    g = np.choose(i, [t, one, one, q, zero, zero])
    b = np.choose(i, [zero, zero, t, one, one, q])
    return np.round(np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)
