"""Pore segmentation for SEM micrographs."""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .types import Pore, PoreStats

EIGHT = np.ones((3, 3), dtype=bool)


def otsu_threshold(img, bins: int = 256) -> float:
    """Threshold maximizing between-class variance over a ``bins``-bin histogram.

    Pixels strictly below the returned value form the dark class.
    """
    a = np.asarray(img, dtype=float).ravel()
    lo, hi = float(a.min()), float(a.max())
    if lo == hi:
        return lo
    counts, edges = np.histogram(a, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    w0 = np.cumsum(counts)[:-1].astype(float)
    w1 = a.size - w0
    s0 = np.cumsum(counts * centers)[:-1]
    m0 = s0 / np.where(w0 > 0, w0, 1)
    m1 = (np.sum(counts * centers) - s0) / np.where(w1 > 0, w1, 1)
    between = w0 * w1 * (m0 - m1) ** 2
    between[(w0 == 0) | (w1 == 0)] = -1
    k = int(np.argmax(between))
    return float(edges[k + 1])


def _parse_threshold(threshold, img):
    if threshold == "otsu":
        return otsu_threshold(img)
    if isinstance(threshold, (tuple, list)) and len(threshold) == 2 and threshold[0] == "fixed":
        return float(threshold[1])
    if isinstance(threshold, (int, float)) and not isinstance(threshold, bool):
        return float(threshold)
    raise ValueError(f"threshold must be 'otsu' or ('fixed', value), got {threshold!r}")


def sem_pores(img, threshold="otsu", min_area: int = 1) -> PoreStats:
    """Dark 8-connected regions of at least ``min_area`` pixels."""
    a = np.asarray(getattr(img, "data", img), dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("image must be a non-empty 2-D array")
    if min_area < 1:
        raise ValueError("min_area must be at least 1")
    t = _parse_threshold(threshold, a)
    labels, n = ndimage.label(a < t, structure=EIGHT)
    out = np.zeros_like(labels)
    pores = []
    if n:
        areas = np.bincount(labels.ravel(), minlength=n + 1)
        objs = ndimage.find_objects(labels)
        for lab in range(1, n + 1):
            if areas[lab] < min_area:
                continue
            new = len(pores) + 1
            sl = objs[lab - 1]
            region = np.pad(labels[sl] == lab, 1)
            interior = region[1:-1, 1:-1] & region[:-2, 1:-1] & region[2:, 1:-1] & region[1:-1, :-2] & region[1:-1, 2:]
            edge = region[1:-1, 1:-1] & ~interior
            # pixels on the image border touch the outside
            boundary = np.argwhere(edge) + [sl[0].start, sl[1].start]
            rr, cc = np.nonzero(region[1:-1, 1:-1])
            area = int(areas[lab])
            out[sl][region[1:-1, 1:-1]] = new
            pores.append(Pore(
                area=area,
                equivalent_diameter=2.0 * math.sqrt(area / math.pi),
                centroid=(float(rr.mean() + sl[0].start), float(cc.mean() + sl[1].start)),
                boundary=boundary,
            ))
    porosity = sum(p.area for p in pores) / a.size
    return PoreStats(count=len(pores), pores=tuple(pores), porosity=float(porosity), threshold=t, labels=out)
