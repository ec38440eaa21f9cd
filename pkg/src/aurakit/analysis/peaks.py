"""Peak detection by topographic prominence."""
from __future__ import annotations

import numpy as np
from scipy.signal import find_peaks, peak_prominences

from .types import Peak, Spectrum


def detect_peaks(s: Spectrum, min_prominence: float = 0.0, min_distance: int = 1) -> list[Peak]:
    """Local maxima whose prominence is at least ``min_prominence``.

    Flat-topped maxima are reported at the middle sample (left-middle for even
    plateaus).  Among surviving maxima closer than ``min_distance`` samples the
    higher one is kept, ties going to the lower index.  Sorted by position.
    """
    if min_prominence < 0 or min_distance < 1:
        raise ValueError("min_prominence must be >= 0 and min_distance >= 1")
    y = np.asarray(s.y, dtype=float)
    idx, _ = find_peaks(y)
    if idx.size == 0:
        return []
    prom = peak_prominences(y, idx)[0]
    keep = prom >= min_prominence
    idx, prom = idx[keep], prom[keep]
    if min_distance > 1 and idx.size > 1:
        order = sorted(range(idx.size), key=lambda k: (-y[idx[k]], idx[k]))
        taken: list[int] = []
        for k in order:
            if all(abs(int(idx[k]) - int(idx[j])) >= min_distance for j in taken):
                taken.append(k)
        taken.sort()
        idx, prom = idx[taken], prom[taken]
    return [Peak(float(s.x[i]), float(y[i]), float(p), int(i)) for i, p in zip(idx, prom)]
