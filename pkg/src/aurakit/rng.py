"""Counter-based random streams keyed by (seed, stream id).

Every random draw in the simulators goes through :func:`stream` so that the
same seed gives the same numbers on every platform; Philox is a
counter-based generator whose output depends only on its key and counter.
"""
from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(seed: int, stream_id: str, *counters: int) -> int:
    if not 0 <= int(seed) <= _MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    text = ":".join([str(int(seed)), stream_id, *(str(int(c)) for c in counters)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:16], "little")


def stream(seed: int, stream_id: str, *counters: int) -> np.random.Generator:
    """Return a fresh generator for the named stream."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, stream_id, *counters)))
