"""Canonical serialization helpers shared by artifacts, traces and snapshots."""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np


def _normalize(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _normalize(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f) or math.isinf(f):
            # JSON has no spelling for these; keep them distinguishable
            return {"__float__": repr(f)}
        return f
    if isinstance(obj, str):
        return obj.replace("\r\n", "\n").replace("\r", "\n")
    return obj


def canonical_json(obj: Any) -> str:
    """Compact JSON with sorted keys and LF-only strings."""
    return json.dumps(_normalize(obj), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def pretty_json(obj: Any) -> str:
    """Human-readable canonical form used for files on disk."""
    return json.dumps(_normalize(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sha256_hex(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def digest_of(obj: Any) -> str:
    return sha256_hex(canonical_json(obj))
