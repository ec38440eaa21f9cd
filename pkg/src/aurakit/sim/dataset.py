"""Typed measurement payloads exported by simulators and generators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from .._canon import canonical_json

PAYLOAD_KINDS = ("spectrum", "complex_spectrum", "image", "height_map", "sinogram", "tga_curve",
                 "orientation_map", "table", "scalar", "figure")


@dataclass(frozen=True, eq=False)
class Axis:
    name: str
    unit: str
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.values is not None:
            v = np.array(self.values, dtype=float)
            v.setflags(write=False)
            object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, Axis):
            return NotImplemented
        if (self.name, self.unit) != (other.name, other.unit):
            return False
        if self.values is None or other.values is None:
            return self.values is None and other.values is None
        return self.values.shape == other.values.shape and bool(np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class Dataset:
    """A measurement: payload kind, axes, values and provenance.

    ``provenance`` records (model id, seed, clock, parameter snapshot) and, for
    generated data, the ground truth under the ``truth`` key.
    """

    payload_kind: str
    axes: tuple
    data: np.ndarray
    unit: str = ""
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.payload_kind not in PAYLOAD_KINDS:
            raise ValueError(f"unknown payload kind {self.payload_kind!r}")
        data = np.array(self.data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "axes", tuple(self.axes))
        if self.payload_kind == "spectrum":
            x = self.axes[0].values
            if x is None or len(x) != data.shape[0] or len(x) < 2 or np.any(np.diff(x) <= 0):
                raise ValueError("spectrum x axis must be strictly increasing and match the data")
        if self.payload_kind in ("image", "height_map", "orientation_map") and (data.ndim != 2 or min(data.shape) < 1):
            raise ValueError("image payloads need a non-empty 2-D array")
        if self.payload_kind == "sinogram":
            if data.ndim != 2 or data.shape[0] != len(self.axes[0].values) or data.shape[1] != len(self.axes[1].values):
                raise ValueError("sinogram shape must be (n_angles, n_detectors)")

    @property
    def x(self) -> np.ndarray:
        return self.axes[0].values

    @property
    def truth(self) -> Mapping[str, Any]:
        return self.provenance.get("truth", {})

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.payload_kind == other.payload_kind and self.unit == other.unit
                and self.axes == other.axes and self.data.shape == other.data.shape
                and self.data.dtype.kind == other.data.dtype.kind
                and bool(np.array_equal(self.data, other.data))
                and canonical_json(self.provenance) == canonical_json(other.provenance))

    def __hash__(self):
        return hash((self.payload_kind, self.data.tobytes()))

    def allclose(self, other: "Dataset", atol: float = 1e-12) -> bool:
        return (self.payload_kind == other.payload_kind and self.data.shape == other.data.shape
                and bool(np.allclose(self.data, other.data, rtol=0, atol=atol)))
