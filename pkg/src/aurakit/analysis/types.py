"""Value types returned by the analysis operations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import AurakitError


class AnalysisError(AurakitError):
    pass


class SingularSystem(AnalysisError):
    pass


class TooFewSamples(AnalysisError):
    pass


class DegenerateInit(AnalysisError):
    pass


class EmptyRange(AnalysisError):
    pass


class NonMonotonicTemperature(AnalysisError):
    pass


class OutOfBounds(AnalysisError):
    pass


class ZeroMass(AnalysisError):
    pass


class EmptyWindow(AnalysisError):
    pass


def _frozen_array(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Spectrum:
    x: np.ndarray
    y: np.ndarray
    x_unit: str = ""
    y_unit: str = ""

    def __post_init__(self):
        x, y = _frozen_array(self.x), _frozen_array(self.y)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("spectrum needs matching 1-D x and y with at least 2 samples")
        if np.any(np.diff(x) <= 0):
            raise ValueError("spectrum x must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.x.size

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (self.x_unit, self.y_unit) == (other.x_unit, other.y_unit) and \
            np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)

    def window(self, lo, hi) -> "Spectrum":
        m = (self.x >= lo) & (self.x <= hi)
        return Spectrum(self.x[m], self.y[m], self.x_unit, self.y_unit)


@dataclass(frozen=True, eq=False)
class ComplexSpectrum:
    x: np.ndarray
    values: np.ndarray
    x_unit: str = "ppm"

    def __post_init__(self):
        x = _frozen_array(self.x)
        v = _frozen_array(self.values, complex)
        if x.shape != v.shape or x.ndim != 1:
            raise ValueError("complex spectrum needs matching 1-D x and values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def real(self) -> Spectrum:
        return Spectrum(self.x, self.values.real, self.x_unit, "a.u.")

    def __eq__(self, other):
        if not isinstance(other, ComplexSpectrum):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    prominence: float
    index: int


@dataclass(frozen=True)
class GaussianFit:
    amplitude: float
    center: float
    sigma: float
    offset: float
    rmse: float
    converged: bool
    iterations: int


@dataclass(frozen=True, eq=False)
class BaselineResult:
    x: np.ndarray
    baseline: np.ndarray
    corrected: np.ndarray

    @property
    def corrected_spectrum(self) -> Spectrum:
        return Spectrum(self.x, self.corrected)

    @property
    def baseline_spectrum(self) -> Spectrum:
        return Spectrum(self.x, self.baseline)


@dataclass(frozen=True)
class TgaStep:
    onset_temperature: float
    mass_loss_pct: float
    dtg_peak_temperature: float
    enthalpy: Optional[float] = None
    window: tuple = ()


@dataclass(frozen=True)
class AFMRoughness:
    ra: float
    rq: float


@dataclass(frozen=True)
class CompositionEntry:
    element: str
    atomic_mass: float
    fraction: float


@dataclass(frozen=True)
class Composition:
    entries: tuple
    basis: str  # weight | atomic

    def __post_init__(self):
        if self.basis not in ("weight", "atomic"):
            raise ValueError(f"basis must be 'weight' or 'atomic', got {self.basis!r}")
        names = [e.element for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("element symbols must be unique")
        if not names:
            raise ValueError("composition needs at least one element")
        if any(e.fraction < 0 for e in self.entries):
            raise ValueError("fractions must be non-negative")
        total = sum(e.fraction for e in self.entries)
        if abs(total - 100.0) > 1e-6:
            raise ValueError(f"fractions must sum to 100, got {total}")

    def as_dict(self) -> dict:
        return {e.element: e.fraction for e in self.entries}

    @classmethod
    def from_fractions(cls, fractions: dict, masses: dict, basis: str = "weight") -> "Composition":
        return cls(tuple(CompositionEntry(k, float(masses[k]), float(v)) for k, v in fractions.items()), basis)


@dataclass(frozen=True, eq=False)
class Pore:
    area: int
    equivalent_diameter: float
    centroid: tuple
    boundary: np.ndarray  # (k, 2) row/col pixel coordinates


@dataclass(frozen=True, eq=False)
class PoreStats:
    count: int
    pores: tuple
    porosity: float
    threshold: float
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def areas(self) -> np.ndarray:
        return np.array([p.area for p in self.pores], dtype=float)

    @property
    def diameters(self) -> np.ndarray:
        return np.array([p.equivalent_diameter for p in self.pores], dtype=float)


@dataclass(frozen=True, eq=False)
class GrainStats:
    labels: np.ndarray
    grain_count: int
    areas: dict
    boundary: np.ndarray      # 0 none, 1 low-angle, 2 high-angle
    boundary_misorientation: np.ndarray
    histogram: np.ndarray     # counts per 1-degree bin over [0, 90]

    NONE, LOW, HIGH = 0, 1, 2


@dataclass(frozen=True)
class FTIRAssignment:
    position: float
    group: Optional[str] = None
    lo: Optional[float] = None
    hi: Optional[float] = None

    @property
    def assigned(self) -> bool:
        return self.group is not None
