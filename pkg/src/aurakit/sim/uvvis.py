"""UV-vis / PL spectrometer model."""
from __future__ import annotations

import math

import numpy as np

from .. import rng
from .base import NotReady, Simulator
from .dataset import Axis, Dataset

SCAN_RATE_DIVISOR = 20
NOISE_AT_100MS = 0.01
EMISSION_NOISE_AT_100MS = 10.0


def scan_axis(start: float, end: float, step: float) -> np.ndarray:
    n = int(math.floor((end - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


class UvVisSim(Simulator):
    """Absorbance A(x) = sum A_i exp(-(x - mu_i)^2 / 2 s_i^2) + b0 + b1 x + noise.

    The Gaussian components and baseline are fixed per seed; the noise standard
    deviation scales as 1 / sqrt(integration_ms).  Emission mode reuses the same
    machine as a photoluminescence analog.
    """

    model_id = "uvvis"

    def setup(self):
        g = rng.stream(self.seed, "uvvis-truth")
        k = int(g.integers(1, 4))
        self.components = [
            {"amplitude": float(g.uniform(0.2, 1.2)), "center": float(g.uniform(300, 700)),
             "sigma": float(g.uniform(15, 45))}
            for _ in range(k)
        ]
        self.baseline = {"b0": float(g.uniform(0.01, 0.08)), "b1": float(g.uniform(-5e-5, 5e-5))}
        self.stokes_shift = float(g.uniform(30, 80))
        self.state = "idle"
        self.scan_index = 0
        self.scan_start = 0
        self.scan_duration = 0
        self.scan_settings: dict = {}
        self.result = None

    # model physics
    def absorbance(self, x):
        x = np.asarray(x, dtype=float)
        y = self.baseline["b0"] + self.baseline["b1"] * x
        for c in self.components:
            y = y + c["amplitude"] * np.exp(-((x - c["center"]) ** 2) / (2 * c["sigma"] ** 2))
        return y

    def emission(self, x, excitation):
        x = np.asarray(x, dtype=float)
        y = np.zeros_like(x)
        for c in self.components:
            # emission strength follows how strongly the component absorbs at the excitation line
            strength = 1000.0 * c["amplitude"] * math.exp(-((excitation - c["center"]) ** 2) / (2 * (3 * c["sigma"]) ** 2))
            y += strength * np.exp(-((x - c["center"] - self.stokes_shift) ** 2) / (2 * (1.2 * c["sigma"]) ** 2))
        y[x < excitation + 10] = 0.0
        return y

    def noise_std(self, integration_ms, emission=False):
        base = EMISSION_NOISE_AT_100MS if emission else NOISE_AT_100MS
        return base * math.sqrt(100.0 / integration_ms)

    # transitions
    def on_click(self, wid):
        v = self.values
        if wid == "start_scan":
            if not v["wavelength_start"] < v["wavelength_end"]:
                self.state = "error"
                v["message"] = "wavelength_start must be below wavelength_end"
                return
            x = scan_axis(v["wavelength_start"], v["wavelength_end"], v["step_nm"])
            self.scan_index += 1
            self.scan_settings = self.parameter_snapshot()
            self.scan_start = self.clock
            self.scan_duration = max(1, math.ceil(x.size * v["integration_ms"] / SCAN_RATE_DIVISOR))
            self.state = "scanning"
            self.result = None
            v["message"] = ""
        elif wid == "abort_scan":
            self.state = "aborted"
        elif wid == "export_spectrum":
            v["last_export"] = f"spectrum#{self.scan_index}"

    def on_time(self, t0, t1):
        if self.state == "scanning" and t1 >= self.scan_start + self.scan_duration:
            self.state = "complete"
            self.result = self._measure()

    def refresh(self):
        v, e = self.values, self.enabled
        if self.state == "scanning":
            v["progress"] = min(1.0, (self.clock - self.scan_start) / self.scan_duration)
            v["preview"] = f"spectrum#{self.scan_index}@{int(v['progress'] * 100)}%"
        elif self.state == "complete":
            v["progress"] = 1.0
            v["preview"] = f"spectrum#{self.scan_index}@100%"
        else:
            v["progress"] = 0.0
        v["status"] = self.state
        e["start_scan"] = bool(v["lamp"]) and self.state != "scanning"
        e["abort_scan"] = self.state == "scanning"
        e["export_spectrum"] = self.state == "complete"
        for w in ("wavelength_start", "wavelength_end", "step_nm", "integration_ms", "mode", "excitation_nm", "lamp"):
            e[w] = self.state != "scanning"

    def _measure(self) -> Dataset:
        s = self.scan_settings
        x = scan_axis(s["wavelength_start"], s["wavelength_end"], s["step_nm"])
        emission = s["mode"] == "emission"
        clean = self.emission(x, s["excitation_nm"]) if emission else self.absorbance(x)
        g = rng.stream(self.seed, "uvvis-noise", self.scan_index)
        y = clean + g.normal(0.0, self.noise_std(s["integration_ms"], emission), size=x.size)
        truth = {"components": self.components, "baseline": self.baseline,
                 "noise_std": self.noise_std(s["integration_ms"], emission)}
        if emission:
            truth["stokes_shift"] = self.stokes_shift
        return Dataset(
            "spectrum", (Axis("wavelength", "nm", x),), y,
            unit="counts" if emission else "absorbance",
            provenance={"model": self.model_id, "seed": self.seed, "clock": self.scan_start + self.scan_duration,
                        "scan": self.scan_index, "parameters": s, "truth": truth},
        )

    def produce(self, dataset_id):
        if self.state != "complete" or self.result is None:
            raise NotReady("no completed scan to export")
        return self.result
