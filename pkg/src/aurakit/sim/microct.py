"""Micro-CT scanner producing parallel-beam sinograms of a seeded phantom."""
from __future__ import annotations

import math

import numpy as np

from .. import rng
from .base import NotReady, Simulator
from .dataset import Axis, Dataset
from .tomo import rasterize_disks, simulate_sinogram

FIELD_UM = 640.0
RECON_MS = 500


def phantom_disks(seed: int):
    """Disks as (cx, cy, r, value) in units of the field of view (centre 0, side 1)."""
    g = rng.stream(seed, "microct-truth")
    disks = [(0.0, 0.0, 0.38, 1.0)]
    for _ in range(int(g.integers(3, 7))):
        r = float(g.uniform(0.03, 0.09))
        ang, rad = g.uniform(0, 2 * math.pi), g.uniform(0, 0.38 - r - 0.02)
        disks.append((float(rad * math.cos(ang)), float(rad * math.sin(ang)), r, float(g.choice([0.0, 2.0]))))
    return disks


def render_phantom(disks, n: int) -> np.ndarray:
    c = (n - 1) / 2.0
    return rasterize_disks(n, [(c + x * n, c + y * n, r * n, v) for x, y, r, v in disks])


class MicroCtSim(Simulator):
    """Scan duration is n_angles * exposure_ms / 10; projection noise scales as
    1 / sqrt(exposure_ms); the detector count follows the spatial resolution."""

    model_id = "microct"

    def setup(self):
        self.disks = phantom_disks(self.seed)
        self.state = "idle"
        self.scan_index = 0
        self.scan_start = 0
        self.scan_duration = 0
        self.recon_start = 0
        self.settings: dict = {}
        self.sinogram = None
        self.reconstruction = None

    def n_detectors(self, resolution_um: float) -> int:
        return int(round(FIELD_UM / resolution_um))

    def on_click(self, wid):
        v = self.values
        if wid == "start_scan":
            self.scan_index += 1
            self.settings = self.parameter_snapshot()
            self.scan_start = self.clock
            self.scan_duration = max(1, math.ceil(v["n_angles"] * v["exposure_ms"] / 10))
            self.state = "scanning"
            self.sinogram = self.reconstruction = None
        elif wid == "reconstruct":
            self.state, self.recon_start = "reconstructing", self.clock
        elif wid == "export_sinogram":
            v["last_export"] = f"sinogram#{self.scan_index}"
        elif wid == "export_reconstruction":
            v["last_export"] = f"reconstruction#{self.scan_index}"

    def on_time(self, t0, t1):
        if self.state == "scanning" and t1 >= self.scan_start + self.scan_duration:
            self.state = "complete"
            self.sinogram = self._measure()
        if self.state == "reconstructing" and t1 >= self.recon_start + RECON_MS:
            from ..analysis.ct import fbp_reconstruct

            self.state = "reconstructed"
            self.reconstruction = fbp_reconstruct(self.sinogram.data, "ramlak")

    def refresh(self):
        v, e = self.values, self.enabled
        v["status"] = self.state
        if self.state == "scanning":
            v["progress"] = min(1.0, (self.clock - self.scan_start) / self.scan_duration)
        elif self.state == "reconstructing":
            v["progress"] = min(1.0, (self.clock - self.recon_start) / RECON_MS)
        else:
            v["progress"] = 1.0 if self.state in ("complete", "reconstructed") else 0.0
        v["preview"] = f"sinogram#{self.scan_index}@{int(v['progress'] * 100)}%" if self.scan_index else ""
        busy = self.state in ("scanning", "reconstructing")
        e["start_scan"] = bool(v["source"]) and not busy
        e["reconstruct"] = self.state == "complete"
        e["export_sinogram"] = self.state in ("complete", "reconstructed")
        e["export_reconstruction"] = self.state == "reconstructed"
        for w in ("resolution_um", "n_angles", "exposure_ms", "source"):
            e[w] = not busy

    def _measure(self) -> Dataset:
        s = self.settings
        n = self.n_detectors(s["resolution_um"])
        phantom = render_phantom(self.disks, n)
        clean = simulate_sinogram(phantom, s["n_angles"], n)
        g = rng.stream(self.seed, "microct-noise", self.scan_index)
        noise_std = 0.5 * math.sqrt(100.0 / s["exposure_ms"])
        data = clean + g.normal(0, noise_std, clean.shape)
        angles = np.arange(s["n_angles"]) * (180.0 / s["n_angles"])
        det = np.arange(n) - (n - 1) / 2
        return Dataset("sinogram", (Axis("angle", "deg", angles), Axis("detector", "px", det)), data,
                       unit="line integral",
                       provenance={"model": self.model_id, "seed": self.seed,
                                   "clock": self.scan_start + self.scan_duration, "scan": self.scan_index,
                                   "parameters": s, "pixel_size_um": FIELD_UM / n,
                                   "truth": {"disks": [list(d) for d in self.disks], "noise_std": noise_std}})

    def produce(self, dataset_id):
        if dataset_id == "sinogram":
            if self.sinogram is None:
                raise NotReady("no completed scan")
            return self.sinogram
        if self.reconstruction is None:
            raise NotReady("no reconstruction")
        n = self.reconstruction.shape[0]
        px = self.sinogram.provenance["pixel_size_um"]
        coords = (np.arange(n) - (n - 1) / 2) * px
        return Dataset("image", (Axis("y", "um", coords), Axis("x", "um", coords)), self.reconstruction,
                       unit="attenuation",
                       provenance={**self.sinogram.provenance, "clock": self.recon_start + RECON_MS,
                                   "reconstruction": "fbp-ramlak"})
