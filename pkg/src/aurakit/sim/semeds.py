"""Scanning electron microscope with an EDS detector."""
from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import gaussian_filter

from .. import rng
from .base import NotReady, Simulator
from .dataset import Axis, Dataset

PUMP_MS = 3000
VENT_MS = 1000
IMAGE_MS = 2000
IMAGE_PX = 128
FOV_AT_1X_UM = 127000.0
EDS_QUANTUM_MS = 100
FOCUS_WIDTH = 8.0

ENERGY = np.round(np.arange(0.1, 10.0 + 1e-9, 0.02), 6)
SNR_PEAK_WINDOW = (6.39, 6.41)   # the Fe K-alpha channel alone, so the numerator is unbiased
SNR_BG_WINDOW = (7.30, 7.70)
LINE_SIGMA_KEV = 0.06

# (symbol, atomic mass g/mol, [(line energy keV, relative intensity), ...])
ELEMENTS = {
    "O": (15.999, [(0.525, 1.0)]),
    "Al": (26.982, [(1.487, 1.0)]),
    "Si": (28.085, [(1.740, 1.0)]),
    "Fe": (55.845, [(6.404, 1.0), (7.058, 0.13), (0.705, 0.15)]),
    "Cu": (63.546, [(8.048, 1.0), (8.905, 0.14), (0.930, 0.15)]),
}
LINE_RATE = 2000.0     # counts/s per unit weight fraction at unit beam factor
BREMS_RATE = 20.0       # counts/s/channel scale of the continuum


def window_snr(x, y, peak_window, bg_window) -> float:
    x = np.asarray(x)
    y = np.asarray(y, dtype=float)
    pk = y[(x >= peak_window[0]) & (x <= peak_window[1])]
    bg = y[(x >= bg_window[0]) & (x <= bg_window[1])]
    num = pk.max() - bg.mean()
    sd = bg.std()
    if sd == 0:
        return 0.0 if num == 0 else math.inf
    return float(max(0.0, num / sd))


class SemEdsSim(Simulator):
    """SEM imaging and EDS acquisition.

    The vacuum is a timed chain vented -> pumping -> ready.  Image sharpness is
    a Gaussian in |focus - optimum| with the optimum fixed per seed.  EDS
    counts accumulate as Poisson draws in 100 ms quanta so the expected
    signal-to-noise ratio grows as sqrt(dwell).
    """

    model_id = "sem-eds"

    def setup(self):
        g = rng.stream(self.seed, "sem-truth")
        self.focus_optimum = float(g.uniform(20, 80))
        # beam/count-rate factor varies over two decades between samples
        self.beam_factor = float(math.exp(g.uniform(math.log(0.2), math.log(2.0))))
        fe, cu = g.uniform(0.15, 0.4), g.uniform(0.15, 0.3)
        rest = g.dirichlet([1.0, 1.0, 1.0]) * (1.0 - fe - cu)
        wt = dict(zip(["O", "Al", "Si", "Fe", "Cu"], [rest[0], rest[1], rest[2], fe, cu]))
        self.composition_wt = {k: float(v * 100) for k, v in wt.items()}
        n_pores = int(g.integers(25, 45))
        self.pores = [(float(g.uniform(-150, 150)), float(g.uniform(-150, 150)), float(g.uniform(2, 8)))
                      for _ in range(n_pores)]
        self.vacuum = "vented"
        self.vacuum_since = 0
        self.image_state, self.image_start, self.image_index, self.image_settings = "idle", 0, 0, {}
        self.image = None
        self.eds_state = "idle"
        self.eds_start = 0
        self.eds_dwell = 0
        self.eds_done_quanta = 0
        self.eds_index = 0
        self.eds_rate = None
        self.eds_rng = None
        self.counts = np.zeros(ENERGY.size, dtype=np.int64)
        self.live_seconds = 0.0
        self.eds_settings: dict = {}

    # -- physics
    def sharpness(self) -> float:
        if not self.values["beam"]:
            return 0.0
        return round(math.exp(-(((self.values["focus"] - self.focus_optimum) / FOCUS_WIDTH) ** 2)), 6)

    def eds_rate_per_ms(self, kv: float) -> np.ndarray:
        """Expected counts per ms per channel at accelerating voltage ``kv``."""
        e = ENERGY
        brems = np.where(e < kv, BREMS_RATE * (kv - e) / e * (1 - np.exp(-e / 0.8)), 0.0)
        lines = np.zeros_like(e)
        width = ENERGY[1] - ENERGY[0]
        for sym, wt in self.composition_wt.items():
            for energy, rel in ELEMENTS[sym][1]:
                if energy < 0.75 * kv:
                    area = LINE_RATE * wt / 100.0 * rel
                    lines += area * width / (LINE_SIGMA_KEV * math.sqrt(2 * math.pi)) * np.exp(
                        -((e - energy) ** 2) / (2 * LINE_SIGMA_KEV ** 2))
        return self.beam_factor * (brems + lines) / 1000.0

    def render_image(self, settings) -> np.ndarray:
        mag = settings["magnification"]
        fov = FOV_AT_1X_UM / mag
        px = fov / IMAGE_PX
        coords = (np.arange(IMAGE_PX) - (IMAGE_PX - 1) / 2) * px
        X, Y = np.meshgrid(coords, coords)
        img = np.full(X.shape, 190.0)
        img += 8.0 * np.sin(X / 23.0) * np.cos(Y / 31.0)
        for cx, cy, r in self.pores:
            img[(X - cx) ** 2 + (Y - cy) ** 2 <= r * r] = 45.0
        img *= 0.85 + 0.01 * settings["accel_voltage"]
        blur = abs(settings["focus"] - self.focus_optimum) * 0.3
        if blur > 0:
            img = gaussian_filter(img, blur, mode="nearest")
        g = rng.stream(self.seed, "sem-image-noise", self.image_index)
        img = img + g.normal(0, 4.0, img.shape)
        return np.clip(np.round(img), 0, 255).astype(np.uint8)

    # -- transitions
    def on_click(self, wid):
        v = self.values
        if wid == "pump":
            self.vacuum, self.vacuum_since = "pumping", self.clock
        elif wid == "vent":
            self.vacuum, self.vacuum_since = "venting", self.clock
            v["beam"] = False
        elif wid == "acquire_image":
            self.image_index += 1
            self.image_state, self.image_start = "scanning", self.clock
            self.image_settings = self.parameter_snapshot()
            self.image = None
        elif wid == "start_eds":
            self.eds_index += 1
            self.eds_state, self.eds_start = "acquiring", self.clock
            self.eds_dwell = int(v["dwell_ms"])
            self.eds_done_quanta = 0
            self.eds_settings = self.parameter_snapshot()
            self.eds_rate = self.eds_rate_per_ms(v["accel_voltage"])
            self.eds_rng = rng.stream(self.seed, "eds-counts", self.eds_index)
        elif wid == "stop_eds":
            self.eds_state = "complete"
        elif wid == "clear_eds":
            self.counts = np.zeros(ENERGY.size, dtype=np.int64)
            self.live_seconds = 0.0
            self.eds_state = "idle"
        elif wid == "export_image":
            v["last_export"] = f"sem_image#{self.image_index}"
        elif wid == "export_eds":
            v["last_export"] = f"eds_spectrum#{self.eds_index}"

    def on_time(self, t0, t1):
        if self.vacuum == "pumping" and t1 >= self.vacuum_since + PUMP_MS:
            self.vacuum = "ready"
        elif self.vacuum == "venting" and t1 >= self.vacuum_since + VENT_MS:
            self.vacuum = "vented"
        if self.image_state == "scanning" and t1 >= self.image_start + IMAGE_MS:
            self.image_state = "complete"
            self.image = self.render_image(self.image_settings)
        if self.eds_state == "acquiring":
            n_quanta = math.ceil(self.eds_dwell / EDS_QUANTUM_MS)
            while self.eds_done_quanta < n_quanta:
                q_end = self.eds_start + min((self.eds_done_quanta + 1) * EDS_QUANTUM_MS, self.eds_dwell)
                if q_end > t1:
                    break
                q_len = q_end - (self.eds_start + self.eds_done_quanta * EDS_QUANTUM_MS)
                self.counts = self.counts + self.eds_rng.poisson(self.eds_rate * q_len)
                self.live_seconds += q_len / 1000.0
                self.eds_done_quanta += 1
            if self.eds_done_quanta >= n_quanta:
                self.eds_state = "complete"

    def refresh(self):
        v, e = self.values, self.enabled
        v["vacuum"] = self.vacuum
        if self.vacuum == "pumping":
            el = self.clock - self.vacuum_since
            v["chamber_pressure"] = round(101325.0 * math.exp(-el / 200.0) + 1e-3, 6)
        elif self.vacuum == "ready":
            v["chamber_pressure"] = round(101325.0 * math.exp(-PUMP_MS / 200.0) + 1e-3, 6)
        else:
            v["chamber_pressure"] = 101325.0
        ready = self.vacuum == "ready"
        if not ready:
            v["beam"] = False
        v["sharpness"] = self.sharpness()
        v["image_status"] = self.image_state
        if self.image_state == "scanning":
            v["image_progress"] = min(1.0, (self.clock - self.image_start) / IMAGE_MS)
        else:
            v["image_progress"] = 1.0 if self.image_state == "complete" else 0.0
        v["image_preview"] = f"sem_image#{self.image_index}@{int(v['image_progress'] * 100)}%" if self.image_index else ""
        v["eds_status"] = self.eds_state
        if self.eds_state == "acquiring":
            v["eds_progress"] = min(1.0, (self.clock - self.eds_start) / self.eds_dwell)
        else:
            v["eds_progress"] = 1.0 if self.eds_state == "complete" else 0.0
        v["eds_counts"] = int(self.counts.sum())
        v["live_snr"] = round(window_snr(ENERGY, self.counts, SNR_PEAK_WINDOW, SNR_BG_WINDOW), 3) \
            if self.counts.any() else 0.0
        if v["live_snr"] == math.inf:
            v["live_snr"] = 1e9
        v["eds_preview"] = f"eds_spectrum#{self.eds_index}:{v['eds_counts']}" if self.eds_index else ""

        acquiring = self.eds_state == "acquiring"
        imaging = self.image_state == "scanning"
        e["pump"] = self.vacuum == "vented"
        e["vent"] = ready and not acquiring and not imaging
        e["beam"] = ready and not acquiring and not imaging
        e["acquire_image"] = ready and bool(v["beam"]) and not imaging and not acquiring
        e["export_image"] = self.image_state == "complete"
        e["start_eds"] = ready and bool(v["beam"]) and not acquiring and not imaging
        e["stop_eds"] = acquiring
        e["clear_eds"] = not acquiring and bool(self.counts.any())
        e["export_eds"] = not acquiring and bool(self.counts.any())
        for w in ("accel_voltage", "magnification", "working_distance", "dwell_ms"):
            e[w] = not acquiring and not imaging

    def produce(self, dataset_id):
        base = {"model": self.model_id, "seed": self.seed}
        if dataset_id == "sem_image":
            if self.image_state != "complete" or self.image is None:
                raise NotReady("no completed SEM image")
            s = self.image_settings
            fov = FOV_AT_1X_UM / s["magnification"]
            px = fov / IMAGE_PX
            coords = (np.arange(IMAGE_PX) - (IMAGE_PX - 1) / 2) * px
            return Dataset("image", (Axis("y", "um", coords), Axis("x", "um", coords)), self.image, unit="gray",
                           provenance={**base, "clock": self.image_start + IMAGE_MS, "image": self.image_index,
                                       "parameters": s, "fov_um": fov, "pixel_size_um": px,
                                       "truth": {"focus_optimum": self.focus_optimum,
                                                 "pores_um": [list(p) for p in self.pores]}})
        if self.eds_state == "acquiring" or not self.counts.any():
            raise NotReady("EDS acquisition incomplete or empty")
        return Dataset("spectrum", (Axis("energy", "keV", ENERGY),), self.counts.copy(), unit="counts",
                       provenance={**base, "clock": self.eds_start + self.eds_dwell, "acquisition": self.eds_index,
                                   "live_time_s": self.live_seconds, "parameters": self.eds_settings,
                                   "snr_windows": {"peak": list(SNR_PEAK_WINDOW), "background": list(SNR_BG_WINDOW)},
                                   "truth": {"composition_wt": self.composition_wt,
                                             "atomic_mass": {k: ELEMENTS[k][0] for k in self.composition_wt},
                                             "lines_keV": {k: [ln[0] for ln in ELEMENTS[k][1]] for k in self.composition_wt},
                                             "beam_factor": self.beam_factor}})
