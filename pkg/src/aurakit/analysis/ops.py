"""Named analysis operations and Type-2 pipeline evaluation.

Pipeline nodes refer to operations by the names in ``OPS``. Arguments are
bound with small JSON objects:

    {"input": "spectrum"}              a pipeline input
    {"param": "peak_window"}           a manifest parameter
    {"node": "fit", "field": "0.center"}  an earlier node's output (dotted path)
    {"const": [7.3, 7.7]}              a literal; bare non-object JSON values also work
"""
from __future__ import annotations

import dataclasses
import math
from typing import Any, Callable, Mapping

import numpy as np

from ..sim.dataset import Dataset
from . import afm, baseline, ct, ebsd, eds, fitting, ftir, nmr, peaks, sem, tga
from .types import AnalysisError, ComplexSpectrum, Composition, Spectrum


class PipelineError(AnalysisError):
    """A pipeline could not be evaluated (bad binding, unknown op or op failure)."""

    def __init__(self, message: str, node: str | None = None):
        super().__init__(message)
        self.node = node


# -- coercion from datasets ----------------------------------------------------

def as_spectrum(v) -> Spectrum:
    if isinstance(v, Spectrum):
        return v
    if isinstance(v, Dataset):
        if v.payload_kind not in ("spectrum", "tga_curve"):
            raise PipelineError(f"expected a spectrum, got {v.payload_kind}")
        return Spectrum(np.asarray(v.x), np.asarray(v.data, dtype=float), v.axes[0].unit, v.unit)
    if isinstance(v, Mapping) and "x" in v and "y" in v:
        return Spectrum(np.asarray(v["x"], float), np.asarray(v["y"], float))
    raise PipelineError(f"cannot interpret {type(v).__name__} as a spectrum")


def as_complex(v) -> ComplexSpectrum:
    if isinstance(v, ComplexSpectrum):
        return v
    if isinstance(v, Dataset) and v.payload_kind == "complex_spectrum":
        return ComplexSpectrum(np.asarray(v.x), np.asarray(v.data), v.axes[0].unit)
    raise PipelineError(f"cannot interpret {type(v).__name__} as a complex spectrum")


def as_grid(v) -> np.ndarray:
    if isinstance(v, Dataset):
        return np.asarray(v.data, dtype=float)
    return np.asarray(v, dtype=float)


def as_composition(v) -> Composition:
    if isinstance(v, Composition):
        return v
    if isinstance(v, Mapping) and "entries" in v:
        entries = v["entries"]
        return Composition.from_fractions({e["element"]: e["fraction"] for e in entries},
                                          {e["element"]: e["atomic_mass"] for e in entries}, v.get("basis", "weight"))
    raise PipelineError(f"cannot interpret {type(v).__name__} as a composition")


def as_peaks(v):
    if isinstance(v, Spectrum) or isinstance(v, Dataset):
        return peaks.detect_peaks(as_spectrum(v))
    return list(v)


@dataclasses.dataclass(frozen=True)
class Op:
    name: str
    func: Callable
    coerce: Mapping[str, Callable]
    output: str   # payload kind of the result, for documentation and manifests


def _window(v):
    return tuple(float(a) for a in v)


OPS: dict[str, Op] = {}


def register(name, func, output, **coerce):
    OPS[name] = Op(name, func, coerce, output)


register("baseline_asls", baseline.baseline_asls, "spectrum", s=as_spectrum)
register("detect_peaks", peaks.detect_peaks, "table", s=as_spectrum)
register("fit_gaussians", fitting.fit_gaussians, "table", s=as_spectrum, interval=_window)
register("ftir_assign", ftir.ftir_assign, "table", peaks=as_peaks)
register("nmr_phase", nmr.nmr_phase, "complex_spectrum", cs=as_complex)
register("nmr_autophase", nmr.nmr_autophase, "table", cs=as_complex)
register("nmr_integrate", nmr.nmr_integrate, "table", s=as_spectrum)
register("tga_steps", tga.tga_steps, "table", curve=as_spectrum, heat_flow=as_spectrum)
register("afm_level_plane", afm.afm_level_plane, "height_map", h=as_grid)
register("afm_roughness", afm.afm_roughness, "scalar", h=as_grid)
register("afm_profile", afm.afm_profile, "spectrum", h=as_grid)
register("sem_pores", sem.sem_pores, "table", img=as_grid)
register("eds_convert", eds.eds_convert, "table", c=as_composition)
register("eds_snr", eds.eds_snr, "scalar", s=as_spectrum, peak_window=_window, bg_window=_window)
register("fbp_reconstruct", ct.fbp_reconstruct, "image", sg=as_grid)
register("ebsd_grains", ebsd.ebsd_grains, "table", m=as_grid)
register("ipf_colormap", ebsd.ipf_colormap, "image", m=as_grid)


def known_ops() -> set[str]:
    return set(OPS)


def call_op(name: str, **kwargs):
    op = OPS.get(name)
    if op is None:
        raise PipelineError(f"unknown analysis op {name!r}")
    args = {}
    for k, v in kwargs.items():
        conv = op.coerce.get(k)
        args[k] = conv(v) if conv is not None and v is not None else v
    return op.func(**args)


# -- bindings ------------------------------------------------------------------

def binding_refs(binding) -> tuple[str, str] | None:
    """(kind, name) for input/param/node bindings, None for constants."""
    if isinstance(binding, Mapping):
        for kind in ("input", "param", "node"):
            if kind in binding:
                return kind, str(binding[kind])
    return None


def get_field(value, path: str | None):
    if not path:
        return value
    for part in str(path).split("."):
        if isinstance(value, Mapping):
            value = value[part]
        elif isinstance(value, (list, tuple)) and part.lstrip("-").isdigit():
            value = value[int(part)]
        else:
            value = getattr(value, part)
    return value


def resolve_binding(binding, inputs, params, results):
    if isinstance(binding, Mapping):
        if "const" in binding:
            return binding["const"]
        if "input" in binding:
            name = binding["input"]
            if name not in inputs:
                raise PipelineError(f"missing pipeline input {name!r}")
            return get_field(inputs[name], binding.get("field"))
        if "param" in binding:
            name = binding["param"]
            if name not in params:
                raise PipelineError(f"missing parameter {name!r}")
            return params[name]
        if "node" in binding:
            name = binding["node"]
            if name not in results:
                raise PipelineError(f"node {name!r} has not been evaluated")
            try:
                return get_field(results[name], binding.get("field"))
            except (KeyError, IndexError, AttributeError) as exc:
                raise PipelineError(f"no field {binding.get('field')!r} on node {name!r}") from exc
        if "list" in binding:
            return [resolve_binding(b, inputs, params, results) for b in binding["list"]]
        raise PipelineError(f"unrecognized binding {dict(binding)!r}")
    return binding


def run_pipeline(pipeline, inputs: Mapping[str, Any], params: Mapping[str, Any] | None = None) -> dict:
    """Evaluate nodes in order; return {output name: value}."""
    params = dict(params or {})
    results: dict[str, Any] = {}
    for node in pipeline.nodes:
        try:
            kwargs = {k: resolve_binding(b, inputs, params, results) for k, b in node.args.items()}
            results[node.id] = call_op(node.op, **kwargs)
        except PipelineError as exc:
            exc.node = exc.node or node.id
            raise
        except (AnalysisError, ValueError, TypeError) as exc:
            raise PipelineError(f"node {node.id!r} ({node.op}) failed: {exc}", node.id) from exc
    return {name: resolve_binding(b, inputs, params, results) for name, b in pipeline.outputs.items()}


# -- plain-data view of results ---------------------------------------------------

def to_plain(value, array_limit: int | None = None):
    """Convert op results into JSON-compatible data (arrays become lists)."""
    if isinstance(value, Dataset):
        return {"payload_kind": value.payload_kind, "shape": list(value.data.shape)}
    if isinstance(value, (Spectrum, ComplexSpectrum)):
        d = {"x": value.x}
        if isinstance(value, Spectrum):
            d["y"] = value.y
        else:
            d["re"], d["im"] = value.values.real, value.values.imag
        return to_plain(d, array_limit)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_plain(getattr(value, f.name), array_limit) for f in dataclasses.fields(value)}
    if isinstance(value, np.ndarray):
        if array_limit is not None and value.size > array_limit:
            return {"shape": list(value.shape), "dtype": str(value.dtype)}
        return to_plain(value.tolist(), array_limit)
    if isinstance(value, Mapping):
        return {str(k): to_plain(v, array_limit) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v, array_limit) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    return value
