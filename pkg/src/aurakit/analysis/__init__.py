"""Spectral and imaging analysis operations."""
from .afm import afm_level_plane, afm_profile, afm_roughness
from .baseline import baseline_asls
from .ct import fbp_reconstruct
from .ebsd import ebsd_grains, ipf_colormap
from .eds import eds_convert, eds_snr
from .fitting import fit_gaussians
from .ftir import ftir_assign, load_band_table
from .nmr import nmr_autophase, nmr_integrate, nmr_phase
from .ops import OPS, PipelineError, call_op, known_ops, run_pipeline
from .peaks import detect_peaks
from .sem import otsu_threshold, sem_pores
from .tga import tga_steps
from .types import (AFMRoughness, AnalysisError, BaselineResult, ComplexSpectrum, Composition,
                    CompositionEntry, DegenerateInit, EmptyRange, EmptyWindow, FTIRAssignment,
                    GaussianFit, GrainStats, NonMonotonicTemperature, OutOfBounds, Peak, Pore,
                    PoreStats, SingularSystem, Spectrum, TgaStep, TooFewSamples, ZeroMass)

__all__ = [
    "afm_level_plane", "afm_profile", "afm_roughness", "baseline_asls", "fbp_reconstruct",
    "ebsd_grains", "ipf_colormap", "eds_convert", "eds_snr", "fit_gaussians", "ftir_assign",
    "load_band_table", "nmr_autophase", "nmr_integrate", "nmr_phase", "OPS", "PipelineError",
    "call_op", "known_ops", "run_pipeline", "detect_peaks", "otsu_threshold", "sem_pores", "tga_steps",
    "AFMRoughness", "AnalysisError", "BaselineResult", "ComplexSpectrum", "Composition", "CompositionEntry",
    "DegenerateInit", "EmptyRange", "EmptyWindow", "FTIRAssignment", "GaussianFit", "GrainStats",
    "NonMonotonicTemperature", "OutOfBounds", "Peak", "Pore", "PoreStats", "SingularSystem", "Spectrum",
    "TgaStep", "TooFewSamples", "ZeroMass",
]
