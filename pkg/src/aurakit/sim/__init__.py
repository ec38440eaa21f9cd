"""Simulated instrument software and synthetic data generators."""
from __future__ import annotations

from .base import (ACTION_COST_MS, Click, GuiSnapshot, InstrumentDescriptor, InvalidGeometry, InvalidSpec,
                   KindMismatch, NotReady, SelectOption, SimError, Simulator, Toggle, TypeText, UnknownDataset,
                   UnknownModel, UnknownWidget, ValueOutOfRange, WidgetDisabled, WidgetState, action_from_dict,
                   action_to_dict, load_descriptor)
from .dataset import PAYLOAD_KINDS, Axis, Dataset
from .microct import MicroCtSim
from .semeds import SemEdsSim
from .synthetic import generate_synthetic
from .tomo import simulate_sinogram
from .uvvis import UvVisSim

MODELS = {"uvvis": UvVisSim, "sem-eds": SemEdsSim, "microct": MicroCtSim}


def model_ids() -> list[str]:
    return sorted(MODELS)


def create_sim(model: str, seed: int = 0) -> Simulator:
    cls = MODELS.get(model)
    if cls is None:
        raise UnknownModel(f"unknown instrument model {model!r}; known: {', '.join(model_ids())}")
    return cls(seed)


def observe(sim: Simulator) -> GuiSnapshot:
    return sim.observe()


def apply_action(sim: Simulator, action) -> None:
    sim.apply_action(action)


def advance(sim: Simulator, dt: int) -> None:
    sim.advance(dt)


def export_dataset(sim: Simulator, dataset_id: str) -> Dataset:
    return sim.export_dataset(dataset_id)
