"""GUI state-machine core shared by the simulated instruments."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType
from typing import Any, Mapping, Optional

from .._canon import canonical_json, sha256_hex
from ..errors import AurakitError

WIDGET_KINDS = ("button", "numeric_field", "text_field", "dropdown", "toggle", "readout", "progress", "preview")
ACTION_COST_MS = 50


class SimError(AurakitError):
    """Base for errors raised by a simulator."""


class UnknownModel(SimError):
    pass


class UnknownWidget(SimError):
    pass


class WidgetDisabled(SimError):
    pass


class KindMismatch(SimError):
    pass


class ValueOutOfRange(SimError):
    pass


class NotReady(SimError):
    pass


class UnknownDataset(SimError):
    pass


class InvalidSpec(SimError):
    pass


class InvalidGeometry(SimError):
    pass


# -- descriptors ---------------------------------------------------------------

@dataclass(frozen=True)
class WidgetSpec:
    id: str
    kind: str
    screen: str
    value_type: Optional[str] = None
    unit: Optional[str] = None
    range: Optional[tuple] = None
    options: tuple = ()
    initial: Any = None
    initial_enabled: bool = True
    navigate: Optional[str] = None
    label: str = ""


@dataclass(frozen=True)
class DatasetSpec:
    id: str
    payload_kind: str
    produced_by: str = ""


@dataclass(frozen=True)
class InstrumentDescriptor:
    model: str
    version: str
    title: str
    screens: tuple
    initial_screen: str
    widgets: Mapping[str, WidgetSpec]
    datasets: Mapping[str, DatasetSpec]
    transitions: tuple = ()
    format_version: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "InstrumentDescriptor":
        widgets = {}
        for w in d["widgets"]:
            if w["id"] in widgets:
                raise ValueError(f"duplicate widget id {w['id']!r} in {d['model']}")
            if w["kind"] not in WIDGET_KINDS:
                raise ValueError(f"unknown widget kind {w['kind']!r}")
            widgets[w["id"]] = WidgetSpec(
                id=w["id"], kind=w["kind"], screen=w["screen"], value_type=w.get("value_type"),
                unit=w.get("unit"), range=tuple(w["range"]) if w.get("range") else None,
                options=tuple(w.get("options", ())), initial=w.get("initial"),
                initial_enabled=w.get("initial_enabled", True), navigate=w.get("navigate"),
                label=w.get("label", ""),
            )
        datasets = {s["id"]: DatasetSpec(s["id"], s["payload_kind"], s.get("produced_by", "")) for s in d["datasets"]}
        return cls(
            model=d["model"], version=d["version"], title=d.get("title", ""), screens=tuple(d["screens"]),
            initial_screen=d["initial_screen"], widgets=MappingProxyType(widgets),
            datasets=MappingProxyType(datasets), transitions=tuple(d.get("transitions", ())),
            format_version=d.get("format_version", 1),
        )

    def to_dict(self) -> dict:
        def w(s: WidgetSpec):
            out = {"id": s.id, "kind": s.kind, "screen": s.screen}
            for k in ("value_type", "unit", "navigate"):
                if getattr(s, k) is not None:
                    out[k] = getattr(s, k)
            if s.range is not None:
                out["range"] = list(s.range)
            if s.options:
                out["options"] = list(s.options)
            if s.initial is not None:
                out["initial"] = s.initial
            if not s.initial_enabled:
                out["initial_enabled"] = False
            if s.label:
                out["label"] = s.label
            return out

        return {
            "format_version": self.format_version, "model": self.model, "version": self.version,
            "title": self.title, "screens": list(self.screens), "initial_screen": self.initial_screen,
            "widgets": [w(s) for s in self.widgets.values()],
            "datasets": [{"id": s.id, "payload_kind": s.payload_kind, "produced_by": s.produced_by}
                         for s in self.datasets.values()],
            "transitions": list(self.transitions),
        }


_DESCRIPTOR_CACHE: dict[str, InstrumentDescriptor] = {}


def load_descriptor(model: str) -> InstrumentDescriptor:
    if model not in _DESCRIPTOR_CACHE:
        try:
            text = resources.files("aurakit.sim").joinpath("descriptors", f"{model}.json").read_text("utf-8")
        except FileNotFoundError:
            raise UnknownModel(f"unknown instrument model {model!r}") from None
        _DESCRIPTOR_CACHE[model] = InstrumentDescriptor.from_dict(json.loads(text))
    return _DESCRIPTOR_CACHE[model]


# -- observations and actions --------------------------------------------------

@dataclass(frozen=True)
class WidgetState:
    id: str
    kind: str
    value: Any
    enabled: bool

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "value": self.value, "enabled": self.enabled}


@dataclass(frozen=True)
class GuiSnapshot:
    model: str
    screen: str
    widgets: Mapping[str, WidgetState]
    clock: int

    def value(self, widget_id: str):
        return self.widgets[widget_id].value

    def to_dict(self, include_clock: bool = True) -> dict:
        d = {"model": self.model, "screen": self.screen,
             "widgets": {k: w.to_dict() for k, w in self.widgets.items()}}
        if include_clock:
            d["clock"] = self.clock
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GuiSnapshot":
        widgets = {k: WidgetState(**w) for k, w in d["widgets"].items()}
        return cls(d["model"], d["screen"], MappingProxyType(widgets), d.get("clock", 0))

    def digest(self) -> str:
        """Digest of the instrument state; the clock is deliberately excluded so
        two runs that reach the same state at different times agree."""
        return sha256_hex(canonical_json(self.to_dict(include_clock=False)))

    def __eq__(self, other):
        if not isinstance(other, GuiSnapshot):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(canonical_json(self.to_dict()))


@dataclass(frozen=True)
class Click:
    widget: str


@dataclass(frozen=True)
class TypeText:
    widget: str
    text: str


@dataclass(frozen=True)
class SelectOption:
    widget: str
    option: str


@dataclass(frozen=True)
class Toggle:
    widget: str


Action = Click | TypeText | SelectOption | Toggle
ACTION_NAMES = {Click: "click", TypeText: "type_text", SelectOption: "select_option", Toggle: "toggle"}
_COMPATIBLE = {Click: ("button",), TypeText: ("numeric_field", "text_field"),
               SelectOption: ("dropdown",), Toggle: ("toggle",)}


def action_to_dict(a) -> dict:
    d = {"action": ACTION_NAMES[type(a)], "widget": a.widget}
    if isinstance(a, TypeText):
        d["value"] = a.text
    elif isinstance(a, SelectOption):
        d["value"] = a.option
    return d


def action_from_dict(d: dict):
    kind = d["action"]
    if kind == "click":
        return Click(d["widget"])
    if kind == "type_text":
        return TypeText(d["widget"], str(d.get("value", "")))
    if kind == "select_option":
        return SelectOption(d["widget"], str(d.get("value", "")))
    if kind == "toggle":
        return Toggle(d["widget"])
    raise ValueError(f"unknown action kind {kind!r}")


# -- simulator -----------------------------------------------------------------

class Simulator:
    """Deterministic instrument software: widgets, screens and a simulated clock.

    Subclasses implement the model's transition table through ``on_click``,
    ``on_value``, ``on_time`` and ``refresh``.  Time-dependent state must be a
    function of the clock (or of fixed-size quanta) so that ``advance(a)``
    followed by ``advance(b)`` equals ``advance(a + b)``.
    """

    model_id = ""

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.descriptor = load_descriptor(self.model_id)
        self.clock = 0
        self.screen = self.descriptor.initial_screen
        self.values = {w.id: w.initial for w in self.descriptor.widgets.values()}
        self.enabled = {w.id: w.initial_enabled for w in self.descriptor.widgets.values()}
        self.datasets: dict = {}
        self.setup()
        self.refresh()

    # -- hooks
    def setup(self):
        pass

    def on_click(self, widget_id: str):
        pass

    def on_value(self, widget_id: str, value):
        pass

    def on_time(self, t0: int, t1: int):
        pass

    def refresh(self):
        pass

    def produce(self, dataset_id: str):
        """Return the Dataset for ``dataset_id`` or raise NotReady."""
        raise NotReady(dataset_id)

    # -- public surface
    def observe(self) -> GuiSnapshot:
        widgets = {}
        for wid, spec in self.descriptor.widgets.items():
            widgets[wid] = WidgetState(wid, spec.kind, self.values[wid], bool(self.enabled[wid]))
        return GuiSnapshot(self.model_id, self.screen, MappingProxyType(widgets), self.clock)

    def apply_action(self, action) -> None:
        spec = self.descriptor.widgets.get(action.widget)
        if spec is None:
            raise UnknownWidget(f"{self.model_id}: no widget {action.widget!r}")
        if type(action) not in _COMPATIBLE:
            raise KindMismatch(f"unsupported action {action!r}")
        if spec.kind not in _COMPATIBLE[type(action)]:
            raise KindMismatch(f"{ACTION_NAMES[type(action)]} not applicable to {spec.kind} {spec.id!r}")
        if spec.screen not in ("*", self.screen):
            raise WidgetDisabled(f"{spec.id!r} is on screen {spec.screen!r}, active screen is {self.screen!r}")
        if not self.enabled[spec.id]:
            raise WidgetDisabled(f"{spec.id!r} is disabled")

        if isinstance(action, Click):
            if spec.navigate:
                self.screen = spec.navigate
            else:
                self.on_click(spec.id)
        elif isinstance(action, Toggle):
            self.values[spec.id] = not self.values[spec.id]
            self.on_value(spec.id, self.values[spec.id])
        elif isinstance(action, SelectOption):
            if action.option not in spec.options:
                raise ValueOutOfRange(f"{action.option!r} is not an option of {spec.id!r}")
            self.values[spec.id] = action.option
            self.on_value(spec.id, action.option)
        else:
            value = self._parse_text(spec, action.text)
            self.values[spec.id] = value
            self.on_value(spec.id, value)
        self.refresh()
        self.advance(ACTION_COST_MS)

    def advance(self, dt: int) -> None:
        dt = int(dt)
        if dt < 0:
            raise ValueError("cannot advance by a negative duration")
        if dt == 0:
            return
        t0, t1 = self.clock, self.clock + dt
        self.on_time(t0, t1)
        self.clock = t1
        self.refresh()

    def export_dataset(self, dataset_id: str):
        if dataset_id not in self.descriptor.datasets:
            raise UnknownDataset(f"{self.model_id}: no dataset {dataset_id!r}")
        return self.produce(dataset_id)

    # -- helpers
    @staticmethod
    def _parse_text(spec: WidgetSpec, text: str):
        if spec.kind == "text_field":
            return str(text)
        try:
            v = float(text)
        except (TypeError, ValueError):
            raise ValueOutOfRange(f"{text!r} is not a number for {spec.id!r}") from None
        if v != v or v in (float("inf"), float("-inf")):
            raise ValueOutOfRange(f"{text!r} is not finite")
        if spec.value_type == "int":
            if v != int(v):
                raise ValueOutOfRange(f"{spec.id!r} takes an integer, got {text!r}")
            v = int(v)
        if spec.range is not None and not spec.range[0] <= v <= spec.range[1]:
            raise ValueOutOfRange(f"{v} outside [{spec.range[0]}, {spec.range[1]}] for {spec.id!r}")
        return v

    def parameter_snapshot(self) -> dict:
        """Current values of every settable widget, for dataset provenance."""
        return {wid: self.values[wid] for wid, s in self.descriptor.widgets.items()
                if s.kind in ("numeric_field", "text_field", "dropdown", "toggle")}
