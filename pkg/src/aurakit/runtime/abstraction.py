"""Turn one or more recorded demonstrations into a parameterized program."""
from __future__ import annotations

from dataclasses import dataclass

from ..dsl import Program
from ..dsl.ast import Binary, Click, Export, Literal, Name, Select, SetValue, WaitUntil, WidgetRef
from ..errors import AurakitError
from ..sim.base import SelectOption, TypeText, load_descriptor
from ..skill.model import ParamSpec
from .recorder import DemonstrationTrace

SKIP_KINDS = ("progress", "preview")


class AbstractionError(AurakitError):
    pass


class Unalignable(AbstractionError):
    pass


class MixedModels(AbstractionError):
    pass


@dataclass(frozen=True)
class AbstractionOptions:
    wait_threshold: int = 500
    min_coverage: float = 0.9
    poll: int = 100
    timeout_factor: float = 2.0


@dataclass(frozen=True)
class Abstraction:
    program: Program
    params: tuple
    arguments: tuple      # per input trace, the parameter values it used
    coverage: tuple

    def __iter__(self):
        yield self.program
        yield list(self.params)


def _key(step):
    return (type(step.action).__name__, step.action.widget)


def lcs_pairs(a, b) -> list[tuple[int, int]]:
    """Index pairs of a longest common subsequence of ``a`` and ``b``."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            table[i][j] = table[i + 1][j + 1] + 1 if a[i] == b[j] else max(table[i + 1][j], table[i][j + 1])
    pairs, i, j = [], 0, 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i, j = i + 1, j + 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def align(traces) -> list[tuple]:
    """Columns of step indices, one per trace, aligned progressively by LCS."""
    columns = [(i,) for i in range(len(traces[0].steps))]
    keys = [_key(s) for s in traces[0].steps]
    for t in traces[1:]:
        pairs = lcs_pairs(keys, [_key(s) for s in t.steps])
        columns = [columns[i] + (j,) for i, j in pairs]
        keys = [keys[i] for i, _ in pairs]
    return columns


def _typed(spec, text):
    vt = spec.value_type
    if spec.kind == "numeric_field":
        v = float(text)
        if vt == "int":
            return int(v)
        return v
    return str(text)


def settled_candidates(gap, before, kinds) -> list[tuple[int, str, object]]:
    """(settle clock, widget, final value) for widgets that changed during ``gap``.

    Text and boolean states come first, then numeric ones; each group is
    ordered by settle clock.  Numeric readouts qualify only if they stopped changing strictly before the
    gap ended: a value caught mid-drift may never be observed again on replay.
    Text and boolean states qualify whenever they changed.
    """
    last_change: dict = {}
    final = {k: w.value for k, w in before.widgets.items()}
    for clock, changes in gap.samples:
        for wid, value in changes.items():
            last_change[wid] = clock
            final[wid] = value
    out = []
    for wid, clock in last_change.items():
        value = final[wid]
        if kinds.get(wid) in SKIP_KINDS:
            continue
        if clock >= gap.end and not isinstance(value, (str, bool)):
            continue
        if value is None or value == before.widgets[wid].value or isinstance(value, (list, dict)):
            continue
        out.append((clock, wid, value))
    out.sort(key=lambda c: (not isinstance(c[2], (str, bool)), c[0], c[1]))
    return out


def _exported_dataset(step, desc):
    """Dataset id when the click changed the ``last_export`` readout to ``<dataset>#<n>``."""
    if "last_export" not in step.post.widgets:
        return None
    before, after = step.pre.value("last_export"), step.post.value("last_export")
    if after == before or not isinstance(after, str):
        return None
    ds = after.split("#", 1)[0]
    return ds if ds in desc.datasets else None


def _pre_gap_snapshot(trace, idx):
    return trace.steps[idx - 1].post if idx > 0 else trace.initial


def _wait_step(traces, column, options, kinds):
    gaps = [traces[t].steps[i].gap for t, i in enumerate(column)]
    durations = [g.duration if g else 0 for g in gaps]
    qualifying = [t for t, d in enumerate(durations) if d >= options.wait_threshold]
    if not qualifying:
        return None
    per_trace = {t: settled_candidates(gaps[t], _pre_gap_snapshot(traces[t], column[t]), kinds) for t in qualifying}
    first = per_trace[qualifying[0]]
    if not first:
        return None
    chosen = first[0]
    for cand in first:
        agree = all(any(c[1] == cand[1] and c[2] == cand[2] for c in per_trace[t]) for t in qualifying)
        if agree:
            chosen = cand
            break
    _, wid, value = chosen
    timeout = max(options.poll, int(round(options.timeout_factor * max(durations))))
    cond = Binary("==", WidgetRef(wid), Literal.of(value))
    return WaitUntil(cond, timeout, options.poll)


def abstract_traces(traces, options: AbstractionOptions | None = None) -> Abstraction:
    """Align demonstrations and emit a straight-line program.

    Literals typed or selected differently across traces become parameters
    named after the widget; idle gaps of at least ``wait_threshold`` ms become
    a wait on the widget that settled first during the gap.  A click that
    updates the ``last_export`` readout is followed by an ``export`` step.
    """
    options = options or AbstractionOptions()
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one demonstration")
    for t in traces:
        if not isinstance(t, DemonstrationTrace):
            raise TypeError("abstract_traces expects DemonstrationTrace values")
    models = sorted({t.model for t in traces})
    if len(models) > 1:
        raise MixedModels(f"demonstrations come from different models: {', '.join(models)}")
    desc = load_descriptor(models[0])
    kinds = {w.id: w.kind for w in desc.widgets.values()}
    columns = align(traces)
    coverage = tuple(len(columns) / len(t.steps) if t.steps else 1.0 for t in traces)
    for i, c in enumerate(coverage):
        if c < options.min_coverage:
            raise Unalignable(f"alignment covers {c:.0%} of demonstration {i}, below {options.min_coverage:.0%}")

    steps, params = [], []
    arguments = [dict() for _ in traces]
    used_names: dict[str, int] = {}
    for column in columns:
        wait = _wait_step(traces, column, options, kinds)
        if wait is not None:
            steps.append(wait)
        actions = [traces[t].steps[i].action for t, i in enumerate(column)]
        a0 = actions[0]
        spec = desc.widgets[a0.widget]
        if isinstance(a0, (TypeText, SelectOption)):
            raw = [a.text if isinstance(a, TypeText) else a.option for a in actions]
            vals = [_typed(spec, r) if isinstance(a0, TypeText) else r for r in raw]
            if all(v == vals[0] and type(v) is type(vals[0]) for v in vals):
                expr = Literal.of(vals[0])
            else:
                n = used_names.get(a0.widget, 0) + 1
                used_names[a0.widget] = n
                name = a0.widget if n == 1 else f"{a0.widget}_{n}"
                if isinstance(a0, SelectOption):
                    p = ParamSpec(name, "choice", spec.unit, vals[0], None, tuple(spec.options))
                else:
                    vt = spec.value_type if spec.value_type in ("int", "real") else "text"
                    rng = tuple(spec.range) if spec.range is not None and vt in ("int", "real") else None
                    p = ParamSpec(name, vt, spec.unit, vals[0], rng, None)
                params.append(p)
                for t, v in enumerate(vals):
                    arguments[t][name] = v
                expr = Name(name)
            steps.append(SetValue(a0.widget, expr) if isinstance(a0, TypeText) else Select(a0.widget, expr))
        else:
            # click on a button, or on a toggle (the runtime maps it to Toggle)
            steps.append(Click(a0.widget))
            exported = _exported_dataset(traces[0].steps[column[0]], desc)
            if exported is not None:
                steps.append(Export(exported))
    return Abstraction(Program(tuple(steps)), tuple(params), tuple(arguments), coverage)
