"""File formats used at the command line: compositions, spectra, grids and JSON."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
from pathlib import Path

import numpy as np

from .analysis.ops import to_plain
from .analysis.types import Composition, Spectrum
from .sim.dataset import Dataset
from .sim.io import read_csv_spectrum, read_dataset, read_pgm, sidecar_path

BASIS_COLUMNS = {"wt%": "weight", "weight": "weight", "at%": "atomic", "atomic": "atomic"}


def atomic_mass(symbol: str) -> float:
    import periodictable
    try:
        return float(periodictable.elements.symbol(symbol).mass)
    except ValueError:
        raise ValueError(f"unknown element symbol {symbol!r}") from None


def read_composition(path) -> Composition:
    """CSV with columns ``element`` and ``wt%`` or ``at%``; ``atomic_mass`` is optional."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no composition rows")
    cols = {c.strip().lower(): c for c in rows[0]}
    basis_cols = [c for c in cols if c in BASIS_COLUMNS]
    if "element" not in cols or len(basis_cols) != 1:
        raise ValueError(f"{path}: need an 'element' column and one of wt%/at%")
    key = basis_cols[0]
    fractions, masses = {}, {}
    for r in rows:
        el = r[cols["element"]].strip()
        fractions[el] = float(r[cols[key]])
        mass = r.get(cols.get("atomic_mass", ""), "") if "atomic_mass" in cols else ""
        masses[el] = float(mass) if str(mass).strip() else atomic_mass(el)
    return Composition.from_fractions(fractions, masses, BASIS_COLUMNS[key])


def read_input(path):
    """Load a file by extension and header: composition, spectrum, grid, image or JSON."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".json":
        return json.loads(p.read_text("utf-8"))
    if suffix == ".pgm":
        return read_pgm(p)
    if sidecar_path(p).exists() or suffix == ".grid":
        return read_dataset(p)
    if suffix == ".csv":
        head = p.read_text("utf-8").lstrip().splitlines()[0].lower()
        if head.startswith("element"):
            return read_composition(p)
        return read_csv_spectrum(p)
    raise ValueError(f"do not know how to read {p.name}")


def _rows(value):
    """(header, rows) for CSV output, or None when the value is not tabular."""
    if isinstance(value, Composition):
        col = "wt%" if value.basis == "weight" else "at%"
        return ["element", col, "atomic_mass"], [[e.element, f"{e.fraction:.6f}", e.atomic_mass] for e in value.entries]
    if isinstance(value, Spectrum):
        return ["x", "y"], [[repr(float(a)), repr(float(b))] for a, b in zip(value.x, value.y)]
    if isinstance(value, Dataset) and value.data.ndim == 1:
        return ["x", "y"], [[repr(float(a)), repr(float(b))] for a, b in zip(value.x, value.data)]
    if isinstance(value, (list, tuple)) and value and all(dataclasses.is_dataclass(v) for v in value):
        names = [f.name for f in dataclasses.fields(value[0])]
        return names, [[json.dumps(to_plain(getattr(v, n))) if isinstance(getattr(v, n), (list, tuple, dict))
                        else getattr(v, n) for n in names] for v in value]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return ["value"], [[value]]
    if isinstance(value, (list, tuple)) and all(isinstance(v, (int, float)) for v in value):
        return ["index", "value"], [[i, v] for i, v in enumerate(value)]
    return None


def to_csv(value) -> str | None:
    t = _rows(value)
    if t is None:
        return None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t[0])
    w.writerows(t[1])
    return buf.getvalue()


def write_output(value, path) -> Path:
    """Write ``value`` as CSV (``.csv``), a float grid (``.npy``) or JSON (anything else)."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    if p.suffix.lower() == ".csv":
        text = to_csv(value)
        if text is None:
            raise ValueError(f"{type(value).__name__} has no CSV form; use a .json output")
        p.write_text(text, "utf-8")
    elif p.suffix.lower() == ".npy":
        np.save(p, np.asarray(getattr(value, "data", value)))
    else:
        p.write_text(json.dumps(to_plain(value), indent=2, sort_keys=True) + "\n", "utf-8")
    return p
