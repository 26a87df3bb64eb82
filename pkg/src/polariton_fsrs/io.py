"""Serialisation of spectra, population trajectories and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .signals import SpectrumGrid

SPECTRUM_COLUMNS = ("shift_THz", "omega0_THz", "delay_ps", "total", "population", "coherence")
TRAJECTORY_COLUMNS = ("delay_ps", "rho_up", "rho_ds", "rho_lp", "source")


def _fmt(x):
    return format(float(x), ".10e")


def spectrum_rows(grid: SpectrumGrid):
    """Yield one row per grid point, delay-major then pump then shift."""
    pump = grid.pump_axis
    for i, t in enumerate(grid.delay_axis):
        if pump is None:
            for k, v in enumerate(grid.shift_axis):
                yield (_fmt(v), "", _fmt(t), _fmt(grid.total[i, k]), _fmt(grid.population[i, k]),
                       _fmt(grid.coherence[i, k]))
        else:
            for j, w0 in enumerate(pump):
                for k, v in enumerate(grid.shift_axis):
                    yield (_fmt(v), _fmt(w0), _fmt(t), _fmt(grid.total[i, j, k]),
                           _fmt(grid.population[i, j, k]), _fmt(grid.coherence[i, j, k]))


def write_spectrum_csv(grid: SpectrumGrid, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_COLUMNS)
        w.writerows(spectrum_rows(grid))
    return path


def write_spectrum_json(grid: SpectrumGrid, path):
    path = Path(path)
    doc = {
        "kind": grid.kind,
        "shift_THz": grid.shift_axis.tolist(),
        "omega0_THz": None if grid.pump_axis is None else grid.pump_axis.tolist(),
        "delay_ps": grid.delay_axis.tolist(),
        "separation_valid": None if grid.valid is None else grid.valid.tolist(),
        "total": grid.total.tolist(),
        "population": grid.population.tolist(),
        "coherence": grid.coherence.tolist(),
    }
    path.write_text(json.dumps(doc, sort_keys=True))
    return path


def read_spectrum_csv(path):
    """Load a spectrum CSV back into columns (omega0 is NaN for 1D spectra)."""
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) if r[c] != "" else np.nan for r in rows]) for c in SPECTRUM_COLUMNS}


def write_trajectory_csv(times, sources: dict, path):
    """``sources`` maps a source label to an (n_t, 3) array of (up, ds, lp)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for label, pops in sources.items():
            for t, row in zip(times, np.asarray(pops)):
                w.writerow((_fmt(t), *(_fmt(x) for x in row), label))
    return path


def write_json(doc, path):
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default))
    return path


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def sha256(path, chunk=1 << 20):
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(chunk), b""):
            h.update(block)
    return h.hexdigest()
