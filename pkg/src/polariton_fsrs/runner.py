"""Scenario orchestration: spectra, population trajectories and the manifest."""

from __future__ import annotations

import logging
import os
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .io import sha256, write_json, write_spectrum_csv, write_spectrum_json, write_trajectory_csv
from .resolver import DegenerateConfigurationError, compare_with_master
from .signals import build_model, signal_1d, signal_2d, signal_ct
from .units import EV_TO_RAD_PER_PS

log = logging.getLogger(__name__)

UNITS = {
    "spectral_axes": "angular THz (rad/ps); 1 eV = %.4f rad/ps" % EV_TO_RAD_PER_PS,
    "energies": "eV",
    "times": "ps",
    "signals": "arbitrary, normalised to the max |total| of the earliest delay",
}


def resolve_threads(requested=None, config_threads=1):
    """--threads beats FSRS_THREADS beats the config value."""
    if requested is not None:
        return int(requested)
    env = os.environ.get("FSRS_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"FSRS_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"FSRS_THREADS must be a positive integer, got {env!r}")
        return n
    return int(config_threads)


def _ensure_writable(out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"output directory {str(out_dir)!r} is not writable")


def parameters(config: ScenarioConfig):
    s, b, p = config.system, config.bath, config.pulses
    return {
        "system": {
            "n_molecules": s.n_molecules,
            "omega_exciton_ev": s.omega_exciton,
            "omega_cavity_ev": s.omega_cavity,
            "coupling_g_ev": s.coupling_g,
            "collective_coupling_ev": s.coupling_g * np.sqrt(s.n_molecules),
            "detuning_ev": s.detuning,
            "exciton_interaction_ev": s.exciton_interaction_u,
            "ct_energy_ev": s.ct_energy,
        },
        "bath": {
            "lambda0_ev": b.lambda0,
            "gamma0_rad_per_ps": b.gamma0,
            "temperature_k": b.temperature,
            "extra_dephasing_rad_per_ps": b.extra_dephasing,
        },
        "pulses": {
            "w2_ev": p.w2, "w3_ev": p.w3, "delta_ev": p.delta, "delta_rad_per_ps": p.delta_angular,
            "s1_ps": p.s1, "s2_ps": p.s2, "s3_ps": p.s3,
        },
    }


def run_scenario(config: ScenarioConfig, out_dir=None, fmt=None, threads=None):
    """Run every requested spectrum and the population comparison; return the manifest."""
    start = time.perf_counter()
    out = Path(out_dir or config.outputs["dir"])
    fmt = fmt or config.outputs["format"]
    threads = resolve_threads(threads, config.outputs["threads"])
    _ensure_writable(out)

    model = build_model(config.system, config.bath)
    opts = dict(threads=threads, strict=config.outputs["strict"], max_points=int(config.outputs["max_points"]))
    shift, delays = config.shift_axis(), config.delay_axis()
    files, flags = {}, {}
    writer, ext = (write_spectrum_csv, "csv") if fmt == "csv" else (write_spectrum_json, "json")

    for kind in config.grids["spectra"]:
        if kind == "1d":
            grid = signal_1d(model, config.pulses, shift, delays, **opts)
        elif kind == "2d":
            grid = signal_2d(model, config.pulses, shift, config.pump_axis(), delays, **opts)
        else:
            grid = signal_ct(model, config.pulses, shift, config.pump_axis(), delays, **opts)
        grid = grid.normalized()
        files[f"spectrum_{kind}"] = writer(grid, out / f"spectrum_{kind}.{ext}")
        flags[kind] = dict(zip(map(float, delays), map(bool, grid.valid)))

    times = config.trajectory_axis()
    resolver_info = {}
    runs = [("1d", None)] + ([("2d", "up"), ("2d", "lp")] if {"2d", "ct"} & set(config.grids["spectra"]) else [])
    for variant, pump in runs:
        tag = variant if pump is None else f"{variant}_{pump}"
        try:
            rep = compare_with_master(config.system, config.bath, config.pulses, times, variant, pump or "up", model=model)
        except DegenerateConfigurationError as exc:
            resolver_info[tag] = {"status": "unavailable", "reason": str(exc)}
            continue
        if rep.labels == ("up", "ds", "lp"):
            sources = {"master": rep.master, "resolved": rep.resolved}
            files[f"populations_{tag}"] = write_trajectory_csv(times, sources, out / f"populations_{tag}.csv")
        else:
            files[f"populations_{tag}"] = write_json(rep.to_dict(), out / f"populations_{tag}.json")
        resolver_info[tag] = {
            "status": "ok", "labels": list(rep.labels), "condition_number": rep.condition_number,
            "max_abs_deviation": rep.max_abs, "rms_deviation": rep.rms,
        }

    manifest = {
        "package_version": __version__,
        "scenario": config.scenario,
        "parameters": parameters(config),
        "config": config.to_dict(),
        "provenance": config.provenance,
        "units": UNITS,
        "grids": {
            "shift_points": int(shift.size), "delays_ps": delays.tolist(),
            "pump_points": int(config.pump_axis().size) if {"2d", "ct"} & set(config.grids["spectra"]) else 0,
        },
        "separation_valid": flags,
        "resolver": resolver_info,
        "threads": threads,
        "files": {k: {"path": p.name, "sha256": sha256(p), "bytes": p.stat().st_size} for k, p in files.items()},
        "runtime_s": round(time.perf_counter() - start, 3),
    }
    path = write_json(manifest, out / "manifest.json")
    return path, manifest
