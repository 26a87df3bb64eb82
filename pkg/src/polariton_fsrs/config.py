"""YAML scenario configuration with defaults, validation and provenance.

A config file holds up to six top-level sections::

    scenario: detuned_plus        # zero_detuning | detuned_plus | detuned_minus | charge_transfer | custom
    system:   {n_molecules, omega_exciton_ev, collective_coupling_ev, detuning_g,
               exciton_interaction_ev, molecular_dipoles, near_edge_offset_ev,
               near_edge_dipoles, ct_energy_ev, ct_dipoles}
    bath:     {lambda0_ev, gamma0, temperature_k, extra_dephasing}
    pulses:   {delta, w2_ev, s1_ps, s2_ps, s3_ps}
    grids:    {shift: {start, stop, step}, pump: {start, stop, step} | null,
               delays: [...], trajectory: {start, stop, num}, spectra: [1d, 2d, ct]}
    outputs:  {dir, format, threads, max_points, strict}

Spectral quantities in config are angular THz (rad/ps) unless the key ends
in ``_ev``. Every value is tagged with where it came from: ``published`` for the
published model constants, ``design`` for defaults chosen here, ``user`` for
values read from the file.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .bath import BathSpec
from .model import SystemSpec
from .response import PulseSpec
from .units import EV_TO_RAD_PER_PS

SCENARIOS = ("zero_detuning", "detuned_plus", "detuned_minus", "charge_transfer", "custom")
FORMATS = ("csv", "json")
SPECTRA = ("1d", "2d", "ct")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


PUBLISHED_SYSTEM = {
    "n_molecules": 10,
    "omega_exciton_ev": 1.84,
    "collective_coupling_ev": 0.05 * np.sqrt(2.0),
    "detuning_g": 0.0,
    "exciton_interaction_ev": 0.02,
    "molecular_dipoles": 1.0,
    "near_edge_dipoles": 1.0,
}
DESIGN_SYSTEM = {
    "near_edge_offset_ev": 2.0,
    "ct_energy_ev": None,
    "ct_dipoles": 1.0,
}
PUBLISHED_PULSES = {"delta": 243.0, "s2_ps": 1.0, "s3_ps": 0.035, "s1_ps": 0.015}
DESIGN_PULSES = {"w2_ev": 4.0}
DESIGN_BATH = {"lambda0_ev": 0.00066, "gamma0": 200.0, "temperature_k": 300.0, "extra_dephasing": 10.0}
DESIGN_GRIDS = {
    "shift": {"start": 0.0, "stop": 500.0, "step": 1.0},
    "pump": None,
    "delays": [0.03, 0.93, 5.0, 20.0],
    "trajectory": {"start": 0.0, "stop": 20.0, "num": 81},
    "spectra": ["1d", "2d"],
}
DESIGN_OUTPUTS = {"dir": "fsrs_run", "format": "csv", "threads": 1, "max_points": 50_000_000, "strict": False}

SCENARIO_OVERRIDES = {
    "zero_detuning": {"system": {"detuning_g": 0.0}},
    "detuned_plus": {"system": {"detuning_g": 1.25}},
    "detuned_minus": {"system": {"detuning_g": -1.25}},
    "charge_transfer": {"system": {"detuning_g": 1.25, "ct_energy_ev": 1.6}, "grids": {"spectra": ["1d", "ct"]}},
    "custom": {},
}
# published constants injected by canned scenarios
PUBLISHED_SCENARIO_KEYS = {"system.detuning_g", "system.ct_energy_ev"}

SECTIONS = {
    "system": {**PUBLISHED_SYSTEM, **DESIGN_SYSTEM},
    "bath": DESIGN_BATH,
    "pulses": {**PUBLISHED_PULSES, **DESIGN_PULSES},
    "grids": DESIGN_GRIDS,
    "outputs": DESIGN_OUTPUTS,
}
GRID_SUBKEYS = {"shift": ("start", "stop", "step"), "pump": ("start", "stop", "step"), "trajectory": ("start", "stop", "num")}
CUSTOM_REQUIRED = ("system", "bath", "pulses")


@dataclass
class ScenarioConfig:
    scenario: str
    system: SystemSpec
    bath: BathSpec
    pulses: PulseSpec
    grids: dict
    outputs: dict
    raw: dict
    provenance: dict = field(default_factory=dict)

    def shift_axis(self):
        return _axis(self.grids["shift"])

    def pump_axis(self):
        """Pump axis in rad/ps; by default spans lp - 3 g sqrt(N) to up + 3 g sqrt(N) at 2 rad/ps."""
        if self.grids["pump"] is not None:
            return _axis(self.grids["pump"])
        from .model import polariton_frequencies

        lp, up = polariton_frequencies(self.system)
        pad = 3.0 * self.raw["system"]["collective_coupling_ev"]
        return np.arange((lp - pad) * EV_TO_RAD_PER_PS, (up + pad) * EV_TO_RAD_PER_PS, 2.0)

    def delay_axis(self):
        return np.asarray(self.grids["delays"], dtype=float)

    def trajectory_axis(self):
        t = self.grids["trajectory"]
        return np.linspace(t["start"], t["stop"], int(t["num"]))

    def to_dict(self):
        return {"scenario": self.scenario, **copy.deepcopy(self.raw)}


def _axis(spec):
    start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
    return start + step * np.arange(int(np.floor((stop - start) / step + 1e-9)) + 1)


def _merge(section, defaults, user, path, provenance, published_keys):
    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ConfigError(f"{path}: expected a mapping")
    unknown = sorted(set(user) - set(defaults))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}: unknown key")
    out = {}
    for key, default in defaults.items():
        kp = f"{path}.{key}"
        if key in user:
            out[key] = user[key]
            provenance[kp] = "user"
        else:
            out[key] = copy.deepcopy(default)
            provenance[kp] = "published" if key in published_keys else "design"
    return out


def _positive(value, kp, strict=True, allow_none=False):
    if value is None and allow_none:
        return None
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{kp}: expected a number, got {value!r}") from None
    if not np.isfinite(x) or (x <= 0 if strict else x < 0):
        raise ConfigError(f"{kp}: must be {'> 0' if strict else '>= 0'}, got {value!r}")
    return x


def _number(value, kp):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{kp}: expected a number, got {value!r}") from None
    if not np.isfinite(x):
        raise ConfigError(f"{kp}: must be finite")
    return x


def _validate_grids(grids):
    for name, keys in GRID_SUBKEYS.items():
        g = grids[name]
        if g is None and name == "pump":
            continue
        if not isinstance(g, dict):
            raise ConfigError(f"grids.{name}: expected a mapping with keys {list(keys)}")
        unknown = sorted(set(g) - set(keys))
        if unknown:
            raise ConfigError(f"grids.{name}.{unknown[0]}: unknown key")
        for k in keys:
            if k not in g:
                raise ConfigError(f"grids.{name}.{k}: missing")
            _number(g[k], f"grids.{name}.{k}")
        if g["stop"] < g["start"]:
            raise ConfigError(f"grids.{name}.stop: must not be below start")
        if name == "trajectory":
            if int(g["num"]) < 1:
                raise ConfigError("grids.trajectory.num: must be >= 1")
            if g["start"] < 0:
                raise ConfigError("grids.trajectory.start: delays must be >= 0")
        else:
            _positive(g["step"], f"grids.{name}.step")
    delays = grids["delays"]
    if not isinstance(delays, (list, tuple)) or not delays:
        raise ConfigError("grids.delays: expected a non-empty list of delays in ps")
    for i, t in enumerate(delays):
        _positive(t, f"grids.delays[{i}]", strict=False)
    spectra = grids["spectra"]
    if isinstance(spectra, str):
        spectra = [spectra]
        grids["spectra"] = spectra
    for s in spectra:
        if s not in SPECTRA:
            raise ConfigError(f"grids.spectra: unknown spectrum {s!r} (choose from {list(SPECTRA)})")


def build_config(data: dict | None = None, scenario: str | None = None) -> ScenarioConfig:
    """Validate a parsed mapping; ``scenario`` overrides the file's choice."""
    data = {} if data is None else copy.deepcopy(data)
    if not isinstance(data, dict):
        raise ConfigError("<root>: expected a mapping")
    unknown = sorted(set(data) - set(SECTIONS) - {"scenario"})
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    name = scenario or data.get("scenario") or "detuned_plus"
    if name not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {name!r} (choose from {list(SCENARIOS)})")
    if name == "custom":
        for sec in CUSTOM_REQUIRED:
            given = data.get(sec) or {}
            missing = [k for k in SECTIONS[sec] if k not in given]
            if missing:
                raise ConfigError(f"{sec}.{missing[0]}: required for the custom scenario")

    provenance = {"scenario": "user" if (scenario or "scenario" in data) else "design"}
    raw = {}
    published_keys = set(PUBLISHED_SYSTEM) | set(PUBLISHED_PULSES)
    for sec, defaults in SECTIONS.items():
        defaults = {**copy.deepcopy(defaults), **SCENARIO_OVERRIDES[name].get(sec, {})}
        injected = SCENARIO_OVERRIDES[name].get(sec, {})
        keys = published_keys | {k for k in injected if f"{sec}.{k}" in PUBLISHED_SCENARIO_KEYS}
        raw[sec] = _merge(sec, defaults, data.get(sec), sec, provenance, keys)

    s, b, p = raw["system"], raw["bath"], raw["pulses"]
    n = s["n_molecules"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ConfigError(f"system.n_molecules: must be an integer >= 2, got {n!r}")
    omega = _positive(s["omega_exciton_ev"], "system.omega_exciton_ev")
    coupling = _positive(s["collective_coupling_ev"], "system.collective_coupling_ev", strict=False)
    det = _number(s["detuning_g"], "system.detuning_g")
    _number(s["exciton_interaction_ev"], "system.exciton_interaction_ev")
    offset = _positive(s["near_edge_offset_ev"], "system.near_edge_offset_ev")
    ct = _positive(s["ct_energy_ev"], "system.ct_energy_ev", allow_none=True)

    try:
        system = SystemSpec.from_collective(
            n, omega, coupling, det,
            exciton_interaction_u=float(s["exciton_interaction_ev"]),
            molecular_dipoles=s["molecular_dipoles"],
            near_edge_energies=np.full(n, omega + offset),
            near_edge_dipoles=s["near_edge_dipoles"],
            ct_energy=ct,
            ct_dipoles=s["ct_dipoles"] if ct is not None else None,
        )
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from None

    bath = BathSpec(
        lambda0=_positive(b["lambda0_ev"], "bath.lambda0_ev", strict=False),
        gamma0=_positive(b["gamma0"], "bath.gamma0"),
        temperature=_positive(b["temperature_k"], "bath.temperature_k"),
        extra_dephasing=_positive(b["extra_dephasing"], "bath.extra_dephasing", strict=False),
    )
    pulses = PulseSpec.from_delta(
        _positive(p["delta"], "pulses.delta"),
        w2=_positive(p["w2_ev"], "pulses.w2_ev"),
        s1=_positive(p["s1_ps"], "pulses.s1_ps"),
        s2=_positive(p["s2_ps"], "pulses.s2_ps"),
        s3=_positive(p["s3_ps"], "pulses.s3_ps"),
    )

    grids = raw["grids"]
    _validate_grids(grids)
    if "ct" in grids["spectra"] and ct is None:
        raise ConfigError("grids.spectra: 'ct' requested but system.ct_energy_ev is not set")
    out = raw["outputs"]
    if out["format"] not in FORMATS:
        raise ConfigError(f"outputs.format: must be one of {list(FORMATS)}, got {out['format']!r}")
    if not isinstance(out["threads"], int) or out["threads"] < 1:
        raise ConfigError(f"outputs.threads: must be a positive integer, got {out['threads']!r}")
    _positive(out["max_points"], "outputs.max_points")
    return ScenarioConfig(name, system, bath, pulses, grids, out, raw, provenance)


def load_config(path, scenario: str | None = None) -> ScenarioConfig:
    """Read and validate a YAML config file. An empty file selects all defaults."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"<file>: config file {str(path)!r} not found")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"<file>: not valid YAML ({exc})") from None
    return build_config(data or {}, scenario)
