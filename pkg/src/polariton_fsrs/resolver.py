"""Recover polariton and dark-state populations from Raman peak heights.

For a diagonal density matrix the line at w_ab carries rho_aa + rho_bb, so the
three peaks (up-ds, ds-lp, up-lp) sampled at their analytic centres give a
3x3 linear system in the pairwise sums

    s_ud = rho_u + rho_d,  s_dl = rho_d + rho_l,  s_ul = rho_l + rho_u,

where rho_d is the population of one dark state (all dark states are
equivalent). The individual populations follow by exact recombination and
the dark aggregate is (N - 1) rho_d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bath import BathSpec
from .model import SystemSpec
from .response import PulseSpec, f_function
from .signals import (
    PolaritonModel, build_model, doorway_states, evaluate, initial_superposition, raman_kernel, split_channels,
)

LABELS = ("up", "ds", "lp")
PAIR_LABELS = ("ds+up", "ds+lp", "lp+up")
CLASSES = ("up-ds", "ds-lp", "up-lp")


class DegenerateConfigurationError(ValueError):
    """The three Raman lines are not distinct, so the 3x3 system is singular."""


class InconsistentSignalError(ValueError):
    """Peak heights imply a negative population beyond tolerance."""


@dataclass
class ResolutionSystem:
    coefficients: np.ndarray
    peak_values: np.ndarray
    n_molecules: int
    condition_number: float
    variant: str = "1d"
    unknowns: tuple = PAIR_LABELS


def _class_pairs(model: PolaritonModel):
    lv = model.levels
    up, lp, dark = lv.up, lv.lp, list(lv.dark)
    return (
        [(up, d) for d in dark],
        [(d, lp) for d in dark],
        [(up, lp)],
    )


def pump_weight(model: PolaritonModel, pump: str):
    """Resonant doorway population mu_p^2 / Gamma_{p,g} of the pumped branch."""
    idx = {"up": model.levels.up, "lp": model.levels.lp}[pump]
    mu = model.dipoles[idx - 1]
    gamma = -np.imag(model.xi[idx, model.levels.ground])
    return mu**2 / gamma


def build_coefficients(model: PolaritonModel, pulse: PulseSpec, variant="1d", pump="up", cond_limit=1e8):
    """alpha~[j, k] = (1/pi) sum_{(a,b) in class k} alpha_ab^2 Im[f(w_j, xi_ab) + f(w_j, xi_ba)].

    Row ``j`` is the probe frequency w_j (up-ds, ds-lp, up-lp); column ``k``
    multiplies the pairwise sum of that class, per dark state. The 2D variant
    is scaled by the resonant doorway weight of the pumped branch.
    """
    freqs = model.peak_frequencies()
    alpha = model.alpha
    xi = model.xi
    delta = pulse.delta_angular
    mat = np.zeros((3, 3))
    for k, pairs in enumerate(_class_pairs(model)):
        for a, b in pairs:
            val = f_function(freqs, xi[a, b], pulse.s2, pulse.s3, delta) + f_function(freqs, xi[b, a], pulse.s2, pulse.s3, delta)
            mat[:, k] += alpha[a, b] ** 2 * np.imag(val) / np.pi
    if variant == "2d":
        mat *= pump_weight(model, pump)
    elif variant != "1d":
        raise ValueError(f"unknown variant {variant!r}")
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > cond_limit or len({round(f, 6) for f in freqs}) < 3:
        raise DegenerateConfigurationError(
            f"Raman lines overlap (condition number {cond:.3g}); populations are not separable "
            "from this spectrum. Use resolve_combined, or pump a single branch in 2D"
        )
    return mat, cond


def peak_samples(model: PolaritonModel, pulse: PulseSpec, rho, freqs=None):
    """Population-channel signal at the analytic peak centres for rho (or a stack)."""
    freqs = model.peak_frequencies() if freqs is None else freqs
    diag, _ = split_channels(np.asarray(rho, dtype=complex))
    return evaluate(raman_kernel(model, pulse, freqs), diag)


def resolve(system: ResolutionSystem, tol=1e-3):
    """Solve for the pairwise sums and recombine into (up, ds aggregate, lp).

    ``peak_values`` may be a stack of shape (..., 3).
    """
    sums = np.linalg.solve(system.coefficients, np.asarray(system.peak_values, dtype=float).T).T
    s_ud, s_dl, s_ul = sums[..., 0], sums[..., 1], sums[..., 2]
    up = 0.5 * (s_ud - s_dl + s_ul)
    lp = 0.5 * (s_dl - s_ud + s_ul)
    dark = 0.5 * (s_ud + s_dl - s_ul) * (system.n_molecules - 1)
    out = np.stack([up, dark, lp], axis=-1)
    scale = max(1.0, float(np.max(np.abs(out))))
    if np.any(out < -tol * scale):
        raise InconsistentSignalError(
            f"recovered populations {np.round(out.min(), 6)} below zero; signal and model disagree"
        )
    return out


def resolve_combined(model: PolaritonModel, pulse: PulseSpec, peak_values):
    """Two-line inversion for merged up-ds/ds-lp lines (zero detuning).

    Returns (rho_up + rho_lp, dark aggregate). Bright populations enter the
    merged line symmetrically, which holds when up and lp mix equally.
    """
    freqs = model.peak_frequencies()
    probes = np.array([0.5 * (freqs[0] + freqs[1]), freqs[2]])
    full = np.zeros((2, 3))
    alpha, xi, d = model.alpha, model.xi, pulse.delta_angular
    for k, pairs in enumerate(_class_pairs(model)):
        for a, b in pairs:
            val = f_function(probes, xi[a, b], pulse.s2, pulse.s3, d) + f_function(probes, xi[b, a], pulse.s2, pulse.s3, d)
            full[:, k] += alpha[a, b] ** 2 * np.imag(val) / np.pi
    # unknowns x = rho_u + rho_l, y = rho_d (one dark state), with rho_u = rho_l = x/2 in the merged classes
    mat = np.column_stack([0.5 * (full[:, 0] + full[:, 1]) + full[:, 2], full[:, 0] + full[:, 1]])
    x, y = np.linalg.solve(mat, np.asarray(peak_values, dtype=float).T)
    return np.stack([x, y * (model.spec.n_molecules - 1)], axis=-1), float(np.linalg.cond(mat))


def combined_probes(model: PolaritonModel):
    freqs = model.peak_frequencies()
    return np.array([0.5 * (freqs[0] + freqs[1]), freqs[2]])


@dataclass
class DeviationReport:
    times: np.ndarray
    resolved: np.ndarray
    master: np.ndarray
    labels: tuple
    condition_number: float
    variant: str
    pump: Optional[str] = None
    meta: dict = field(default_factory=dict)

    @property
    def deviation(self):
        return self.resolved - self.master

    @property
    def max_abs(self):
        return dict(zip(self.labels, np.max(np.abs(self.deviation), axis=0).tolist()))

    @property
    def rms(self):
        return dict(zip(self.labels, np.sqrt(np.mean(self.deviation**2, axis=0)).tolist()))

    def within(self, tol=0.05):
        return max(self.max_abs.values()) < tol

    def to_dict(self):
        return {
            "variant": self.variant,
            "pump": self.pump,
            "labels": list(self.labels),
            "condition_number": self.condition_number,
            "max_abs_deviation": self.max_abs,
            "rms_deviation": self.rms,
            "times_ps": self.times.tolist(),
            "resolved": self.resolved.tolist(),
            "master": self.master.tolist(),
            **self.meta,
        }


def initial_state(model: PolaritonModel, variant="1d", pump="up"):
    """Initial density matrix and the normalisation used for populations."""
    if variant == "1d":
        return initial_superposition(model), 1.0
    freqs = model.levels.energies
    idx = {"up": model.levels.up, "lp": model.levels.lp}[pump]
    rho = doorway_states(model, [freqs[idx]])[0]
    return rho, pump_weight(model, pump)


def compare_with_master(spec: SystemSpec, bath: BathSpec, pulse: PulseSpec, t_grid, variant="1d", pump="up",
                        model: Optional[PolaritonModel] = None) -> DeviationReport:
    """Resolve populations from the forward spectrum and compare with propagation.

    For the 2D variant the state is the doorway of a pump resonant with
    ``pump`` and populations are expressed per unit resonant doorway weight.
    """
    model = build_model(spec, bath) if model is None else model
    rho0, norm = initial_state(model, variant, pump)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    states = np.array([model.propagator.apply(rho0, t) for t in t_grid])
    master = model.levels.populations(states) / norm
    freqs = model.peak_frequencies()
    if abs(freqs[0] - freqs[1]) < 1e-6:
        vals = peak_samples(model, pulse, states, combined_probes(model))
        res, cond = resolve_combined(model, pulse, vals)
        if variant == "2d":
            res = res / pump_weight(model, pump)
        master2 = np.column_stack([master[:, 0] + master[:, 2], master[:, 1]])
        return DeviationReport(t_grid, res, master2, ("up+lp", "ds"), cond, variant, pump if variant == "2d" else None)
    mat, cond = build_coefficients(model, pulse, variant, pump)
    system = ResolutionSystem(mat, peak_samples(model, pulse, states), spec.n_molecules, cond, variant)
    res = resolve(system)
    return DeviationReport(t_grid, res, master, LABELS, cond, variant, pump if variant == "2d" else None)
