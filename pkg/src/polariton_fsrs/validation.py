"""Invariant suite run by ``fsrs validate`` (and reused by the tests)."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bath import BathSpec, gibbs_populations
from .model import SystemSpec, build_polariton_basis, ct_polarizability, raman_polarizability, transition_dipoles
from .resolver import ResolutionSystem, build_coefficients, peak_samples, resolve
from .response import PulseSpec
from .signals import PolaritonModel, build_model, initial_superposition, signal_1d


@dataclass
class Check:
    name: str
    value: float
    limit: float

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value < self.limit)

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<34s} {self.value:.3e} < {self.limit:.0e}"


def rotate_dark(basis, rng):
    """Same eigenproblem with the dark subspace rotated by a random orthogonal matrix."""
    dark = basis.dark
    q, _ = np.linalg.qr(rng.standard_normal((len(dark), len(dark))))
    u = basis.transform.copy()
    u[dark] = q @ u[dark]
    return replace(basis, transform=u)


def rebuild(spec: SystemSpec, basis):
    return replace(
        basis,
        dipoles_ge=transition_dipoles(spec, basis),
        alpha=raman_polarizability(spec, basis),
        alpha_ct=ct_polarizability(spec, basis) if spec.has_ct else None,
    )


def propagator_checks(model: PolaritonModel, times=(0.1, 1.0, 5.0, 20.0)):
    prop = model.propagator
    rho0 = initial_superposition(model)
    states = [prop.apply(rho0, t) for t in times]
    trace = max(abs(np.trace(r) - 1.0) for r in states)
    herm = max(np.max(np.abs(r - r.conj().T)) for r in states)
    pos = max(max(0.0, -np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min()) for r in states)
    semi = max(
        np.max(np.abs(prop.matrix(t + s) - prop.matrix(t) @ prop.matrix(s)))
        for t, s in ((0.3, 0.7), (2.0, 5.0), (10.0, 10.0))
    )
    return [
        Check("trace preservation", trace, 1e-10),
        Check("hermiticity", herm, 1e-10),
        Check("positivity", pos, 1e-10),
        Check("semigroup", semi, 1e-9),
    ]


def steady_state_check(model: PolaritonModel, t_long=1e4):
    """Relative deviation of long-time polariton populations from Boltzmann weights."""
    rho = model.propagator.apply(initial_superposition(model), t_long)
    pops = np.real(np.diagonal(rho))[model.levels.polaritons]
    gibbs = gibbs_populations(model.levels, model.bath.temperature) * pops.sum()
    return Check("Gibbs steady state (relative)", float(np.max(np.abs(pops - gibbs)) / gibbs.max()), 1e-6)


def channel_checks(model: PolaritonModel, pulse: PulseSpec):
    grid = signal_1d(model, pulse, np.arange(0.0, 501.0), [0.5, 2.0, 20.0])
    scale = np.max(np.abs(grid.total))
    add = np.max(np.abs(grid.total - grid.population - grid.coherence)) / scale
    return [Check("channel additivity", add, 1e-10)]


def dark_rotation_check(spec: SystemSpec, bath: BathSpec, pulse: PulseSpec, seed=0):
    rng = np.random.default_rng(seed)
    base = build_model(spec, bath)
    rotated = build_model(spec, bath, rebuild(spec, rotate_dark(base.basis, rng)))
    t = [0.5, 5.0, 20.0]
    pa = [base.levels.populations(base.propagator.apply(initial_superposition(base), x)) for x in t]
    pb = [rotated.levels.populations(rotated.propagator.apply(initial_superposition(rotated), x)) for x in t]
    sa = signal_1d(base, pulse, np.arange(0.0, 301.0, 5.0), t).total
    sb = signal_1d(rotated, pulse, np.arange(0.0, 301.0, 5.0), t).total
    dev = max(np.max(np.abs(np.array(pa) - np.array(pb))), np.max(np.abs(sa - sb)) / np.max(np.abs(sa)))
    return Check("dark-basis rotation invariance", float(dev), 1e-9)


def round_trip_check(model: PolaritonModel, pulse: PulseSpec, n_states=20, seed=1):
    rng = np.random.default_rng(seed)
    mat, cond = build_coefficients(model, pulse)
    lv = model.levels
    worst = 0.0
    for _ in range(n_states):
        up, dark, lp = rng.dirichlet(np.ones(3))
        rho = np.zeros((lv.dim, lv.dim))
        rho[lv.up, lv.up], rho[lv.lp, lv.lp] = up, lp
        rho[lv.dark, lv.dark] = dark / len(lv.dark)
        got = resolve(ResolutionSystem(mat, peak_samples(model, pulse, rho), model.spec.n_molecules, cond))
        worst = max(worst, float(np.max(np.abs(got - [up, dark, lp]))))
    return Check("resolver round trip", worst, 1e-2)


def run_suite(spec: SystemSpec, bath: BathSpec, pulse: PulseSpec):
    model = build_model(spec, bath)
    checks = propagator_checks(model) + [steady_state_check(model)] + channel_checks(model, pulse)
    checks.append(dark_rotation_check(spec, bath, pulse))
    if abs(spec.detuning) > 1e-12:
        checks.append(round_trip_check(model, pulse))
    return checks
