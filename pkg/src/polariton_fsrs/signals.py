"""1D, 2D and charge-transfer stimulated Raman spectra.

A spectrum is linear in the density matrix present when the Raman pair
arrives, so each signal is evaluated as

    S(v, T) = (1/pi) Im sum_cd rho_cd(T) K_cd(v)

with a kernel ``K`` built once per (model, pulses, shift axis) from the
window ``W``, the vertex ``V`` and the complex line frequencies. Splitting
rho into its diagonal and off-diagonal parts gives the population and
coherence channels, which add up to the total exactly.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bath import BathSpec, LevelSpace, Propagator, RedfieldGenerator, build_generator, complex_line_frequencies
from .model import SystemSpec, build_polariton_basis, PolaritonBasis, pumped_superposition
from .response import PulseSpec, doorway_density, raman_overlap, window_v, window_w, coherence_lineshape

log = logging.getLogger(__name__)

DEFAULT_MAX_POINTS = 50_000_000


class GridBudgetError(ValueError):
    pass


class SeparationError(ValueError):
    pass


@dataclass
class PolaritonModel:
    """Everything the spectra need, built once from a system and a bath."""

    spec: SystemSpec
    bath: BathSpec
    basis: PolaritonBasis
    generator: RedfieldGenerator
    propagator: Propagator
    xi: np.ndarray

    @property
    def levels(self) -> LevelSpace:
        return self.generator.levels

    @property
    def alpha(self):
        return self.levels.embed(self.basis.alpha).real

    @property
    def alpha_ct(self):
        """Level-space vector of alpha_{e,ct} (zero off the polariton block)."""
        out = np.zeros(self.levels.dim)
        out[self.levels.polaritons] = self.basis.alpha_ct
        return out

    @property
    def dipoles(self):
        return self.basis.dipoles_ge

    def xi_eg(self):
        """Complex frequencies of the ground-polariton coherences xi_{e,g}."""
        return self.xi[self.levels.polaritons, self.levels.ground]

    def peak_frequencies(self):
        """Analytic gaps (up-ds, ds-lp, up-lp) in rad/ps."""
        b = self.basis
        return np.array([b.gap("up", "ds"), b.gap("ds", "lp"), b.gap("up", "lp")])

    def ct_peak_frequencies(self):
        """Analytic gaps (lp-ct, ds-ct, up-ct) in rad/ps."""
        e = self.levels.energies
        ct = e[self.levels.ct]
        return np.array([e[self.levels.lp] - ct, e[self.levels.dark[0]] - ct, e[self.levels.up] - ct])


def build_model(spec: SystemSpec, bath: BathSpec, basis: Optional[PolaritonBasis] = None) -> PolaritonModel:
    basis = build_polariton_basis(spec) if basis is None else basis
    gen = build_generator(basis, bath, spec)
    return PolaritonModel(spec, bath, basis, gen, Propagator(gen), complex_line_frequencies(gen))


@dataclass
class SpectrumGrid:
    """Real spectra on (delay, [pump,] shift) axes. Spectral axes in rad/ps."""

    shift_axis: np.ndarray
    delay_axis: np.ndarray
    total: np.ndarray
    population: np.ndarray
    coherence: np.ndarray
    pump_axis: Optional[np.ndarray] = None
    valid: Optional[np.ndarray] = None
    kind: str = "1d"
    meta: dict = field(default_factory=dict)

    def channel(self, name):
        return {"total": self.total, "population": self.population, "coherence": self.coherence}[name]

    def normalized(self):
        """Scale all channels by the largest |total| of the earliest delay."""
        first = int(np.argmin(self.delay_axis))
        scale = np.max(np.abs(self.total[first]))
        if scale == 0:
            return self
        return replace(self, total=self.total / scale, population=self.population / scale,
                       coherence=self.coherence / scale, meta={**self.meta, "normalization": float(scale)})

    def pump_index(self, omega0):
        return int(np.argmin(np.abs(self.pump_axis - omega0)))


def split_channels(rho):
    """Split a (stack of) matrices into diagonal and off-diagonal parts."""
    rho = np.asarray(rho)
    diag = np.zeros_like(rho)
    idx = np.arange(rho.shape[-1])
    diag[..., idx, idx] = rho[..., idx, idx]
    return diag, rho - diag


def raman_kernel(model: PolaritonModel, pulse: PulseSpec, shift) -> np.ndarray:
    """Kernel of the polariton-to-polariton Raman signal, shape (n_shift, d, d).

    Ket-side (dissipative) and bra-side (parametric) pathways enter with the
    same sign, so a line at w_ab carries rho_aa + rho_bb.
    """
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    alpha = model.alpha
    w = window_w(alpha, model.xi, pulse, shift)
    # window_v carries u(v); here the vertex acts bare and u(v - zeta) is applied per element
    sym = np.einsum("vde,ec->vcd", w, alpha) + np.einsum("de,vec->vcd", alpha, w)
    u = raman_overlap(shift[:, None, None], pulse.s2, pulse.s3, pulse.delta_angular, zeta=model.xi[None])
    return sym * u


def ct_kernel(model: PolaritonModel, pulse: PulseSpec, shift) -> np.ndarray:
    """Kernel of the Raman signal terminating on the CT level (dissipative only)."""
    if not model.levels.has_ct:
        raise ValueError("charge-transfer level is not configured")
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    a = model.alpha_ct
    ct = model.levels.ct
    line = coherence_lineshape(shift[:, None], model.xi[:, ct][None], pulse.s2)  # (v, c)
    amp = np.outer(a, a)  # [c, d] -> alpha_{c,ct} alpha_{d,ct}
    u = raman_overlap(shift[:, None, None], pulse.s2, pulse.s3, pulse.delta_angular, zeta=model.xi[None])
    return amp[None] * line[:, :, None] * u


def evaluate(kernel, rho):
    """(1/pi) Im sum_cd rho_cd K_cd(v); rho may be a stack (..., d, d)."""
    return np.imag(np.einsum("vcd,...cd->...v", kernel, rho)) / np.pi


def initial_superposition(model: PolaritonModel):
    """|psi><psi| with psi = sum_e mu_{g,e}|e> / norm, embedded in the level space."""
    psi, _ = pumped_superposition(model.basis)
    return model.levels.embed(np.outer(psi, psi))


def doorway_states(model: PolaritonModel, omega0):
    """Doorway states for each pump frequency, embedded, shape (n_w0, d, d)."""
    dd = doorway_density(model.dipoles, model.xi_eg(), omega0)
    out = np.zeros((dd.shape[0], model.levels.dim, model.levels.dim), dtype=complex)
    p = model.levels.polaritons
    out[:, p[:, None], p[None, :]] = dd
    return out


def _check_budget(n_points, max_points):
    if n_points > max_points:
        raise GridBudgetError(
            f"grid has {n_points} points, above the budget of {max_points}; "
            "coarsen the shift/pump steps or split the delay list"
        )


def _flags(pulse, delays, strict):
    valid = np.array([pulse.separation_valid(t) for t in delays])
    if not valid.all():
        bad = [float(t) for t, ok in zip(delays, valid) if not ok]
        msg = f"delays {bad} ps overlap the pulses; doorway-window factorisation is approximate there"
        if strict:
            raise SeparationError(msg)
        log.warning(msg)
    return valid


def _channels(kernel, rho):
    diag, off = split_channels(rho)
    pop = evaluate(kernel, diag)
    coh = evaluate(kernel, off)
    return pop + coh, pop, coh


def _run_delays(func, delays, threads):
    if threads and threads > 1 and len(delays) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(func, delays))
    return [func(t) for t in delays]


def signal_1d(model: PolaritonModel, pulse: PulseSpec, shift, delays, rho0=None, threads=1,
              strict=False, max_points=DEFAULT_MAX_POINTS) -> SpectrumGrid:
    """Raman spectrum after the broadband pump, as a function of the delay."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    _check_budget(shift.size * delays.size, max_points)
    valid = _flags(pulse, delays, strict)
    rho0 = initial_superposition(model) if rho0 is None else np.asarray(rho0, dtype=complex)
    kernel = raman_kernel(model, pulse, shift)

    def one(t):
        return _channels(kernel, model.propagator.apply(rho0, t))

    res = _run_delays(one, delays, threads)
    tot, pop, coh = (np.array(x) for x in zip(*res))
    return SpectrumGrid(shift, delays, tot, pop, coh, valid=valid, kind="1d")


def _signal_pumped(model, pulse, shift, pump, delays, kernel, kind, threads, strict, max_points):
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    pump = np.atleast_1d(np.asarray(pump, dtype=float))
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    _check_budget(shift.size * pump.size * delays.size, max_points)
    valid = _flags(pulse, delays, strict)
    doors = doorway_states(model, pump)

    def one(t):
        return _channels(kernel, model.propagator.apply(doors, t))

    res = _run_delays(one, delays, threads)
    tot, pop, coh = (np.array(x) for x in zip(*res))
    return SpectrumGrid(shift, delays, tot, pop, coh, pump_axis=pump, valid=valid, kind=kind)


def signal_2d(model: PolaritonModel, pulse: PulseSpec, shift, pump, delays, threads=1,
              strict=False, max_points=DEFAULT_MAX_POINTS) -> SpectrumGrid:
    """Two-dimensional spectrum over (delay, pump frequency w0, Raman shift)."""
    kernel = raman_kernel(model, pulse, shift)
    return _signal_pumped(model, pulse, shift, pump, delays, kernel, "2d", threads, strict, max_points)


def signal_ct(model: PolaritonModel, pulse: PulseSpec, shift, pump, delays, threads=1,
              strict=False, max_points=DEFAULT_MAX_POINTS) -> SpectrumGrid:
    """Two-dimensional spectrum of Raman transitions ending on the CT level."""
    kernel = ct_kernel(model, pulse, shift)
    return _signal_pumped(model, pulse, shift, pump, delays, kernel, "ct", threads, strict, max_points)


def factorized_window_signal(model: PolaritonModel, pulse: PulseSpec, shift, rho):
    """Population signal from the W and V operators directly,
    (1/pi) Im Tr{W V rho + V W rho} for a diagonal rho. Matches the kernel form."""
    w = window_w(model.alpha, model.xi, pulse, shift)
    v = window_v(model.alpha, pulse, shift)
    diag, _ = split_channels(np.asarray(rho, dtype=complex))
    return np.imag(np.einsum("vab,vbc,ca->v", w, v, diag) + np.einsum("vab,vbc,ca->v", v, w, diag)) / np.pi


def state_contributions(kernel, rho):
    """Population-channel signal split by the level whose population drives it.

    Returns shape (..., d, n_shift); summing over the level axis gives the
    population channel.
    """
    pops = np.real(np.diagonal(np.asarray(rho), axis1=-2, axis2=-1))
    lines = np.imag(np.diagonal(kernel, axis1=1, axis2=2)).T / np.pi  # (d, v)
    return pops[..., :, None] * lines
