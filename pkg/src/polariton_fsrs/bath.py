"""Vibrational bath, polariton Redfield generator and its propagator.

Density matrices live on the level space ``[g, lp, ds.., up, (ct)]`` and are
vectorised column-major: ``vec(rho) = rho.flatten(order="F")``, so that
``vec(A rho B) = kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

from .model import PolaritonBasis, SystemSpec
from .units import EV_TO_RAD_PER_PS, thermal_angular, K_B_EV

log = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-8  # rad/ps


@dataclass(frozen=True)
class BathSpec:
    """Drude bath. ``lambda0`` in eV; ``gamma0`` and ``extra_dephasing`` in rad/ps."""

    lambda0: float = 0.00066
    gamma0: float = 200.0
    temperature: float = 300.0
    extra_dephasing: float = 10.0

    def __post_init__(self):
        if self.lambda0 < 0:
            raise ValueError("lambda0 must be non-negative")
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be strictly positive")
        if not self.temperature > 0:
            raise ValueError("temperature must be strictly positive")
        if self.extra_dephasing < 0:
            raise ValueError("extra_dephasing must be non-negative")


def spectral_density(omega, bath: BathSpec):
    """Drude spectral density J(w) = 2 lambda0 w gamma0 / (w^2 + gamma0^2), in eV.

    ``omega`` is in rad/ps (same unit as ``gamma0``). J is odd in omega.
    """
    omega = np.asarray(omega, dtype=float)
    return 2.0 * bath.lambda0 * omega * bath.gamma0 / (omega**2 + bath.gamma0**2)


def bose_occupation(energy, temperature):
    """Bose-Einstein occupation for a mode of energy ``energy`` (eV)."""
    x = np.asarray(energy, dtype=float) / (K_B_EV * temperature)
    return 1.0 / np.expm1(x)


@dataclass(frozen=True)
class LevelSpace:
    """Energies (rad/ps) and labels of the propagated levels."""

    energies: np.ndarray
    labels: tuple
    n_polaritons: int
    has_ct: bool

    @property
    def dim(self):
        return len(self.energies)

    @property
    def ground(self):
        return 0

    @property
    def polaritons(self):
        return np.arange(1, 1 + self.n_polaritons)

    @property
    def lp(self):
        return 1

    @property
    def up(self):
        return self.n_polaritons

    @property
    def dark(self):
        return np.arange(2, self.n_polaritons)

    @property
    def ct(self):
        return self.n_polaritons + 1 if self.has_ct else None

    def embed(self, matrix):
        """Place a polariton-block matrix into the full level space."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        p = self.polaritons
        out[np.ix_(p, p)] = matrix
        return out

    def populations(self, rho):
        """(up, dark aggregate, lp) populations of a level-space matrix."""
        d = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
        return np.stack([d[..., self.up], d[..., self.dark].sum(axis=-1), d[..., self.lp]], axis=-1)


def level_space(basis: PolaritonBasis, spec: SystemSpec | None = None) -> LevelSpace:
    energies = [0.0] + list(basis.angular)
    labels = ("g",) + tuple(basis.labels)
    has_ct = spec is not None and spec.has_ct
    if has_ct:
        energies.append(spec.ct_energy * EV_TO_RAD_PER_PS)
        labels = labels + ("ct",)
    return LevelSpace(np.array(energies), labels, basis.n_molecules + 1, has_ct)


def relaxation_rates(basis: PolaritonBasis, bath: BathSpec) -> np.ndarray:
    """Symmetric table gamma_mn = J(w_mn) sum_i |U_mi|^2 |U_ni|^2 in rad/ps.

    Degenerate pairs carry J(0) = 0 here; their finite transfer is handled by
    the J * nbar limit in :func:`transfer_rates`.
    """
    w = basis.exciton_weights() ** 2
    overlap = w @ w.T
    gap = np.abs(basis.angular[:, None] - basis.angular[None, :])
    j = spectral_density(gap, bath) * EV_TO_RAD_PER_PS
    out = j * overlap
    np.fill_diagonal(out, 0.0)
    return out


def transfer_rates(basis: PolaritonBasis, bath: BathSpec) -> np.ndarray:
    """Population transfer rates ``k[to, from]`` in 1/ps.

    Downhill transfer carries gamma (nbar + 1), uphill gamma nbar; for
    degenerate pairs J(w) nbar(w) -> 2 lambda0 kT / gamma0 in both directions.
    """
    w = basis.exciton_weights() ** 2
    overlap = w @ w.T
    e = basis.angular
    kt = thermal_angular(bath.temperature)
    lam = bath.lambda0 * EV_TO_RAD_PER_PS
    n = len(e)
    k = np.zeros((n, n))
    for m in range(n):
        for l in range(n):
            if m == l:
                continue
            gap = e[m] - e[l]  # from m to l releases energy gap
            if abs(gap) < DEGENERATE_TOL:
                rate = 2.0 * lam * kt / bath.gamma0
            else:
                j = 2.0 * lam * abs(gap) * bath.gamma0 / (gap**2 + bath.gamma0**2)
                nbar = 1.0 / np.expm1(abs(gap) / kt)
                rate = j * (nbar + 1.0 if gap > 0 else nbar)
            k[l, m] = rate * overlap[m, l]
    return k


@dataclass(frozen=True)
class RedfieldGenerator:
    """Liouvillian on column-major vectorised density matrices (1/ps)."""

    levels: LevelSpace
    matrix: np.ndarray
    rates: np.ndarray
    dephasing: np.ndarray
    extra_dephasing: float

    @property
    def dimension(self):
        return self.levels.dim

    def apply(self, rho):
        d = self.dimension
        return (self.matrix @ np.asarray(rho).flatten(order="F")).reshape((d, d), order="F")


def _jump_superop(a, b, d):
    """Lindblad superoperator for jump |a><b| with unit rate."""
    op = np.zeros((d, d))
    op[a, b] = 1.0
    lhl = op.T @ op
    eye = np.eye(d)
    return np.kron(op, op) - 0.5 * (np.kron(eye, lhl) + np.kron(lhl.T, eye))


def build_generator(basis: PolaritonBasis, bath: BathSpec, spec: SystemSpec | None = None) -> RedfieldGenerator:
    """Assemble L = -i[H0, .] + W + pure dephasing.

    W is the Lindblad-form sum over polariton pairs; jumps conserve the
    excitation number, so the ground and CT levels only dephase. The
    phenomenological ``extra_dephasing`` damps every coherence at that rate.
    """
    levels = level_space(basis, spec)
    d = levels.dim
    eye = np.eye(d)
    h = np.diag(levels.energies)
    lv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))

    k_pol = transfer_rates(basis, bath)
    k = np.zeros((d, d))
    p = levels.polaritons
    k[np.ix_(p, p)] = k_pol
    for to in range(d):
        for frm in range(d):
            if k[to, frm] > 0:
                lv = lv + k[to, frm] * _jump_superop(to, frm, d)

    if bath.extra_dephasing > 0:
        for a in range(d):
            proj = np.zeros((d, d))
            proj[a, a] = 1.0
            lv = lv + bath.extra_dephasing * (np.kron(proj, proj) - 0.5 * (np.kron(eye, proj) + np.kron(proj, eye)))

    out = k.sum(axis=0)
    dephasing = 0.5 * (out[:, None] + out[None, :])
    np.fill_diagonal(dephasing, 0.0)
    return RedfieldGenerator(levels, lv, k, dephasing, bath.extra_dephasing)


def complex_line_frequencies(generator: RedfieldGenerator, extra_dephasing=None) -> np.ndarray:
    """xi_ab = w_ab - i (gamma_ab + gamma) for every level pair (rad/ps).

    Diagonal entries are zero: populations neither oscillate nor dephase.
    """
    gamma = generator.extra_dephasing if extra_dephasing is None else extra_dephasing
    e = generator.levels.energies
    xi = (e[:, None] - e[None, :]) - 1j * (generator.dephasing + gamma)
    np.fill_diagonal(xi, 0.0)
    return xi


class Propagator:
    """Green's propagator G(t) = exp(L t), via a cached eigendecomposition."""

    def __init__(self, generator: RedfieldGenerator, defect_tol=1e-8):
        self.generator = generator
        lmat = generator.matrix
        vals, vecs = scipy.linalg.eig(lmat)
        try:
            inv = np.linalg.inv(vecs)
            resid = np.linalg.norm(vecs @ np.diag(vals) @ inv - lmat) / max(1.0, np.linalg.norm(lmat))
            cond = np.linalg.cond(vecs)
        except np.linalg.LinAlgError:
            resid, cond = np.inf, np.inf
        self.defective = not (resid < defect_tol and cond < 1e8)
        if self.defective:
            log.info("generator is numerically defective (resid=%.2e, cond=%.2e); using expm", resid, cond)
            self._vals = self._vecs = self._inv = None
        else:
            self._vals, self._vecs, self._inv = vals, vecs, inv

    @property
    def dimension(self):
        return self.generator.dimension

    @cached_property
    def eigenvalues(self):
        if self._vals is not None:
            return self._vals
        return scipy.linalg.eigvals(self.generator.matrix)

    def matrix(self, t):
        if t < 0:
            raise ValueError("propagation time must be non-negative")
        if self.defective:
            return scipy.linalg.expm(self.generator.matrix * t)
        return (self._vecs * np.exp(self._vals * t)) @ self._inv

    def apply(self, x, t):
        """Propagate any level-space matrix (or a stack of them, shape (..., d, d))."""
        d = self.dimension
        x = np.asarray(x, dtype=complex)
        flat = np.swapaxes(x, -1, -2).reshape(x.shape[:-2] + (d * d,))
        y = flat @ self.matrix(t).T
        return np.swapaxes(y.reshape(x.shape[:-2] + (d, d)), -1, -2)


def propagate(prop: Propagator, rho0, t, atol=1e-10):
    """rho(t) = G(t) rho(0) for a physical (hermitian, unit-trace) density matrix."""
    rho0 = np.asarray(rho0, dtype=complex)
    if np.max(np.abs(rho0 - rho0.conj().T)) > atol:
        raise ValueError("initial density matrix is not hermitian")
    if abs(np.trace(rho0) - 1.0) > atol:
        raise ValueError("initial density matrix does not have unit trace")
    return prop.apply(rho0, t)


def gibbs_populations(levels: LevelSpace, temperature):
    """Boltzmann weights over the polariton manifold (aligned with ``levels.polaritons``)."""
    e = levels.energies[levels.polaritons]
    w = np.exp(-(e - e.min()) / thermal_angular(temperature))
    return w / w.sum()
