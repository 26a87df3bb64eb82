"""Molecule-cavity Hamiltonian, polariton basis and derived couplings.

The model lives in the single-excitation sector: N exciton states and one
photon state, coupled uniformly by ``g``. Diagonalising gives the lower
polariton, N-1 degenerate dark states and the upper polariton, stored in
ascending order ``[lp, ds_1 .. ds_{N-1}, up]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .units import EV_TO_RAD_PER_PS


class ConfigurationError(ValueError):
    """Raised when a system description is physically or structurally invalid."""


@dataclass(frozen=True)
class SystemSpec:
    """Parameters of N emitters in a single-mode cavity (energies in eV)."""

    n_molecules: int
    omega_exciton: float
    omega_cavity: float
    coupling_g: float
    exciton_interaction_u: float = 0.0
    molecular_dipoles: Optional[np.ndarray] = None
    near_edge_energies: Optional[np.ndarray] = None
    near_edge_dipoles: Optional[np.ndarray] = None
    ct_energy: Optional[float] = None
    ct_dipoles: Optional[np.ndarray] = None

    def __post_init__(self):
        n = int(self.n_molecules)
        if n < 1:
            raise ConfigurationError("n_molecules must be a positive integer")
        object.__setattr__(self, "n_molecules", n)
        for name in ("omega_exciton", "omega_cavity"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be strictly positive")
        if self.coupling_g < 0:
            raise ConfigurationError("coupling_g must be non-negative")

        defaults = {
            "molecular_dipoles": np.ones(n),
            "near_edge_energies": np.full(n, self.omega_exciton + 2.0),
            "near_edge_dipoles": np.ones(n),
        }
        for name, default in defaults.items():
            value = getattr(self, name)
            arr = default if value is None else np.asarray(value, dtype=float).reshape(-1)
            if arr.size == 1 and n > 1:
                arr = np.full(n, float(arr[0]))
            if arr.shape != (n,):
                raise ConfigurationError(f"{name} must have length {n}")
            object.__setattr__(self, name, arr)
        if np.any(self.near_edge_energies <= 0):
            raise ConfigurationError("near_edge_energies must be strictly positive")

        if self.ct_energy is not None:
            if not self.ct_energy > 0:
                raise ConfigurationError("ct_energy must be strictly positive")
            ct = np.ones(n) if self.ct_dipoles is None else np.asarray(self.ct_dipoles, dtype=float).reshape(-1)
            if ct.size == 1 and n > 1:
                ct = np.full(n, float(ct[0]))
            if ct.shape != (n,):
                raise ConfigurationError(f"ct_dipoles must have length {n}")
            object.__setattr__(self, "ct_dipoles", ct)

    @classmethod
    def from_collective(cls, n_molecules, omega_exciton, collective_coupling, detuning_in_g=0.0, **kwargs):
        """Build a spec from the collective coupling g*sqrt(N) and a detuning
        ``omega_exciton - omega_cavity`` expressed in units of the single-molecule g."""
        g = collective_coupling / np.sqrt(n_molecules)
        return cls(n_molecules, omega_exciton, omega_exciton - detuning_in_g * g, g, **kwargs)

    @property
    def detuning(self):
        return self.omega_exciton - self.omega_cavity

    @property
    def has_ct(self):
        return self.ct_energy is not None


@dataclass(frozen=True)
class PolaritonBasis:
    """Eigenstates of the single-excitation Hamiltonian.

    ``transform[e, j]`` is the amplitude of state ``e`` on exciton ``j``
    (columns ``0..N-1``) or on the photon (column ``N``).
    """

    frequencies: np.ndarray
    transform: np.ndarray
    n_molecules: int
    dipoles_ge: Optional[np.ndarray] = None
    alpha: Optional[np.ndarray] = None
    alpha_ct: Optional[np.ndarray] = None
    labels: tuple = field(default=())

    @property
    def lp(self):
        return 0

    @property
    def up(self):
        return self.n_molecules

    @property
    def dark(self):
        return np.arange(1, self.n_molecules)

    @property
    def angular(self):
        """Eigenfrequencies in rad/ps."""
        return self.frequencies * EV_TO_RAD_PER_PS

    def gap(self, a, b):
        """Transition frequency between two states (or classes) in rad/ps."""
        idx = {"up": self.up, "lp": self.lp, "ds": 1}
        a, b = idx.get(a, a), idx.get(b, b)
        return float(self.angular[a] - self.angular[b])

    def exciton_weights(self):
        """Phase-averaged |U_{e,j}| over the exciton columns.

        Within every degenerate block the per-state magnitudes are replaced by
        their root-mean-square over the block. This is exact in the
        translation-symmetric (Fourier) dark basis, where every dark state has
        weight 1/sqrt(N) on every molecule, and it makes every derived
        quantity independent of how the degenerate subspace is rotated.
        """
        amp = np.abs(self.transform[:, : self.n_molecules])
        out = amp.copy()
        for block in degenerate_blocks(self.frequencies):
            if len(block) > 1:
                out[block] = np.sqrt(np.mean(amp[block] ** 2, axis=0))
        return out


def degenerate_blocks(frequencies, tol=1e-9):
    """Group indices of an ascending spectrum into degenerate blocks."""
    blocks, current = [], [0]
    for k in range(1, len(frequencies)):
        if abs(frequencies[k] - frequencies[current[-1]]) <= tol * max(1.0, abs(frequencies[k])):
            current.append(k)
        else:
            blocks.append(current)
            current = [k]
    blocks.append(current)
    return blocks


def build_hamiltonian_m1(spec: SystemSpec) -> np.ndarray:
    """Single-excitation block of the molecule-cavity Hamiltonian.

    The on-site interaction U only acts with two excitations on one molecule,
    so it does not appear here.
    """
    n = spec.n_molecules
    if n < 2:
        raise ConfigurationError("dark states need at least two molecules (n_molecules >= 2)")
    h = np.diag(np.r_[np.full(n, spec.omega_exciton), spec.omega_cavity])
    h[:n, n] = spec.coupling_g
    h[n, :n] = spec.coupling_g
    return h


def polariton_frequencies(spec: SystemSpec):
    """Closed-form (lp, up) energies in eV."""
    w, v = spec.omega_exciton, spec.omega_cavity
    split = np.sqrt(4 * spec.n_molecules * spec.coupling_g**2 + (v - w) ** 2)
    return 0.5 * (v + w - split), 0.5 * (v + w + split)


def diagonalize_polaritons(h: np.ndarray, spec: SystemSpec) -> PolaritonBasis:
    if not np.allclose(h, h.T, atol=1e-14):
        raise ConfigurationError("Hamiltonian must be symmetric")
    n = spec.n_molecules
    freqs, vecs = np.linalg.eigh(h)
    if freqs[-1] - freqs[0] < 1e-14:
        raise ConfigurationError("upper and lower polariton are degenerate; labeling is unresolvable")
    u = vecs.T.copy()
    # fix the sign of the bright states so their transition dipoles are positive
    for e in (0, n):
        ref = u[e, :n].sum()
        if abs(ref) < 1e-12:
            ref = u[e, n]
        if ref < 0:
            u[e] *= -1
    labels = ("lp",) + tuple(f"ds{k}" for k in range(1, n)) + ("up",)
    return PolaritonBasis(freqs, u, n, labels=labels)


def k_tensor_full(basis: PolaritonBasis) -> np.ndarray:
    """Quartic kernel K_klmn = sum_j conj(U_kj) conj(U_lj) U_mj U_nj over excitons."""
    ue = basis.transform[:, : basis.n_molecules]
    return np.einsum("kj,lj,mj,nj->klmn", ue.conj(), ue.conj(), ue, ue)


def k_tensor(basis: PolaritonBasis, k, l, m, n) -> float:
    ue = basis.transform[:, : basis.n_molecules]
    return float(np.real(np.sum(ue[k].conj() * ue[l].conj() * ue[m] * ue[n])))


def transition_dipoles(spec: SystemSpec, basis: PolaritonBasis) -> np.ndarray:
    """Ground-to-polariton dipoles mu_{g,e} = sum_j U_{e,j} p_j."""
    return basis.transform[:, : spec.n_molecules] @ spec.molecular_dipoles


def raman_polarizability(spec: SystemSpec, basis: PolaritonBasis) -> np.ndarray:
    """Electronic Raman polarizability between polariton states, via the near-edge levels.

    alpha_ee' = sum_i P_i^2 |U_ie U_e'i| (1/(w_i - w_e') + 1/(w_i - w_e))
    """
    wi = spec.near_edge_energies
    detune = wi[None, :] - basis.frequencies[:, None]  # (e, i)
    if np.any(detune <= 0):
        raise ConfigurationError("near-edge energies must lie above every polariton level")
    amp = basis.exciton_weights()
    inv = 1.0 / detune
    weights = spec.near_edge_dipoles**2
    pair = np.einsum("i,ei,fi,ei->ef", weights, amp, amp, inv)
    return pair + pair.T


def ct_polarizability(spec: SystemSpec, basis: PolaritonBasis) -> np.ndarray:
    """Raman polarizability from each polariton state to the charge-transfer level."""
    if not spec.has_ct:
        raise ConfigurationError("charge-transfer level is not configured (ct_energy missing)")
    wi = spec.near_edge_energies
    detune = wi[None, :] - basis.frequencies[:, None]
    if np.any(detune <= 0) or np.any(wi <= spec.ct_energy):
        raise ConfigurationError("near-edge energies must lie above the polariton and CT levels")
    amp = basis.exciton_weights()
    inv = 1.0 / (wi - spec.ct_energy)[None, :] + 1.0 / detune
    return np.sum(spec.near_edge_dipoles * spec.ct_dipoles * amp * inv, axis=1)


def build_polariton_basis(spec: SystemSpec) -> PolaritonBasis:
    """Diagonalise and attach dipoles and polarizabilities."""
    basis = diagonalize_polaritons(build_hamiltonian_m1(spec), spec)
    if spec.has_ct and spec.ct_energy >= basis.frequencies[0]:
        raise ConfigurationError("ct_energy must lie strictly below the lower polariton")
    return replace(
        basis,
        dipoles_ge=transition_dipoles(spec, basis),
        alpha=raman_polarizability(spec, basis),
        alpha_ct=ct_polarizability(spec, basis) if spec.has_ct else None,
    )


def pumped_superposition(basis: PolaritonBasis):
    """First-order pumped state sum_e mu_{g,e}|e> / norm, and the norm itself."""
    mu = basis.dipoles_ge
    norm = float(np.sqrt(np.sum(mu**2)))
    return mu / norm, norm
