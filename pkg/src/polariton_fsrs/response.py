"""Pulses, the Raman lineshape function and doorway/window operators.

All pulses are one-sided exponentials. Frequencies below are angular (rad/ps)
and times are in ps; the Raman shift ``v`` is ``omega - omega_2``.

The Raman detection integral for a coherence with complex frequency ``xi``
(Raman vertex at tau, detection up to t > tau) is

    f(v, xi) = int_0^inf dt int_0^t dtau exp(i v t - t/s2)
               exp((i delta - 1/s2 - 1/s3) tau) exp(-i xi (t - tau)).

Shearing ``t = tau + s`` separates it into a probe factor u(v) (the Raman
vertex, ``V``) times a coherence lineshape w(v, xi) (the window, ``W``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .units import EV_TO_RAD_PER_PS


class UnphysicalConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    """Pulse sequence: resonant pump pair (eps1) and Raman pair (eps2 narrow, eps3 broad).

    Times in ps, carrier frequencies in eV, durations in ps.
    """

    t1: float = 0.0
    t1_prime: float = 0.0
    t2: float = 1.0
    t3: float = 1.0
    w1: float = 1.84
    w2: float = 4.0
    w3: float = 4.0 - 243.0 / EV_TO_RAD_PER_PS
    s1: float = 0.015
    s2: float = 1.0
    s3: float = 0.035

    def __post_init__(self):
        for name in ("s1", "s2", "s3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pulse duration {name} must be strictly positive")
        if abs(self.t2 - self.t3) > 1e-12:
            raise ValueError("Raman pulses must arrive together (t2 == t3)")

    @classmethod
    def from_delta(cls, delta_thz=243.0, w2=4.0, **kwargs):
        """Build from the Raman pump/probe difference ``delta`` in rad/ps."""
        return cls(w2=w2, w3=w2 - delta_thz / EV_TO_RAD_PER_PS, **kwargs)

    @property
    def delta(self):
        """w2 - w3 in eV."""
        return self.w2 - self.w3

    @property
    def delta_angular(self):
        return self.delta * EV_TO_RAD_PER_PS

    @property
    def t0(self):
        return self.t1_prime - self.t1

    @property
    def big_t(self):
        return self.t2 - self.t1

    def with_delay(self, delay):
        return replace(self, t2=self.t1_prime + delay, t3=self.t1_prime + delay)

    def raman_window_duration(self):
        """Effective duration of the eps2* eps3 overlap."""
        return 1.0 / (1.0 / self.s2 + 1.0 / self.s3)

    def separation_valid(self, delay=None, factor=1.0):
        """Whether the pump is over before the Raman vertex (doorway-window factorisation)."""
        delay = self.big_t if delay is None else delay
        return bool(delay > factor * (self.s1 + self.raman_window_duration()))


def pulse_envelope(t, center, sigma, omega):
    """theta(t - T) exp(-(t - T)/sigma) exp(-i omega t)."""
    t = np.asarray(t, dtype=float)
    dt = t - center
    on = dt >= 0
    env = np.where(on, np.exp(-np.where(on, dt, 0.0) / sigma), 0.0)
    return env * np.exp(-1j * omega * t)


def f_function(v, xi, s2, s3, delta):
    """Closed form of the Raman detection integral, as printed:

    f = 1/(-1/s2 + i delta - 1/s3 + i xi)
        * (1/(i(v - xi) - 1/s2) - 1/(-2/s2 + i(v + delta) - 1/s3))
    """
    v = np.asarray(v, dtype=float)
    pre = -1.0 / s2 + 1j * delta - 1.0 / s3 + 1j * xi
    if np.any(np.abs(pre) < 1e-12 * (1.0 / s3 + abs(delta))):
        raise UnphysicalConfigurationError(
            "lossless configuration hits the pole of the printed lineshape prefactor"
        )
    first = 1.0 / (1j * (v - xi) - 1.0 / s2)
    second = 1.0 / (-2.0 / s2 + 1j * (v + delta) - 1.0 / s3)
    return (first - second) / pre


def coherence_lineshape(v, xi, s2):
    """w(v, xi) = int_0^inf ds exp(i (v - xi) s - s/s2)."""
    return 1.0 / (1.0 / s2 - 1j * (np.asarray(v, dtype=float) - xi))


def raman_overlap(v, s2, s3, delta, zeta=0.0):
    """u(v) = int_0^inf dtau exp(i (v + delta - zeta) tau - 2 tau/s2 - tau/s3).

    ``zeta`` is the complex frequency of the coherence already present when
    the Raman vertex acts (zero for populations).
    """
    return 1.0 / (2.0 / s2 + 1.0 / s3 - 1j * (np.asarray(v, dtype=float) + delta - zeta))


def detection_kernel(v, xi, s2, s3, delta, zeta=0.0):
    """Time-ordered detection integral; equals :func:`f_function` at ``zeta = 0``."""
    return coherence_lineshape(v, xi, s2) * raman_overlap(v, s2, s3, delta, zeta)


def _pair_mask(xi, tol=1e-8):
    """Pathways whose detected coherence has a nonzero frequency (Raman-shifted)."""
    return np.abs(np.real(xi)) > tol


def window_w(alpha, xi, pulse: PulseSpec, shift):
    """Raman window operator spectrum W_xy(v) = alpha_xy w(v, xi_yx).

    Returns shape ``(len(shift), d, d)``. Elastic (zero-frequency) pathways
    are dropped; they cancel identically between ket and bra interactions.
    """
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    xi_t = np.asarray(xi).T
    lines = coherence_lineshape(shift[:, None, None], xi_t[None], pulse.s2)
    return np.where(_pair_mask(xi_t)[None], alpha[None] * lines, 0.0)


def window_v(alpha, pulse: PulseSpec, shift):
    """Raman vertex operator V(v) = alpha u(v), shape ``(len(shift), d, d)``."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    u = raman_overlap(shift, pulse.s2, pulse.s3, pulse.delta_angular)
    return u[:, None, None] * np.asarray(alpha)[None]


def doorway_resonance(omega0, xi_eg, xi_ge):
    """1/(-w0 - xi_ge) + 1/(w0 - xi_eg)."""
    omega0 = np.asarray(omega0, dtype=float)
    return 1.0 / (-omega0 - xi_ge) + 1.0 / (omega0 - xi_eg)


def doorway_time(dipoles, xi_eg, t0):
    """Doorway D(T0)_{e2 e1} = mu_e2 mu_e1 (-i) exp(-i xi_{e1 g} T0) (T0 >= 0),
    continued to T0 < 0 by exp(i xi_{g e1} T0), with xi_ge = -conj(xi_eg).

    Impulsive pump pair separated by T0; the ground-excited coherence created
    by the first pulse evolves until the second one closes it.
    """
    xi_eg = np.asarray(xi_eg)
    if t0 >= 0:
        phase = np.exp(-1j * xi_eg * t0)
    else:
        phase = np.exp(1j * (-np.conj(xi_eg)) * t0)
    return -1j * np.outer(dipoles, dipoles * phase)


def doorway_freq(dipoles, xi_eg, omega0):
    """Fourier transform of :func:`doorway_time` over T0. Shape ``(n_w0, n, n)``."""
    xi_eg = np.asarray(xi_eg)
    omega0 = np.atleast_1d(np.asarray(omega0, dtype=float))
    res = doorway_resonance(omega0[:, None], xi_eg[None], -np.conj(xi_eg)[None])
    return np.asarray(dipoles)[None, :, None] * (np.asarray(dipoles)[None, None, :] * res[:, None, :])


def doorway_density(dipoles, xi_eg, omega0):
    """Doorway state: hermitian part of (i/2) D(w0), real-valued populations.

    On resonance with state e the population is mu_e^2 / Gamma_eg.
    """
    d = 0.5j * doorway_freq(dipoles, xi_eg, omega0)
    return 0.5 * (d + np.conj(np.swapaxes(d, -1, -2)))
