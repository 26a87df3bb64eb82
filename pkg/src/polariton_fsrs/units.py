"""Physical constants and unit conversions.

Energies are carried in eV at the model boundary. Everything that evolves in
time (rates, transition frequencies, lineshapes) works in angular frequency,
rad/ps, which is what the spectral axes call "THz".
"""

import numpy as np

HBAR_EV_PS = 6.582119569e-4  # eV * ps
EV_TO_RAD_PER_PS = 1.0 / HBAR_EV_PS  # 1519.267...
K_B_EV = 8.617333262e-5  # eV / K


def ev_to_angular(energy_ev):
    """Convert an energy in eV to angular frequency in rad/ps."""
    return np.asarray(energy_ev) * EV_TO_RAD_PER_PS if np.ndim(energy_ev) else energy_ev * EV_TO_RAD_PER_PS


def angular_to_ev(omega):
    return np.asarray(omega) * HBAR_EV_PS if np.ndim(omega) else omega * HBAR_EV_PS


def thermal_angular(temperature):
    """k_B T expressed in rad/ps."""
    return K_B_EV * temperature * EV_TO_RAD_PER_PS
