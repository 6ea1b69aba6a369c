"""
Physical constants and unit conversions used across the toolkit.

Energies and rates are carried in MHz of ordinary frequency everywhere.
All 2π bookkeeping lives in this module.

    MU_B_OVER_H_MHZ_PER_T   = 13996.24  MHz/T   (μ_B/h, CODATA via scipy)
    K_B_OVER_H_MHZ_PER_K    = 20836.62  MHz/K   (k_B/h, CODATA via scipy)
"""
import math

from scipy import constants

MU_B = constants.physical_constants["Bohr magneton"][0]  # J/T
MU_0 = constants.mu_0  # N/A^2
HBAR = constants.hbar  # J s

MU_B_OVER_H_MHZ_PER_T = constants.physical_constants["Bohr magneton in Hz/T"][0] / constants.mega
K_B_OVER_H_MHZ_PER_K = constants.physical_constants["Boltzmann constant in Hz/K"][0] / constants.mega

TWO_PI = 2.0 * math.pi

MHZ_PER_GHZ = 1000.0
HZ_PER_MHZ = constants.mega
MT_PER_T = 1000.0

# 10*log10(2): half-power point of a power Lorentzian
HALF_POWER_DB = 10.0 * math.log10(2.0)


def angular(frequency_hz: float) -> float:
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * frequency_hz


def ordinary(angular_rate: float) -> float:
    """Angular rate (rad/s) to ordinary frequency (Hz)."""
    return angular_rate / TWO_PI
