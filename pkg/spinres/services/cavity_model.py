"""
Coupled resonator / spin-ensemble response.

Rates are ordinary-frequency MHz. gamma is the half-width of the spin
Lorentzian, kappa the full width of the cavity line, so that

    Gamma_Z = 2 g_coll^2 gamma / (Delta^2 + gamma^2)
    Gamma_tot = kappa + sum_k Gamma_Z,k

S21 is the transmission of two coupled damped modes, written per unit 2*pi
(every term of the angular-frequency form divided by 2*pi):

    S21(f) = (kappa/2) / ( i (f - f_r) + kappa/2 + sum_k g_k^2 / ( i (f - f_s,k) + gamma_k ) )

so the bare cavity peaks at exactly 0 dB with phase 0 and its |S21|^2 has
FWHM kappa. The configured dB offset is added to the magnitude afterwards.
"""
import logging
from typing import Sequence, Union

import numpy as np

from spinres.models.cavity import CavityParams, CouplingGeometry, EnsembleTransition, S21Trace
from spinres.utils.constants import (
    HALF_POWER_DB, HBAR, HZ_PER_MHZ, MHZ_PER_GHZ, MU_0, MU_B_OVER_H_MHZ_PER_T, angular, ordinary,
)
from spinres.utils.errors import DataError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _scalar_or_array(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


def spin_frequency(t: EnsembleTransition, B: ArrayLike):
    """g mu_B B / h in MHz"""
    return _scalar_or_array(t.g_factor * MU_B_OVER_H_MHZ_PER_T * np.asarray(B, dtype=float))


def detuning(cavity: CavityParams, t: EnsembleTransition, B: ArrayLike):
    """Delta_Z = f_r - g mu_B B / h (MHz)"""
    field = np.asarray(B, dtype=float)
    if np.any(field < 0):
        raise DataError("Magnetic field must be non-negative")
    return _scalar_or_array(cavity.f_r_mhz - t.g_factor * MU_B_OVER_H_MHZ_PER_T * field)


def resonance_field(t: EnsembleTransition, f_r: float) -> float:
    """Field (T) where the line crosses a resonator at f_r GHz"""
    return MHZ_PER_GHZ * f_r / (t.g_factor * MU_B_OVER_H_MHZ_PER_T)


def spin_linewidth(t: EnsembleTransition, delta: ArrayLike):
    """Spin-induced cavity broadening (MHz)"""
    delta = np.asarray(delta, dtype=float)
    return _scalar_or_array(2.0 * t.g_coll ** 2 * t.gamma / (delta ** 2 + t.gamma ** 2))


def total_linewidth(cavity: CavityParams, transitions: Sequence[EnsembleTransition], B: ArrayLike):
    """kappa plus the independent Lorentzian contribution of every line"""
    field = np.asarray(B, dtype=float)
    total = np.full(field.shape, cavity.kappa, dtype=float)
    for t in transitions:
        total = total + spin_linewidth(t, detuning(cavity, t, field))
    return _scalar_or_array(total)


def s21_trace(cavity: CavityParams, transitions: Sequence[EnsembleTransition], B: float,
              probe_frequencies: Sequence[float], offset_db: float = 0.0) -> S21Trace:
    """Magnitude (dB) and phase (rad) of the coupled-mode transmission on a probe grid (GHz)"""
    probe = np.asarray(probe_frequencies, dtype=float)
    if probe.size == 0:
        raise DataError("Probe frequency grid is empty")
    if np.any(np.diff(probe) < 0):
        raise DataError("Probe frequency grid must be sorted")

    probe_mhz = MHZ_PER_GHZ * probe
    half_kappa = 0.5 * cavity.kappa

    denominator = 1j * (probe_mhz - cavity.f_r_mhz) + half_kappa
    for t in transitions:
        f_s = spin_frequency(t, B)
        denominator = denominator + t.g_coll ** 2 / (1j * (probe_mhz - f_s) + t.gamma)

    s21 = half_kappa / denominator
    magnitude_db = 20.0 * np.log10(np.abs(s21)) + offset_db
    return S21Trace(field=float(B), probe_frequencies=probe, magnitude_db=magnitude_db, phase=np.angle(s21))


def trace_fwhm(probe_frequencies: Sequence[float], magnitude_db: Sequence[float]) -> float:
    """Full width (MHz) of the highest peak at 3.01 dB below its maximum"""
    probe = np.asarray(probe_frequencies, dtype=float)
    mag = np.asarray(magnitude_db, dtype=float)
    if probe.size < 3 or probe.size != mag.size:
        raise DataError("Trace needs at least 3 matching probe and magnitude samples")

    peak = int(np.argmax(mag))
    level = mag[peak] - HALF_POWER_DB

    def crossing(indices):
        previous = peak
        for k in indices:
            if mag[k] < level:
                # linear interpolation between k and the last point above the level
                fraction = (mag[previous] - level) / (mag[previous] - mag[k])
                return probe[previous] + fraction * (probe[k] - probe[previous])
            previous = k
        return None

    left = crossing(range(peak - 1, -1, -1))
    right = crossing(range(peak + 1, probe.size))
    if left is None or right is None:
        raise DataError("Peak is not bracketed by the half-power level on the probe grid")
    return float(MHZ_PER_GHZ * (right - left))


def single_spin_coupling(cavity: CavityParams, geom: CouplingGeometry) -> float:
    """g_c / 2pi in Hz from mu_m sqrt(mu_0 omega_r / (2 hbar V_c))"""
    omega_r = angular(cavity.f_r_mhz * HZ_PER_MHZ)
    rate = geom.magnetic_moment * np.sqrt(MU_0 * omega_r / (2.0 * HBAR * geom.mode_volume))
    return float(ordinary(rate))


def spins_needed(kappa: float, g_c: float) -> float:
    """N = (kappa / g_c)^2 with kappa in MHz and g_c in Hz"""
    if kappa <= 0 or g_c <= 0:
        raise DataError("kappa and g_c must be positive")
    return (kappa * HZ_PER_MHZ / g_c) ** 2


def collective_coupling(g_c: float, n_spins: float) -> float:
    """g_c sqrt(N), same unit as g_c"""
    return float(g_c * np.sqrt(n_spins))


def cooperativity(t: EnsembleTransition, kappa: float) -> float:
    """On-resonance Gamma_Z / kappa = 2 g_coll^2 / (kappa gamma)"""
    return 2.0 * t.g_coll ** 2 / (kappa * t.gamma)


def is_strong_coupling(t: EnsembleTransition, kappa: float) -> bool:
    return t.g_coll > kappa and t.g_coll > t.gamma
