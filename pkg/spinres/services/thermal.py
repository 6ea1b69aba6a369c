"""
Thermal spin polarization and the temperature dependence of g_coll.

For a two-level line at frequency f the equilibrium populations are

    n_lower = 1 / (1 + exp(-hf/k_B T)),  n_upper = 1 - n_lower
    polarization = n_lower - n_upper = tanh(hf / 2 k_B T)

and the collective coupling follows g_coll(T) = g_coll(0) sqrt(polarization).
The lower (more populated) level is labelled 1.
"""
import logging
from typing import Sequence, Tuple

import numpy as np

from spinres.models.cavity import ThermalPoint
from spinres.utils.constants import K_B_OVER_H_MHZ_PER_K, MHZ_PER_GHZ
from spinres.utils.errors import DataError, InsufficientDataError

logger = logging.getLogger(__name__)


def _reduced_energy(f: float, T) -> np.ndarray:
    """hf / k_B T"""
    if f <= 0:
        raise DataError(f"Transition frequency must be positive, got {f} GHz")
    temperature = np.asarray(T, dtype=float)
    if np.any(temperature <= 0):
        raise DataError("Temperature must be positive")
    return MHZ_PER_GHZ * f / (K_B_OVER_H_MHZ_PER_K * temperature)


def polarization(f: float, T):
    """Normalized population difference tanh(hf / 2 k_B T)"""
    value = np.tanh(0.5 * _reduced_energy(f, T))
    return float(value) if np.ndim(value) == 0 else value


def boltzmann_populations(f: float, T: float) -> Tuple[float, float]:
    """(n_lower, n_upper) fractions of a two-level line"""
    ratio = float(np.exp(-_reduced_energy(f, T)))
    lower = 1.0 / (1.0 + ratio)
    return lower, ratio * lower


def g_coll_at_temperature(g0: float, f: float, T):
    """g_coll(0) sqrt(polarization)"""
    if g0 < 0:
        raise DataError(f"g0 must be non-negative, got {g0}")
    value = g0 * np.sqrt(polarization(f, T))
    return float(value) if np.ndim(value) == 0 else value


def extrapolate_zero_T(points: Sequence[ThermalPoint], f: float) -> Tuple[float, float]:
    """Least-squares g_coll(0) from measured g_coll(T); returns (g0, rms residual) in MHz"""
    if len(points) < 2:
        raise InsufficientDataError(f"Need at least 2 thermal points, got {len(points)}")
    temperatures = np.array([p.temperature for p in points], dtype=float)
    if np.all(temperatures == temperatures[0]):
        raise InsufficientDataError("Thermal points must span at least two distinct temperatures")

    measured = np.array([p.g_coll_measured for p in points], dtype=float)
    basis = np.sqrt(polarization(f, temperatures))

    # model is linear in g0
    solution, *_ = np.linalg.lstsq(basis[:, None], measured, rcond=None)
    g0 = float(solution[0])
    rms = float(np.sqrt(np.mean((measured - g0 * basis) ** 2)))

    logger.info(f"Extrapolated g_coll(0) = {g0:.6g} MHz from {len(points)} points (rms {rms:.3g} MHz)")
    return g0, rms
