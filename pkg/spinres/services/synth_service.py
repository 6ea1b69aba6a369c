"""
Forward simulation of field sweeps from an experiment config, with optional
seeded Gaussian noise for test data.
"""
import logging
from typing import Dict, Optional

import numpy as np

from spinres.models.sweep import FieldSweep, S21Sweep
from spinres.services.cavity_model import s21_trace, total_linewidth
from spinres.services.experiment_service import ExperimentService
from spinres.utils.constants import MHZ_PER_GHZ
from spinres.utils.errors import DataError

logger = logging.getLogger(__name__)


def _metadata(service: ExperimentService, source: str) -> Dict[str, str]:
    metadata = {"source": source}
    if service.sweep.ramp_rate is not None:
        metadata["ramp_rate"] = f"{service.sweep.ramp_rate!r} T/s"
    return metadata


def simulate_linewidths(service: ExperimentService) -> FieldSweep:
    """Noise-free kappa + sum of spin linewidths over the configured field grid"""
    fields = service.field_grid()
    lines = service.ensemble_transitions()
    fwhm = np.atleast_1d(total_linewidth(service.cavity, lines, fields))
    logger.info(f"Simulated {fields.size} fields with {len(lines)} line(s)")
    return FieldSweep(fields=fields, fwhm=fwhm, f_r=service.cavity.f_r,
                      temperature=service.sweep.temperature, metadata=_metadata(service, "sweep"))


def _check_noise(noise: float):
    if not noise >= 0 or not np.isfinite(noise):
        raise DataError(f"Noise must be a finite fraction >= 0, got {noise}")


def synthesize_linewidths(service: ExperimentService, noise: float, seed: Optional[int] = None) -> FieldSweep:
    """Simulated linewidths times (1 + noise * N(0, 1)), reproducible for a fixed seed"""
    _check_noise(noise)
    clean = simulate_linewidths(service)
    rng = np.random.default_rng(seed)
    noisy = clean.fwhm * (1.0 + noise * rng.standard_normal(clean.fwhm.size))

    metadata = _metadata(service, "synth")
    metadata["noise"] = repr(float(noise))
    if seed is not None:
        metadata["seed"] = str(seed)
    return FieldSweep(fields=clean.fields, fwhm=noisy, f_r=clean.f_r,
                      temperature=clean.temperature, metadata=metadata)


def probe_grid(service: ExperimentService) -> np.ndarray:
    """Probe frequencies (GHz) spanning sweep.probe_span around f_r"""
    half_span = 0.5 * service.sweep.probe_span / MHZ_PER_GHZ
    return np.linspace(service.cavity.f_r - half_span, service.cavity.f_r + half_span,
                       service.sweep.probe_points)


def synthesize_s21(service: ExperimentService, noise: float = 0.0, seed: Optional[int] = None) -> S21Sweep:
    """Coupled-mode transmission at every field; noise perturbs |S21| and phase"""
    _check_noise(noise)
    lines = service.ensemble_transitions()
    probe = probe_grid(service)
    offset = service.config.output.db_offset
    rng = np.random.default_rng(seed)

    fields, frequencies, magnitudes, phases = [], [], [], []
    for B in service.field_grid():
        trace = s21_trace(service.cavity, lines, B, probe, offset_db=offset)
        magnitude = trace.magnitude_db
        phase = trace.phase
        if noise > 0:
            amplitude = np.abs(1.0 + noise * rng.standard_normal(probe.size))
            magnitude = magnitude + 20.0 * np.log10(amplitude)
            phase = phase + noise * rng.standard_normal(probe.size)
        fields.append(np.full(probe.size, B))
        frequencies.append(probe)
        magnitudes.append(magnitude)
        phases.append(phase)

    metadata = _metadata(service, "synth")
    metadata["noise"] = repr(float(noise))
    if seed is not None:
        metadata["seed"] = str(seed)
    logger.info(f"Simulated S21 at {len(fields)} fields x {probe.size} probe points")
    return S21Sweep(fields=np.concatenate(fields), probe_frequencies=np.concatenate(frequencies),
                    magnitude_db=np.concatenate(magnitudes), phase=np.concatenate(phases),
                    f_r=service.cavity.f_r, temperature=service.sweep.temperature, metadata=metadata)
