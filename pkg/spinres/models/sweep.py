"""
Field sweep records: linewidth-vs-field and raw S21-vs-field
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from spinres.utils.errors import DataError


class SweepSchema(str, Enum):
    FWHM = "fwhm"
    S21 = "s21"


@dataclass
class FieldSweep:
    """Samples of (B [T], fwhm [MHz], optional sigma [MHz]) with B strictly increasing"""
    fields: np.ndarray
    fwhm: np.ndarray
    sigma: Optional[np.ndarray] = None
    f_r: Optional[float] = None          # GHz
    temperature: Optional[float] = None  # K
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.fields = np.asarray(self.fields, dtype=float)
        self.fwhm = np.asarray(self.fwhm, dtype=float)
        if self.sigma is not None:
            self.sigma = np.asarray(self.sigma, dtype=float)

        if self.fields.ndim != 1 or self.fields.shape != self.fwhm.shape:
            raise DataError("Sweep fields and fwhm must be 1-D arrays of equal length")
        if self.fields.size == 0:
            raise DataError("Sweep has no samples")
        if not (np.all(np.isfinite(self.fields)) and np.all(np.isfinite(self.fwhm))):
            raise DataError("Sweep values must be finite")
        if np.any(np.diff(self.fields) <= 0):
            raise DataError("Sweep fields must be strictly increasing")
        if np.any(self.fwhm <= 0):
            raise DataError("Linewidths must be positive")
        if self.sigma is not None:
            if self.sigma.shape != self.fields.shape or np.any(~np.isfinite(self.sigma)) or np.any(self.sigma <= 0):
                raise DataError("Uncertainties must be positive, finite and one per sample")

    def __len__(self) -> int:
        return int(self.fields.size)


@dataclass
class S21Sweep:
    """Rows of (B [T], probe f [GHz], |S21| [dB], phase [rad]) grouped by field"""
    fields: np.ndarray
    probe_frequencies: np.ndarray
    magnitude_db: np.ndarray
    phase: np.ndarray
    f_r: Optional[float] = None
    temperature: Optional[float] = None
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.fields = np.asarray(self.fields, dtype=float)
        self.probe_frequencies = np.asarray(self.probe_frequencies, dtype=float)
        self.magnitude_db = np.asarray(self.magnitude_db, dtype=float)
        self.phase = np.asarray(self.phase, dtype=float)

        shape = self.fields.shape
        if len(shape) != 1 or any(a.shape != shape for a in (self.probe_frequencies, self.magnitude_db, self.phase)):
            raise DataError("S21 columns must be 1-D arrays of equal length")
        if self.fields.size == 0:
            raise DataError("Sweep has no samples")
        if not all(np.all(np.isfinite(a)) for a in (self.fields, self.probe_frequencies, self.magnitude_db, self.phase)):
            raise DataError("Sweep values must be finite")
        if np.any(np.diff(self.fields) < 0):
            raise DataError("S21 rows must be ordered by field")

    def __len__(self) -> int:
        return int(self.fields.size)

    def traces(self) -> List[slice]:
        """Row ranges sharing one field value"""
        boundaries = np.nonzero(np.diff(self.fields) != 0)[0] + 1
        starts = np.concatenate(([0], boundaries))
        stops = np.concatenate((boundaries, [self.fields.size]))
        return [slice(int(a), int(b)) for a, b in zip(starts, stops)]
