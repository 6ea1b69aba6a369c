"""
Resonator and spin-ensemble parameter models
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spinres.utils.constants import MHZ_PER_GHZ, MU_B


class CavityParams(BaseModel):
    """Resonator: f_r in GHz, loaded Q, total linewidth kappa (FWHM) in MHz"""
    model_config = ConfigDict(frozen=True)

    f_r: float = Field(..., gt=0)
    Q: Optional[float] = Field(None, gt=1)
    kappa: Optional[float] = Field(None, gt=0)

    @model_validator(mode='before')
    @classmethod
    def fill_linewidth(cls, data):
        if not isinstance(data, dict):
            return data
        f_r, q, kappa = data.get('f_r'), data.get('Q'), data.get('kappa')
        if q is None and kappa is None:
            raise ValueError("Either Q or kappa must be given")
        if f_r is None or float(f_r) <= 0:
            return data
        if q is not None and float(q) <= 1:
            return data
        if kappa is not None and float(kappa) <= 0:
            return data

        data = dict(data)
        if kappa is None:
            data['kappa'] = MHZ_PER_GHZ * float(f_r) / float(q)
        elif q is None:
            data['Q'] = MHZ_PER_GHZ * float(f_r) / float(kappa)
        else:
            implied = MHZ_PER_GHZ * float(f_r) / float(q)
            if abs(float(kappa) - implied) > 1e-6 * implied:
                raise ValueError(f"kappa = {kappa} MHz is inconsistent with f_r/Q = {implied} MHz")
        return data

    @property
    def f_r_mhz(self) -> float:
        return MHZ_PER_GHZ * self.f_r


class EnsembleTransition(BaseModel):
    """One spin line as seen by the cavity; gamma is the Lorentzian half-width"""
    model_config = ConfigDict(frozen=True)

    label: str = ""
    g_factor: float = Field(..., gt=0)
    gamma: float = Field(..., gt=0)      # MHz
    g_coll: float = Field(0.0, ge=0)     # MHz


class CouplingGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode_volume: float = Field(..., gt=0)   # m^3
    magnetic_moment: float                  # J/T

    @classmethod
    def from_g_factor(cls, g_factor: float, mode_volume: float) -> "CouplingGeometry":
        """mu_m = g mu_B"""
        return cls(mode_volume=mode_volume, magnetic_moment=g_factor * MU_B)


class ThermalPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    temperature: float = Field(..., gt=0)       # K
    g_coll_measured: float = Field(..., ge=0)   # MHz

    @model_validator(mode='after')
    def validate_finite(self):
        if not (math.isfinite(self.temperature) and math.isfinite(self.g_coll_measured)):
            raise ValueError("Thermal points must be finite")
        return self


@dataclass(frozen=True)
class S21Trace:
    """Transmission over a probe grid at one field"""
    field: float                   # T
    probe_frequencies: np.ndarray  # GHz
    magnitude_db: np.ndarray
    phase: np.ndarray              # rad
