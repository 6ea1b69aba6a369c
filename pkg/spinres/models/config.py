"""
Experiment configuration models. Unknown keys are rejected.
"""
import math
from typing import Dict, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spinres.models.cavity import CavityParams, EnsembleTransition
from spinres.models.spin import InteractionTensor, Matrix3, Row3, SpinSystem, TensorKind

TensorValue = Union[float, Matrix3]


def _tensor(value: TensorValue, kind: TensorKind) -> InteractionTensor:
    if isinstance(value, (int, float)):
        return InteractionTensor.isotropic(float(value), kind)
    return InteractionTensor(matrix=value, kind=kind)


class CavitySection(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    f_r: float = Field(..., gt=0)             # GHz
    Q: Optional[float] = Field(None, gt=1)
    kappa: Optional[float] = Field(None, gt=0)  # MHz

    def params(self) -> CavityParams:
        return CavityParams(f_r=self.f_r, Q=self.Q, kappa=self.kappa)


class SiteSection(BaseModel):
    """One ion site: scalar g or g tensor, optional hyperfine/quadrupole and ensemble parameters"""
    model_config = ConfigDict(extra='forbid', frozen=True)

    g: TensorValue
    A: Optional[TensorValue] = None      # MHz
    Q: Optional[Matrix3] = None          # MHz
    S: float = 0.5
    I: float = 0.0
    gamma: Optional[float] = Field(None, gt=0)   # MHz
    g_coll: Optional[float] = Field(None, ge=0)  # MHz
    subclass_axis: Optional[Row3] = None

    @model_validator(mode='after')
    def validate_axis(self):
        if self.subclass_axis is not None:
            norm = math.sqrt(sum(x * x for x in self.subclass_axis))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"subclass_axis must be a unit vector, |axis| = {norm}")
        return self

    @property
    def scalar_g(self) -> Optional[float]:
        return float(self.g) if isinstance(self.g, (int, float)) else None

    @property
    def has_ensemble(self) -> bool:
        return self.gamma is not None and self.g_coll is not None

    def spin_system(self) -> SpinSystem:
        return SpinSystem(
            S=self.S,
            I=self.I,
            g=_tensor(self.g, TensorKind.ZEEMAN_G),
            A=_tensor(self.A, TensorKind.HYPERFINE_A) if self.A is not None else None,
            Q=InteractionTensor(matrix=self.Q, kind=TensorKind.QUADRUPOLE_Q) if self.Q is not None else None,
        )

    def ensemble(self, label: str, g_factor: float, g_coll_scale: float = 1.0) -> EnsembleTransition:
        return EnsembleTransition(label=label, g_factor=g_factor, gamma=self.gamma,
                                  g_coll=self.g_coll * g_coll_scale)


class SweepSection(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    B_start: float = Field(0.0, ge=0)       # T
    B_stop: float = Field(0.2, ge=0)        # T
    B_step: float = Field(0.0005, gt=0)     # T
    temperature: Optional[float] = Field(None, gt=0)  # K
    direction: Row3 = (0.0, 0.0, 1.0)
    misalignment: float = 0.0               # deg
    tilt_axis: Row3 = (0.0, 1.0, 0.0)
    drive_direction: Row3 = (1.0, 0.0, 0.0)
    ramp_rate: Optional[float] = None       # T/s, metadata only
    probe_span: float = Field(60.0, gt=0)   # MHz
    probe_points: int = Field(241, ge=3)

    @model_validator(mode='after')
    def validate_range(self):
        if self.B_stop < self.B_start:
            raise ValueError("B_stop must not be below B_start")
        for name in ("direction", "tilt_axis", "drive_direction"):
            if not any(getattr(self, name)):
                raise ValueError(f"{name} must be nonzero")
        return self

    def grid(self) -> np.ndarray:
        """B_start, B_start + B_step, ... up to B_stop (T)"""
        count = int(math.floor((self.B_stop - self.B_start) / self.B_step + 1e-9)) + 1
        return self.B_start + self.B_step * np.arange(count)


class OutputSection(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    dir: str = "out"
    db_offset: float = 0.0  # dB


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    cavity: CavitySection
    sites: Dict[str, SiteSection]
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)
