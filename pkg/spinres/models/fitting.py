"""
Fit specification and result models
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spinres.models.cavity import CavityParams, EnsembleTransition

TRANSITION_PARAMETERS = ("g_factor", "gamma", "g_coll")


class FitParameter(BaseModel):
    """Initial value plus free/fixed flag and optional bounds"""
    model_config = ConfigDict(frozen=True)

    value: float
    free: bool = True
    lower: Optional[float] = None
    upper: Optional[float] = None

    @model_validator(mode='after')
    def validate_bounds(self):
        if not math.isfinite(self.value):
            raise ValueError("Initial value must be finite")
        for bound in (self.lower, self.upper):
            if bound is not None and not math.isfinite(bound):
                raise ValueError("Bounds must be finite where given")
        if self.lower is not None and self.value < self.lower:
            raise ValueError(f"Initial value {self.value} is below the lower bound {self.lower}")
        if self.upper is not None and self.value > self.upper:
            raise ValueError(f"Initial value {self.value} is above the upper bound {self.upper}")
        return self


class TransitionGuess(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    g_factor: FitParameter
    gamma: FitParameter
    g_coll: FitParameter

    @classmethod
    def from_transition(cls, t: EnsembleTransition) -> "TransitionGuess":
        return cls(
            label=t.label,
            g_factor=FitParameter(value=t.g_factor, lower=1e-6),
            gamma=FitParameter(value=t.gamma, lower=1e-6),
            g_coll=FitParameter(value=t.g_coll, lower=0.0),
        )


@dataclass(frozen=True)
class ModelParameters:
    """A concrete point of the forward model: resonator plus lines"""
    cavity: CavityParams
    transitions: Tuple[EnsembleTransition, ...]


class FitModelSpec(BaseModel):
    """Resonator (kappa free or fixed) and per-line initial guesses"""
    model_config = ConfigDict(frozen=True)

    cavity: CavityParams
    kappa: FitParameter
    transitions: List[TransitionGuess] = Field(default_factory=list)

    @model_validator(mode='after')
    def validate_spec(self):
        labels = [t.label for t in self.transitions]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Transition labels must be unique, got {labels}")
        if not any(p.free for _, p in self.parameters()):
            raise ValueError("At least one parameter must be free")
        return self

    @classmethod
    def create(cls, cavity: CavityParams, transitions: List[EnsembleTransition],
               kappa_free: bool = True) -> "FitModelSpec":
        return cls(
            cavity=cavity,
            kappa=FitParameter(value=cavity.kappa, free=kappa_free, lower=1e-9),
            transitions=[TransitionGuess.from_transition(t) for t in transitions],
        )

    def parameters(self) -> List[Tuple[str, FitParameter]]:
        """All parameters in Jacobian column order"""
        entries = [("kappa", self.kappa)]
        for t in self.transitions:
            entries.extend((f"{t.label}.{name}", getattr(t, name)) for name in TRANSITION_PARAMETERS)
        return entries

    @property
    def free_indices(self) -> List[int]:
        return [k for k, (_, p) in enumerate(self.parameters()) if p.free]

    @property
    def free_names(self) -> List[str]:
        return [name for name, p in self.parameters() if p.free]

    def free_values(self) -> np.ndarray:
        return np.array([p.value for _, p in self.parameters() if p.free], dtype=float)

    def free_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        free = [p for _, p in self.parameters() if p.free]
        lower = np.array([-np.inf if p.lower is None else p.lower for p in free], dtype=float)
        upper = np.array([np.inf if p.upper is None else p.upper for p in free], dtype=float)
        return lower, upper

    def with_fixed(self, name: str, value: float) -> "FitModelSpec":
        """Copy with one parameter pinned to value"""
        if name == "kappa":
            return self.model_copy(update={"kappa": FitParameter(value=value, free=False)})
        label, _, attribute = name.rpartition(".")
        if attribute not in TRANSITION_PARAMETERS:
            raise KeyError(name)
        transitions = []
        found = False
        for t in self.transitions:
            if t.label == label:
                t = t.model_copy(update={attribute: FitParameter(value=value, free=False)})
                found = True
            transitions.append(t)
        if not found:
            raise KeyError(name)
        return self.model_copy(update={"transitions": transitions})

    def model_parameters(self, free_values: Optional[np.ndarray] = None) -> ModelParameters:
        """Forward-model point with the free parameters replaced by free_values"""
        values = [p.value for _, p in self.parameters()]
        if free_values is not None:
            for k, v in zip(self.free_indices, free_values):
                values[k] = float(v)

        cavity = CavityParams(f_r=self.cavity.f_r, kappa=values[0])
        transitions = tuple(
            EnsembleTransition(
                label=t.label,
                g_factor=values[1 + 3 * k],
                gamma=values[2 + 3 * k],
                g_coll=values[3 + 3 * k],
            )
            for k, t in enumerate(self.transitions)
        )
        return ModelParameters(cavity=cavity, transitions=transitions)


@dataclass
class FitResult:
    parameters: ModelParameters
    names: List[str]                 # free parameters, covariance order
    values: np.ndarray
    covariance: np.ndarray
    rms_residual: float              # MHz
    iterations: int
    converged: bool
    cost: float
    message: str = ""
    fixed: Dict[str, float] = field(default_factory=dict)

    @property
    def uncertainties(self) -> Dict[str, float]:
        return {name: float(np.sqrt(max(self.covariance[k, k], 0.0))) for k, name in enumerate(self.names)}

    def value_of(self, name: str) -> float:
        if name == "kappa":
            return self.parameters.cavity.kappa
        label, _, attribute = name.rpartition(".")
        for t in self.parameters.transitions:
            if t.label == label:
                return float(getattr(t, attribute))
        raise KeyError(name)
