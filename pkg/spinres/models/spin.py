"""
Spin Hamiltonian domain models
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

Row3 = Tuple[float, float, float]
Matrix3 = Tuple[Row3, Row3, Row3]


def is_half_integer(value: float) -> bool:
    """True when 2*value is a non-negative integer"""
    twice = 2.0 * value
    return twice >= 0 and math.isfinite(twice) and abs(twice - round(twice)) < 1e-12


class TensorKind(str, Enum):
    ZEEMAN_G = "zeeman_g"          # dimensionless
    HYPERFINE_A = "hyperfine_A"    # MHz
    QUADRUPOLE_Q = "quadrupole_Q"  # MHz, symmetric and traceless


class InteractionTensor(BaseModel):
    """3x3 interaction tensor in the crystal frame (D1, D2, b)"""
    model_config = ConfigDict(frozen=True)

    matrix: Matrix3
    kind: TensorKind

    @field_validator('matrix')
    @classmethod
    def validate_finite(cls, v):
        if not all(math.isfinite(x) for row in v for x in row):
            raise ValueError("Tensor entries must be finite")
        return v

    @model_validator(mode='after')
    def validate_quadrupole(self):
        if self.kind == TensorKind.QUADRUPOLE_Q:
            m = self.array
            scale = max(1.0, float(np.abs(m).max()))
            if np.abs(m - m.T).max() > 1e-9 * scale:
                raise ValueError("Quadrupole tensor must be symmetric")
            if abs(np.trace(m)) > 1e-9 * scale:
                raise ValueError("Quadrupole tensor must be traceless")
        return self

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @classmethod
    def from_array(cls, array, kind: TensorKind) -> "InteractionTensor":
        m = np.asarray(array, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"Tensor must be 3x3, got shape {m.shape}")
        return cls(matrix=tuple(tuple(float(x) for x in row) for row in m), kind=kind)

    @classmethod
    def isotropic(cls, value: float, kind: TensorKind) -> "InteractionTensor":
        return cls.from_array(value * np.eye(3), kind)

    @classmethod
    def diagonal(cls, values: Sequence[float], kind: TensorKind) -> "InteractionTensor":
        return cls.from_array(np.diag(values), kind)


class SpinSystem(BaseModel):
    """One ion site or subclass: electron spin S, nuclear spin I and the g, A, Q tensors"""
    model_config = ConfigDict(frozen=True)

    S: float = 0.5
    I: float = 0.0
    g: InteractionTensor
    A: Optional[InteractionTensor] = None
    Q: Optional[InteractionTensor] = None

    @field_validator('S')
    @classmethod
    def validate_electron_spin(cls, v):
        if not is_half_integer(v) or v < 0.5:
            raise ValueError(f"Electron spin must be a half-integer >= 1/2, got {v}")
        return float(v)

    @field_validator('I')
    @classmethod
    def validate_nuclear_spin(cls, v):
        if not is_half_integer(v):
            raise ValueError(f"Nuclear spin must be a non-negative half-integer, got {v}")
        return float(v)

    @model_validator(mode='after')
    def validate_tensors(self):
        if self.g.kind != TensorKind.ZEEMAN_G:
            raise ValueError("g must be a zeeman_g tensor")
        if self.A is not None and self.A.kind != TensorKind.HYPERFINE_A:
            raise ValueError("A must be a hyperfine_A tensor")
        if self.Q is not None and self.Q.kind != TensorKind.QUADRUPOLE_Q:
            raise ValueError("Q must be a quadrupole_Q tensor")
        if self.I == 0 and (self.A is not None or self.Q is not None):
            raise ValueError("A and Q require a nonzero nuclear spin I")
        return self

    @property
    def electron_dimension(self) -> int:
        return int(round(2 * self.S)) + 1

    @property
    def nuclear_dimension(self) -> int:
        return int(round(2 * self.I)) + 1

    @property
    def dimension(self) -> int:
        return self.electron_dimension * self.nuclear_dimension


class FieldVector(BaseModel):
    """Magnetic field in Tesla, crystal frame (D1, D2, b)"""
    model_config = ConfigDict(frozen=True)

    components: Row3

    @field_validator('components')
    @classmethod
    def validate_finite(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("Field components must be finite")
        return v

    @property
    def array(self) -> np.ndarray:
        return np.array(self.components, dtype=float)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.array))

    @classmethod
    def along(cls, direction: Sequence[float], magnitude: float) -> "FieldVector":
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(components=tuple(float(x) for x in magnitude * n))


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray  # MHz, ascending
    states: np.ndarray    # eigenvectors as columns

    @property
    def dimension(self) -> int:
        return len(self.energies)


@dataclass(frozen=True)
class Transition:
    level_i: int
    level_j: int
    frequency: float        # MHz
    dipole_strength: float  # |<j| n.g.S |i>|^2


@dataclass(frozen=True)
class TransitionTable:
    entries: List[Transition] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Transition]:
        return iter(self.entries)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([t.frequency for t in self.entries], dtype=float)
