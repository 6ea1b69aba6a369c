"""
Spin Hamiltonian construction and diagonalization for Kramers ions.

    H = mu_B B.g.S + I.A.S + I.Q.I        (MHz)

The product space is ordered electron (x) nuclear. The nuclear Zeeman term is
not included. Eigenvectors follow a fixed convention so that results are
reproducible run to run:

* energies ascending;
* inside a degenerate cluster the basis diagonalizes diag(1, 2, ..., n)
  restricted to the cluster;
* each column is rotated so its largest-magnitude component is real positive.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from spinres.models.spin import (
    EigenSystem, FieldVector, InteractionTensor, SpinSystem, Transition,
    TransitionTable, is_half_integer,
)
from spinres.utils import settings
from spinres.utils.constants import MU_B_OVER_H_MHZ_PER_T
from spinres.utils.errors import CapacityError, DataError, HermiticityError, InvalidSpinError

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-10
DEGENERACY_TOLERANCE = 1e-9


def unit_vector(vector: Sequence[float], name: str = "direction") -> np.ndarray:
    """Validate a unit 3-vector (|n| = 1 within 1e-9)"""
    n = np.asarray(vector, dtype=float)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise DataError(f"{name} must be a finite 3-vector, got {vector}")
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise DataError(f"{name} must have unit length, |{name}| = {np.linalg.norm(n)}")
    return n


def spin_operators(j: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angular momentum matrices (Jx, Jy, Jz) in the basis m = j, j-1, ..., -j"""
    if not is_half_integer(j):
        raise InvalidSpinError(f"Spin must be a non-negative half-integer, got {j}")

    m = j - np.arange(int(round(2 * j)) + 1)
    jz = np.diag(m).astype(complex)

    # <m+1|J+|m> = sqrt(j(j+1) - m(m+1)), just above the diagonal
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.diag(ladder, k=1).astype(complex)
    jm = jp.conj().T

    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz


def build_hamiltonian(sys: SpinSystem, B: FieldVector, max_dimension: Optional[int] = None) -> np.ndarray:
    """Zeeman + hyperfine + quadrupole Hamiltonian in MHz"""
    cap = settings.MAX_DIMENSION if max_dimension is None else max_dimension
    if sys.dimension > cap:
        raise CapacityError(f"Hilbert dimension {sys.dimension} exceeds the configured cap of {cap}")

    s_ops = spin_operators(sys.S)
    i_ops = spin_operators(sys.I)
    eye_s = np.eye(sys.electron_dimension)
    eye_i = np.eye(sys.nuclear_dimension)

    h = np.zeros((sys.dimension, sys.dimension), dtype=complex)

    # mu_B sum_ab B_a g_ab S_b
    zeeman = MU_B_OVER_H_MHZ_PER_T * (B.array @ sys.g.array)
    for b in range(3):
        if zeeman[b] != 0.0:
            h += zeeman[b] * np.kron(s_ops[b], eye_i)

    # sum_ab A_ab I_a S_b
    if sys.A is not None:
        a_tensor = sys.A.array
        for a in range(3):
            for b in range(3):
                if a_tensor[a, b] != 0.0:
                    h += a_tensor[a, b] * np.kron(s_ops[b], i_ops[a])

    # sum_ab Q_ab I_a I_b
    if sys.Q is not None:
        q_tensor = sys.Q.array
        for a in range(3):
            for b in range(3):
                if q_tensor[a, b] != 0.0:
                    h += q_tensor[a, b] * np.kron(eye_s, i_ops[a] @ i_ops[b])

    return h


def _canonical_degenerate_bases(energies: np.ndarray, states: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(energies).max())) if len(energies) else 1.0
    states = states.copy()
    start = 0
    while start < len(energies):
        stop = start + 1
        while stop < len(energies) and energies[stop] - energies[stop - 1] < DEGENERACY_TOLERANCE * scale:
            stop += 1
        if stop - start > 1:
            block = states[:, start:stop]
            tie_breaker = np.diag(np.arange(1, states.shape[0] + 1, dtype=float))
            _, rotation = np.linalg.eigh(block.conj().T @ tie_breaker @ block)
            states[:, start:stop] = block @ rotation
        start = stop
    return states


def _fix_phases(states: np.ndarray) -> np.ndarray:
    states = states.copy()
    for k in range(states.shape[1]):
        column = states[:, k]
        magnitudes = np.abs(column)
        pivot = int(np.argmax(magnitudes >= magnitudes.max() - 1e-12))
        phase = column[pivot] / magnitudes[pivot]
        states[:, k] = column * np.conj(phase)
    return states


def diagonalize(H: np.ndarray) -> EigenSystem:
    """Dense Hermitian eigendecomposition with the documented basis convention"""
    h = np.asarray(H, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise HermiticityError(f"Expected a square matrix, got shape {h.shape}")

    norm = np.linalg.norm(h)
    asymmetry = np.linalg.norm(h - h.conj().T)
    if asymmetry > HERMITIAN_TOLERANCE * norm:
        raise HermiticityError(f"Matrix is not Hermitian (|H - H^+| / |H| = {asymmetry / norm:.3e})")

    energies, states = np.linalg.eigh(0.5 * (h + h.conj().T))
    states = _canonical_degenerate_bases(energies, states)
    states = _fix_phases(states)
    return EigenSystem(energies=energies, states=states)


def effective_g(g: InteractionTensor, direction: Sequence[float]) -> float:
    """sqrt(n^T g^T g n)"""
    n = unit_vector(direction)
    gn = g.array @ n
    return float(np.sqrt(gn @ gn))


def transitions(sys: SpinSystem, B: FieldVector, drive_direction: Sequence[float],
                strength_floor: float = 0.0) -> TransitionTable:
    """All level pairs i < j whose |<j| n.g.S |i>|^2 reaches strength_floor, sorted by frequency"""
    if strength_floor < 0:
        raise DataError(f"strength_floor must be >= 0, got {strength_floor}")
    n = unit_vector(drive_direction, "drive_direction")

    eig = diagonalize(build_hamiltonian(sys, B))

    s_ops = spin_operators(sys.S)
    eye_i = np.eye(sys.nuclear_dimension)
    coupling = n @ sys.g.array
    drive = sum(coupling[b] * np.kron(s_ops[b], eye_i) for b in range(3))
    elements = eig.states.conj().T @ drive @ eig.states

    entries = []
    for i in range(eig.dimension):
        for j in range(i + 1, eig.dimension):
            strength = float(abs(elements[j, i]) ** 2)
            if strength >= strength_floor:
                frequency = max(0.0, float(eig.energies[j] - eig.energies[i]))
                entries.append(Transition(i, j, frequency, strength))

    entries.sort(key=lambda t: (t.frequency, t.level_i, t.level_j))
    logger.debug(f"{len(entries)} transitions at |B| = {B.magnitude} T")
    return TransitionTable(entries=entries)


def rotation_matrix(axis: Sequence[float], angle_deg: float) -> np.ndarray:
    """Proper rotation by angle_deg about axis"""
    n = np.asarray(axis, dtype=float)
    length = np.linalg.norm(n)
    if length == 0 or not np.isfinite(length):
        raise DataError(f"Rotation axis must be a nonzero finite vector, got {axis}")
    return Rotation.from_rotvec(np.radians(angle_deg) * n / length).as_matrix()


def rotate_tensor(tensor: InteractionTensor, rotation: np.ndarray) -> InteractionTensor:
    """R t R^T"""
    r = np.asarray(rotation, dtype=float)
    return InteractionTensor.from_array(r @ tensor.array @ r.T, tensor.kind)


def c2_subclass(g: InteractionTensor, axis: Sequence[float]) -> InteractionTensor:
    """Tensor of the magnetically inequivalent subclass related by a 180 degree rotation about axis"""
    n = unit_vector(axis, "axis")
    r = 2.0 * np.outer(n, n) - np.eye(3)
    return rotate_tensor(g, r)


def subclasses(label: str, sys: SpinSystem,
               axis: Optional[Sequence[float]]) -> List[Tuple[str, SpinSystem]]:
    """Split a site into its two C2-related subclasses; a site without an axis is returned as is"""
    if axis is None:
        return [(label, sys)]

    partner = sys.model_copy(update={
        "g": c2_subclass(sys.g, axis),
        "A": c2_subclass(sys.A, axis) if sys.A is not None else None,
        "Q": c2_subclass(sys.Q, axis) if sys.Q is not None else None,
    })
    return [(f"{label}a", sys), (f"{label}b", partner)]


def misaligned_field(direction: Sequence[float], magnitude: float, misalignment_deg: float = 0.0,
                     tilt_axis: Sequence[float] = (0.0, 1.0, 0.0)) -> FieldVector:
    """Field of the given magnitude along direction tilted by misalignment_deg about tilt_axis"""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    if misalignment_deg:
        n = rotation_matrix(tilt_axis, misalignment_deg) @ n
    return FieldVector.along(n, magnitude)


def resonance_fields(sys: SpinSystem, direction: Sequence[float], frequency: float, field_max: float,
                     drive_direction: Optional[Sequence[float]] = None, strength_floor: float = 0.0,
                     points: int = 400) -> List[float]:
    """Fields (T) in [0, field_max] along direction where a transition matches frequency (MHz)"""
    n = unit_vector(direction)

    if sys.I == 0 and sys.S == 0.5 and drive_direction is None:
        tuning = effective_g(sys.g, n) * MU_B_OVER_H_MHZ_PER_T
        if tuning == 0:
            return []
        field = frequency / tuning
        return [field] if 0 <= field <= field_max else []

    def pair_frequency(field: float, i: int, j: int) -> float:
        energies = diagonalize(build_hamiltonian(sys, FieldVector.along(n, field))).energies
        return float(energies[j] - energies[i]) - frequency

    grid = np.linspace(0.0, field_max, points)
    spectra = np.array([diagonalize(build_hamiltonian(sys, FieldVector.along(n, b))).energies for b in grid])

    roots = []
    dim = sys.dimension
    for i in range(dim):
        for j in range(i + 1, dim):
            detuned = spectra[:, j] - spectra[:, i] - frequency
            crossings = np.nonzero(np.sign(detuned[:-1]) * np.sign(detuned[1:]) < 0)[0]
            for k in crossings:
                field = brentq(pair_frequency, grid[k], grid[k + 1], args=(i, j), xtol=1e-12)
                if drive_direction is not None:
                    table = transitions(sys, FieldVector.along(n, field), drive_direction)
                    strength = next(t.dipole_strength for t in table if (t.level_i, t.level_j) == (i, j))
                    if strength < strength_floor:
                        continue
                roots.append(field)

    return sorted(roots)


def zero_field_multiplets(energies: Sequence[float], tol: float = 1e-6) -> List[int]:
    """Sizes of the degenerate clusters of an ascending spectrum"""
    sizes = []
    previous = None
    for energy in energies:
        if previous is not None and energy - previous < tol:
            sizes[-1] += 1
        else:
            sizes.append(1)
        previous = energy
    return sizes
