"""Exact collective-spin linear algebra for one pixel on the Dicke manifold.

A pixel of N spin-1/2 atoms driven only by collective fields stays in the
exchange-symmetric J = N/2 manifold, so every state is an (N+1)-component
complex vector over |J, M> with M = -J ... +J.  This module provides the
angular-momentum matrices, rotations, one-axis-twisting evolution, coherent
spin states and observable statistics on that manifold.

All functions are pure: states and operator matrices are immutable values
(ndarray buffers are marked read-only) and safe to share between tasks.
"""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITICITY_TOL = 1e-12
UNIT_AXIS_TOL = 1e-9

# Re-normalize a state only when the norm has drifted beyond this.
_NORM_DRIFT_TOL = 1e-10
# Cache-key resolution for rotation angles, in rad.
_ANGLE_QUANTUM = 1e-12

_AXES = ("x", "y", "z")
X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class DickeSpace:
    """Symmetric spin manifold for one pixel of ``n_atoms`` spin-1/2 atoms."""

    n_atoms: int
    j: float
    dim: int
    m_values: np.ndarray  # ascending, -J ... +J in unit steps

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DickeSpace) and other.n_atoms == self.n_atoms

    def __hash__(self) -> int:
        return hash(self.n_atoms)


@dataclass(frozen=True, eq=False)
class AngularMomentumOperator:
    """One Cartesian component of the collective angular momentum."""

    axis: str
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class PixelState:
    """Normalized amplitude vector over |J, M>, ordered as ``space.m_values``."""

    space: DickeSpace
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def build_space(n_atoms: int) -> DickeSpace:
    """Construct the J = N/2 manifold for a pixel of ``n_atoms`` atoms."""
    if isinstance(n_atoms, bool) or not isinstance(n_atoms, (int, np.integer)):
        raise ValueError(f"n_atoms must be a positive integer, got {n_atoms!r}")
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    n = int(n_atoms)
    j = n / 2.0
    m = -j + np.arange(n + 1, dtype=float)
    m.flags.writeable = False
    return DickeSpace(n_atoms=n, j=j, dim=n + 1, m_values=m)


@lru_cache(maxsize=None)
def _component_matrix(n_atoms: int, axis: str) -> np.ndarray:
    j = n_atoms / 2.0
    m = -j + np.arange(n_atoms + 1, dtype=float)
    if axis == "z":
        mat = np.diag(m).astype(complex)
    else:
        # <M+1| J+ |M> = sqrt(J(J+1) - M(M+1)) below the diagonal in the
        # ascending-M ordering.
        raising = np.zeros((n_atoms + 1, n_atoms + 1), dtype=complex)
        ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
        raising[np.arange(1, n_atoms + 1), np.arange(n_atoms)] = ladder
        if axis == "x":
            mat = (raising + raising.conj().T) / 2.0
        else:
            mat = (raising - raising.conj().T) / 2.0j
    mat.flags.writeable = False
    return mat


def angular_momentum_matrix(space: DickeSpace, axis: str) -> AngularMomentumOperator:
    """Return the collective J_axis matrix in the Jz eigenbasis."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    return AngularMomentumOperator(axis=axis, matrix=_component_matrix(space.n_atoms, axis))


@lru_cache(maxsize=None)
def _axis_eigensystem(n_atoms: int, axis: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenvalues, eigenvectors and their adjoint for one J component (cached)."""
    w, v = np.linalg.eigh(_component_matrix(n_atoms, axis))
    vh = np.ascontiguousarray(v.conj().T)
    w.flags.writeable = False
    v.flags.writeable = False
    vh.flags.writeable = False
    return w, v, vh


class RotationCache:
    """Bounded store of axis-rotation unitaries keyed by quantized angle.

    Safe for concurrent read/insert; a lost duplicate insert only costs a
    recompute of an identical matrix.
    """

    def __init__(self, maxsize: int = 128, max_dim: int = 512):
        self._data: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()
        self.maxsize = maxsize
        self.max_dim = max_dim  # very large unitaries are cheaper to rebuild than to hold

    def get(self, key: tuple) -> np.ndarray | None:
        with self._lock:
            matrix = self._data.get(key)
            if matrix is not None:
                self._data.move_to_end(key)
            return matrix

    def put(self, key: tuple, matrix: np.ndarray) -> None:
        if matrix.shape[0] > self.max_dim:
            return
        with self._lock:
            self._data[key] = matrix
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


rotation_cache = RotationCache()


def _coordinate_axis(axis_vector: np.ndarray) -> tuple[str, float] | None:
    """Identify +-x/y/z axes (within the unit-axis tolerance), else None."""
    for i, name in enumerate(_AXES):
        rest = np.delete(axis_vector, i)
        if abs(abs(axis_vector[i]) - 1.0) <= UNIT_AXIS_TOL and np.max(np.abs(rest)) <= UNIT_AXIS_TOL:
            return name, float(np.sign(axis_vector[i]))
    return None


def _checked_axis(axis_vector) -> np.ndarray:
    axis = np.asarray(axis_vector, dtype=float)
    if axis.shape != (3,):
        raise ValueError(f"axis vector must have 3 components, got shape {axis.shape}")
    if abs(np.linalg.norm(axis) - 1.0) > UNIT_AXIS_TOL:
        raise ValueError(f"axis vector must be unit length, got |n| = {np.linalg.norm(axis)!r}")
    return axis


def axis_rotation_matrix(space: DickeSpace, axis: str, angle: float) -> np.ndarray:
    """Full unitary exp(-i angle J_axis), served from the rotation cache."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    key = (space.n_atoms, axis, round(angle / _ANGLE_QUANTUM))
    matrix = rotation_cache.get(key)
    if matrix is None:
        if axis == "z":
            matrix = np.diag(np.exp(-1j * angle * space.m_values))
        else:
            w, v, vh = _axis_eigensystem(space.n_atoms, axis)
            matrix = (v * np.exp(-1j * angle * w)) @ vh
        matrix.flags.writeable = False
        rotation_cache.put(key, matrix)
    return matrix


def rotation_matrix(space: DickeSpace, axis_vector, angle: float) -> np.ndarray:
    """Unitary exp(-i angle n.J) for a unit 3-vector n.

    Coordinate-axis rotations are cached; a general axis is diagonalized on
    the fly (stable for every supported N, unlike closed-form Wigner-d
    factorials which overflow near N ~ 150).
    """
    axis = _checked_axis(axis_vector)
    coord = _coordinate_axis(axis)
    if coord is not None:
        name, sign = coord
        return axis_rotation_matrix(space, name, sign * angle)
    generator = (
        axis[0] * _component_matrix(space.n_atoms, "x")
        + axis[1] * _component_matrix(space.n_atoms, "y")
        + axis[2] * _component_matrix(space.n_atoms, "z")
    )
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def _as_state(space: DickeSpace, amplitudes: np.ndarray) -> PixelState:
    norm = np.linalg.norm(amplitudes)
    if abs(norm - 1.0) > _NORM_DRIFT_TOL:
        amplitudes = amplitudes / norm
    amplitudes.flags.writeable = False
    return PixelState(space=space, amplitudes=amplitudes)


def ground_state(space: DickeSpace) -> PixelState:
    """All spins down: amplitude 1 on M = -J."""
    amplitudes = np.zeros(space.dim, dtype=complex)
    amplitudes[0] = 1.0
    amplitudes.flags.writeable = False
    return PixelState(space=space, amplitudes=amplitudes)


def rotate(state: PixelState, axis_vector, angle: float) -> PixelState:
    """Apply exp(-i angle n.J) to the state.

    Coordinate-axis rotations go through the cached eigendecomposition of
    the generator, so repeated rotations about the same axis cost two
    matrix-vector products each.
    """
    axis = _checked_axis(axis_vector)
    space = state.space
    coord = _coordinate_axis(axis)
    if coord is not None:
        name, sign = coord
        theta = sign * angle
        if name == "z":
            amplitudes = state.amplitudes * np.exp(-1j * theta * space.m_values)
        else:
            w, v, vh = _axis_eigensystem(space.n_atoms, name)
            amplitudes = v @ (np.exp(-1j * theta * w) * (vh @ state.amplitudes))
        return _as_state(space, amplitudes)
    matrix = rotation_matrix(space, axis, angle)
    return _as_state(space, matrix @ state.amplitudes)


def z_phase(state: PixelState, chi: float) -> PixelState:
    """Diagonal phase exp(-i chi Jz); norm preserved exactly."""
    amplitudes = state.amplitudes * np.exp(-1j * chi * state.space.m_values)
    amplitudes.flags.writeable = False
    return PixelState(space=state.space, amplitudes=amplitudes)


def oat_evolve(state: PixelState, alpha: float) -> PixelState:
    """One-axis twisting exp(-i alpha Jz^2); diagonal, norm preserved exactly."""
    m = state.space.m_values
    amplitudes = state.amplitudes * np.exp(-1j * alpha * m * m)
    amplitudes.flags.writeable = False
    return PixelState(space=state.space, amplitudes=amplitudes)


def css(space: DickeSpace, theta: float, axis_vector=X_AXIS) -> PixelState:
    """Coherent spin state: the ground state rotated by theta about n."""
    return rotate(ground_state(space), axis_vector, theta)


def _operator_matrix_of(op, dim: int) -> np.ndarray:
    matrix = op.matrix if isinstance(op, AngularMomentumOperator) else np.asarray(op, dtype=complex)
    if matrix.shape != (dim, dim):
        raise ValueError(f"operator shape {matrix.shape} does not match space dim {dim}")
    if np.max(np.abs(matrix - matrix.conj().T)) > HERMITICITY_TOL:
        raise ValueError("operator must be Hermitian")
    return matrix


def observable_stats(state: PixelState, op) -> tuple[float, float]:
    """Mean and standard deviation of a Hermitian observable.

    ``op`` may be an AngularMomentumOperator or any Hermitian matrix
    (e.g. a polynomial in the J components).
    """
    matrix = _operator_matrix_of(op, state.space.dim)
    applied = matrix @ state.amplitudes
    mean = float(np.real(np.vdot(state.amplitudes, applied)))
    # two-pass form |(Q - <Q>) psi|^2 avoids cancellation near eigenstates
    centered = applied - mean * state.amplitudes
    variance = float(np.real(np.vdot(centered, centered)))
    return mean, float(np.sqrt(max(variance, 0.0)))


def population_distribution(state: PixelState) -> np.ndarray:
    """p(M) = |<J, M|psi>|^2, ordered as ``space.m_values``."""
    p = np.abs(state.amplitudes) ** 2
    p.flags.writeable = False
    return p
