"""Joint |M1, M2> states of two equal-N pixels and their projection statistics.

The joint amplitude matrix A has entry (i, j) for |M1 = m[i], M2 = m[j]>.
Product states keep their single-pixel factors and materialize A lazily;
entangling operations (the global one-axis twist) force the dense matrix,
which is why whole-cloud squeezed preparations are capped at N <= 300 while
per-pixel squeezed preparations scale to N = 10^3 and beyond.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dicke import (
    DickeSpace,
    PixelState,
    X_AXIS,
    Y_AXIS,
    build_space,
    css,
    ground_state,
    oat_evolve,
    rotate,
    rotation_matrix,
    z_phase,
)
from .errors import ResourceLimitError

PREPARATION_KINDS = ("css", "sss1", "sss2")

# Dense joint matrices are needed only for whole-cloud squeezing; beyond this
# size the (N+1)^2 pipeline stops being interactive.
SSS1_MAX_ATOMS = 300

_NORM_DRIFT_TOL = 1e-10
_ORACLE_MAX_ATOMS = 3


class TwoPixelState:
    """Joint state of two pixels sharing one DickeSpace (equal N enforced).

    Instances are immutable values; the lazily cached dense amplitude
    matrix is idempotent to materialize and safe under concurrent access.
    """

    __slots__ = ("space", "_amplitudes", "_factors")

    def __init__(self, space: DickeSpace, amplitudes: np.ndarray | None = None,
                 factors: tuple[PixelState, PixelState] | None = None):
        if (amplitudes is None) == (factors is None):
            raise ValueError("provide exactly one of amplitudes or factors")
        self.space = space
        self._amplitudes = amplitudes
        self._factors = factors

    @property
    def is_product(self) -> bool:
        return self._factors is not None

    @property
    def factors(self) -> tuple[PixelState, PixelState] | None:
        return self._factors

    @property
    def amplitudes(self) -> np.ndarray:
        joint = self._amplitudes
        if joint is None:
            psi1, psi2 = self._factors
            joint = np.outer(psi1.amplitudes, psi2.amplitudes)
            joint.flags.writeable = False
            self._amplitudes = joint
        return joint

    def norm(self) -> float:
        if self._factors is not None and self._amplitudes is None:
            return float(np.linalg.norm(self._factors[0].amplitudes)
                         * np.linalg.norm(self._factors[1].amplitudes))
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class ProjectionStats:
    """Exact moments of the excitation-count observables of a joint state."""

    p_total: float
    p1: float
    p2: float
    p_d: float
    dp_total: float
    dp1: float
    dp2: float
    dp_d: float
    g: float


@dataclass(frozen=True)
class PreparationSpec:
    """State preparation: uncorrelated, whole-cloud squeezed, or per-pixel squeezed."""

    kind: str
    theta: float = math.pi / 2  # css only
    axis: tuple[float, float, float] = X_AXIS  # css only
    alpha: float = 0.0  # twisting angle, sss kinds
    beta: float = 0.0  # post-twist rotation angle, sss kinds

    def __post_init__(self):
        if self.kind not in PREPARATION_KINDS:
            raise ValueError(f"kind must be one of {PREPARATION_KINDS}, got {self.kind!r}")
        for name in ("theta", "alpha", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def css_spec(cls, theta: float = math.pi / 2, axis=X_AXIS) -> "PreparationSpec":
        return cls(kind="css", theta=theta, axis=tuple(axis))

    @classmethod
    def sss1_spec(cls, alpha: float, beta: float) -> "PreparationSpec":
        return cls(kind="sss1", alpha=alpha, beta=beta)

    @classmethod
    def sss2_spec(cls, alpha: float, beta: float) -> "PreparationSpec":
        return cls(kind="sss2", alpha=alpha, beta=beta)


def _dense(space: DickeSpace, amplitudes: np.ndarray) -> TwoPixelState:
    norm = np.linalg.norm(amplitudes)
    if abs(norm - 1.0) > _NORM_DRIFT_TOL:
        amplitudes = amplitudes / norm
    amplitudes.flags.writeable = False
    return TwoPixelState(space, amplitudes=amplitudes)


def tensor(psi1: PixelState, psi2: PixelState) -> TwoPixelState:
    """Product state |psi1> (x) |psi2>; both pixels must have the same N."""
    if psi1.space != psi2.space:
        raise ValueError(
            f"pixel atom numbers differ: {psi1.space.n_atoms} vs {psi2.space.n_atoms}")
    return TwoPixelState(psi1.space, factors=(psi1, psi2))


def collective_rotate(state: TwoPixelState, axis_vector, angle: float) -> TwoPixelState:
    """exp(-i angle n.(J1 + J2)) = U (x) U, applied as U A U^T on the matrix."""
    if state.is_product:
        psi1, psi2 = state.factors
        return tensor(rotate(psi1, axis_vector, angle), rotate(psi2, axis_vector, angle))
    matrix = rotation_matrix(state.space, axis_vector, angle)
    return _dense(state.space, matrix @ state.amplitudes @ matrix.T)


def global_oat(state: TwoPixelState, alpha: float) -> TwoPixelState:
    """Whole-cloud twist exp(-i alpha (Jz1 + Jz2)^2); entangles the pixels."""
    m = state.space.m_values
    msum = m[:, None] + m[None, :]
    amplitudes = state.amplitudes * np.exp(-1j * alpha * msum * msum)
    amplitudes.flags.writeable = False
    return TwoPixelState(state.space, amplitudes=amplitudes)


def local_oat(state: TwoPixelState, alpha: float) -> TwoPixelState:
    """Per-pixel twist exp(-i alpha (Jz1^2 + Jz2^2)); keeps product structure."""
    if state.is_product:
        psi1, psi2 = state.factors
        return tensor(oat_evolve(psi1, alpha), oat_evolve(psi2, alpha))
    m = state.space.m_values
    msq = m * m
    amplitudes = state.amplitudes * np.exp(-1j * alpha * (msq[:, None] + msq[None, :]))
    amplitudes.flags.writeable = False
    return TwoPixelState(state.space, amplitudes=amplitudes)


def apply_z_phases(state: TwoPixelState, chi1: float, chi2: float) -> TwoPixelState:
    """Diagonal phases exp(-i chi1 Jz1) exp(-i chi2 Jz2) (free evolution)."""
    if state.is_product:
        psi1, psi2 = state.factors
        return tensor(z_phase(psi1, chi1), z_phase(psi2, chi2))
    m = state.space.m_values
    amplitudes = (state.amplitudes
                  * np.exp(-1j * chi1 * m)[:, None]
                  * np.exp(-1j * chi2 * m)[None, :])
    amplitudes.flags.writeable = False
    return TwoPixelState(state.space, amplitudes=amplitudes)


def prepare(spec: PreparationSpec, n_atoms: int) -> TwoPixelState:
    """Build the pre-second-pulse state for the requested preparation.

    css:  both pixels rotated from the ground state by (theta, n).
    sss1: whole-cloud twist by alpha, then a collective y rotation by
          (beta - pi/2), on top of the half-excitation coherent state.
    sss2: the same sequence with per-pixel twists and rotations (equal
          angles for both pixels), which never couples the pixels.
    """
    space = build_space(n_atoms)
    if spec.kind == "css":
        base = tensor(ground_state(space), ground_state(space))
        return collective_rotate(base, spec.axis, spec.theta)
    if spec.kind == "sss1" and n_atoms > SSS1_MAX_ATOMS:
        raise ResourceLimitError(
            f"sss1 needs the dense joint matrix; N = {n_atoms} exceeds the cap {SSS1_MAX_ATOMS}")
    pixel = css(space, math.pi / 2, X_AXIS)
    state = tensor(pixel, pixel)
    if spec.kind == "sss1":
        state = global_oat(state, spec.alpha)
    else:
        state = local_oat(state, spec.alpha)
    return collective_rotate(state, Y_AXIS, spec.beta - math.pi / 2)


def joint_distribution(state: TwoPixelState) -> np.ndarray:
    """p(M1, M2) = |A|^2 entrywise; sums to 1."""
    p = np.abs(state.amplitudes) ** 2
    p.flags.writeable = False
    return p


def _stats_from_counts(prob: np.ndarray, w1: np.ndarray, w2: np.ndarray) -> ProjectionStats:
    """Moments of the diagonal observables w1, w2 under flat probabilities."""
    mean1 = float(prob @ w1)
    mean2 = float(prob @ w2)
    var1 = float(prob @ (w1 - mean1) ** 2)
    var2 = float(prob @ (w2 - mean2) ** 2)
    g = float(prob @ ((w1 - mean1) * (w2 - mean2)))
    return _assemble_stats(mean1, mean2, var1, var2, g)


def _assemble_stats(mean1: float, mean2: float, var1: float, var2: float, g: float) -> ProjectionStats:
    return ProjectionStats(
        p_total=mean1 + mean2,
        p1=mean1,
        p2=mean2,
        p_d=mean2 - mean1,
        dp_total=math.sqrt(max(var1 + var2 + 2.0 * g, 0.0)),
        dp1=math.sqrt(max(var1, 0.0)),
        dp2=math.sqrt(max(var2, 0.0)),
        dp_d=math.sqrt(max(var1 + var2 - 2.0 * g, 0.0)),
        g=g,
    )


def _marginal_moments(p: np.ndarray, counts: np.ndarray) -> tuple[float, float]:
    mean = float(p @ counts)
    var = float(p @ (counts - mean) ** 2)
    return mean, var


def projection_stats(state: TwoPixelState) -> ProjectionStats:
    """Exact statistics of P1, P2, P = P1 + P2 and Pd = P2 - P1.

    Pk = Jz_k + N/2 counts the excited atoms of pixel k, so every moment
    follows from the joint population distribution.  Product states skip
    the joint matrix: the pixels are uncorrelated (g = 0) and the per-pixel
    marginals carry all the information.
    """
    counts = state.space.m_values + state.space.n_atoms / 2.0
    if state.is_product:
        psi1, psi2 = state.factors
        mean1, var1 = _marginal_moments(np.abs(psi1.amplitudes) ** 2, counts)
        mean2, var2 = _marginal_moments(np.abs(psi2.amplitudes) ** 2, counts)
        return _assemble_stats(mean1, mean2, var1, var2, 0.0)
    prob = np.abs(state.amplitudes) ** 2
    w1 = np.repeat(counts, state.space.dim)
    w2 = np.tile(counts, state.space.dim)
    return _stats_from_counts(prob.ravel(), w1, w2)


# ---------------------------------------------------------------------------
# Pipeline descriptions and the full product-space oracle
# ---------------------------------------------------------------------------
#
# A pipeline is an ordered list of collective operations acting on the
# ground (all-spins-down) two-pixel state:
#
#   ("rotate", n, angle)        collective rotation about the unit vector n
#   ("global_oat", alpha)       exp(-i alpha (Jz1 + Jz2)^2)
#   ("local_oat", alpha)        exp(-i alpha (Jz1^2 + Jz2^2))
#   ("zphase", chi1, chi2)      exp(-i chi1 Jz1) exp(-i chi2 Jz2)
#
# The same list can be run on the Dicke manifold (run_pipeline) or on all
# 2N individual spins (brute_force_oracle), which is what the tests compare.


def preparation_pipeline(spec: PreparationSpec) -> list[tuple]:
    """The pipeline realizing ``prepare(spec, .)`` from the ground state."""
    if spec.kind == "css":
        return [("rotate", spec.axis, spec.theta)]
    twist = "global_oat" if spec.kind == "sss1" else "local_oat"
    return [
        ("rotate", X_AXIS, math.pi / 2),
        (twist, spec.alpha),
        ("rotate", Y_AXIS, spec.beta - math.pi / 2),
    ]


def run_pipeline(n_atoms: int, pipeline: list[tuple]) -> TwoPixelState:
    """Run a pipeline on the Dicke manifold, starting from ground (x) ground."""
    space = build_space(n_atoms)
    state = tensor(ground_state(space), ground_state(space))
    for op in pipeline:
        name = op[0]
        if name == "rotate":
            state = collective_rotate(state, op[1], op[2])
        elif name == "global_oat":
            state = global_oat(state, op[1])
        elif name == "local_oat":
            state = local_oat(state, op[1])
        elif name == "zphase":
            state = apply_z_phases(state, op[1], op[2])
        else:
            raise ValueError(f"unknown pipeline operation {name!r}")
    return state


def _single_spin_components() -> dict[str, np.ndarray]:
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2.0
    sy = np.array([[0, 1j], [-1j, 0]], dtype=complex) / 2.0
    sz = np.array([[-1, 0], [0, 1]], dtype=complex) / 2.0  # basis order (down, up)
    return {"x": sx, "y": sy, "z": sz}


def _embedded(op: np.ndarray, position: int, total: int) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    out = np.array([[1.0 + 0.0j]])
    for n in range(total):
        out = np.kron(out, op if n == position else eye)
    return out


def _pixel_component(axis: str, pixel: int, n_atoms: int) -> np.ndarray:
    spins = _single_spin_components()
    total = 2 * n_atoms
    start = 0 if pixel == 1 else n_atoms
    acc = np.zeros((2 ** total, 2 ** total), dtype=complex)
    for n in range(start, start + n_atoms):
        acc += _embedded(spins[axis], n, total)
    return acc


def brute_force_oracle(n_atoms: int, pipeline: list[tuple]) -> ProjectionStats:
    """Projection statistics from simulating all 2N spins in the full product space.

    Test oracle only: the 2^(2N) state vector caps N at 3.  Unitaries come
    from scipy's expm rather than the eigendecomposition route used on the
    Dicke manifold, so the two engines share no linear-algebra path.
    """
    if isinstance(n_atoms, bool) or not isinstance(n_atoms, (int, np.integer)):
        raise ValueError(f"n_atoms must be a positive integer, got {n_atoms!r}")
    if not 1 <= n_atoms <= _ORACLE_MAX_ATOMS:
        raise ValueError(f"oracle supports 1 <= N <= {_ORACLE_MAX_ATOMS}, got {n_atoms}")
    total = 2 * n_atoms
    dim = 2 ** total
    j_ops = {(axis, pixel): _pixel_component(axis, pixel, n_atoms)
             for axis in ("x", "y", "z") for pixel in (1, 2)}
    z1 = np.real(np.diag(j_ops[("z", 1)]))
    z2 = np.real(np.diag(j_ops[("z", 2)]))

    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0  # all spins down in the (down, up) single-spin ordering
    for op in pipeline:
        name = op[0]
        if name == "rotate":
            axis = np.asarray(op[1], dtype=float)
            generator = sum(axis[i] * (j_ops[(a, 1)] + j_ops[(a, 2)])
                            for i, a in enumerate(("x", "y", "z")))
            psi = scipy.linalg.expm(-1j * op[2] * generator) @ psi
        elif name == "global_oat":
            zsum = z1 + z2
            psi = np.exp(-1j * op[1] * zsum * zsum) * psi
        elif name == "local_oat":
            psi = np.exp(-1j * op[1] * (z1 * z1 + z2 * z2)) * psi
        elif name == "zphase":
            psi = np.exp(-1j * (op[1] * z1 + op[2] * z2)) * psi
        else:
            raise ValueError(f"unknown pipeline operation {name!r}")

    prob = np.abs(psi) ** 2
    half = n_atoms / 2.0
    return _stats_from_counts(prob, z1 + half, z2 + half)
