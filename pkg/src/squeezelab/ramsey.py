"""Synchronous differential Ramsey sequence, ellipse geometry and sensitivity.

Conventions (fixed so the uncorrelated-pixel excitation fractions come out
as P1/N = 1/2 + (C/2) cos(phi + delta) and P2/N with (phi - delta)):

* both pulses rotate about +x by pi/2, i.e. exp(-i (pi/2) Jx_total);
* free evolution applies exp(-i (phi + delta) Jz1) exp(-i (phi - delta) Jz2)
  with delta = Delta_eff * T, so pixel 1 accumulates the +delta phase;
* squeezed preparations already contain the first pulse, so the sequence
  tail (free evolution + second pulse) is identical for every kind.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dicke import X_AXIS, build_space, css, ground_state, observable_stats, rotate, z_phase
from .dicke import angular_momentum_matrix
from .errors import EllipseFitError, SingularConfigurationError
from .twopixel import (
    PreparationSpec,
    ProjectionStats,
    TwoPixelState,
    apply_z_phases,
    collective_rotate,
    prepare,
    projection_stats,
)

OMEGA0_DEFAULT = 2.0 * math.pi * 519e12  # rad/s, clock transition

_SIN_PHI_FLOOR = 1e-6


@dataclass(frozen=True)
class RamseyConfig:
    """Full description of one synchronous differential Ramsey experiment."""

    n_atoms: int
    preparation: PreparationSpec = field(default_factory=lambda: PreparationSpec.css_spec())
    phi: float = math.pi / 2
    delta_eff: float = 0.0  # rad/s, +delta_eff on pixel 1, -delta_eff on pixel 2
    t_free: float = 1.0  # s
    t_cycle: float = 1.0  # s
    contrast: float = 1.0  # analytics only; the unitary dynamics is lossless
    omega0: float = OMEGA0_DEFAULT  # rad/s

    def __post_init__(self):
        if isinstance(self.n_atoms, bool) or not isinstance(self.n_atoms, (int, np.integer)):
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if not (math.isfinite(self.phi) and math.isfinite(self.delta_eff)):
            raise ValueError("phi and delta_eff must be finite")
        if not self.t_free > 0:
            raise ValueError(f"t_free must be > 0, got {self.t_free}")
        if self.t_cycle < self.t_free:
            raise ValueError(f"t_cycle must be >= t_free, got {self.t_cycle} < {self.t_free}")
        if not 0 < self.contrast <= 1:
            raise ValueError(f"contrast must be in (0, 1], got {self.contrast}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")

    @property
    def delta_phase(self) -> float:
        """The phase delta = Delta_eff * T accumulated between the pixels."""
        return self.delta_eff * self.t_free


@dataclass(frozen=True)
class EllipseGeometry:
    """Parametric-plot geometry of the two excitation fractions."""

    a: float  # semi-major, excitation-fraction units
    b: float  # semi-minor
    e: float  # ellipticity b/a
    orientation: float  # +-pi/4, measured counter-clockwise from +x


def free_evolution(state: TwoPixelState, phi: float, delta: float) -> TwoPixelState:
    """Accumulate the pulse phase phi and the differential phase +-delta."""
    return apply_z_phases(state, phi + delta, phi - delta)


def second_pulse(state: TwoPixelState) -> TwoPixelState:
    return collective_rotate(state, X_AXIS, math.pi / 2)


def run_ramsey(config: RamseyConfig) -> tuple[TwoPixelState, ProjectionStats]:
    """Preparation, free evolution and second pulse; returns the final state and stats."""
    state = prepare(config.preparation, config.n_atoms)
    state = free_evolution(state, config.phi, config.delta_phase)
    state = second_pulse(state)
    return state, projection_stats(state)


def excitation_curve(config: RamseyConfig, phi_grid) -> list[tuple[float, float, float, float, float]]:
    """Rows (phi, P1/N, P2/N, dP1/N, dP2/N), one Ramsey run per phase."""
    phis = [float(p) for p in phi_grid]
    if not phis:
        raise ValueError("phi grid must be non-empty")
    n = config.n_atoms
    rows = []
    for phi in phis:
        cfg = RamseyConfig(
            n_atoms=n, preparation=config.preparation, phi=phi,
            delta_eff=config.delta_eff, t_free=config.t_free, t_cycle=config.t_cycle,
            contrast=config.contrast, omega0=config.omega0)
        _, stats = run_ramsey(cfg)
        rows.append((phi, stats.p1 / n, stats.p2 / n, stats.dp1 / n, stats.dp2 / n))
    return rows


def single_ensemble_curve(n_atoms: int, phi_grid) -> list[tuple[float, float, float]]:
    """Rows (phi, P/N, dP/sqrt(N)) for one pixel run through the same sequence."""
    phis = [float(p) for p in phi_grid]
    if not phis:
        raise ValueError("phi grid must be non-empty")
    space = build_space(n_atoms)
    jz = angular_momentum_matrix(space, "z")
    prepared = css(space, math.pi / 2, X_AXIS)
    rows = []
    for phi in phis:
        state = rotate(z_phase(prepared, phi), X_AXIS, math.pi / 2)
        mean_jz, std_jz = observable_stats(state, jz)
        rows.append((phi, (mean_jz + n_atoms / 2.0) / n_atoms, std_jz / math.sqrt(n_atoms)))
    return rows


def ellipse_geometry(delta: float, contrast: float = 1.0) -> EllipseGeometry:
    """Closed-form geometry of the parametric plot at differential phase delta.

    The centered curve has amplitude (C/sqrt(2)) cos(delta) along the +45
    degree direction and (C/sqrt(2)) sin(delta) along -45 degrees, so the
    ellipticity is tan(delta) below the circular point delta = pi/4 and
    cot(delta) above it.
    """
    if not 0.0 <= delta <= math.pi / 2:
        raise ValueError(f"delta must lie in [0, pi/2], got {delta}")
    if not 0 < contrast <= 1:
        raise ValueError(f"contrast must be in (0, 1], got {contrast}")
    along_plus = contrast / math.sqrt(2.0) * math.cos(delta)
    along_minus = contrast / math.sqrt(2.0) * math.sin(delta)
    if along_minus > along_plus:
        a, b, orientation = along_minus, along_plus, -math.pi / 4
    else:
        a, b, orientation = along_plus, along_minus, math.pi / 4
    return EllipseGeometry(a=a, b=b, e=b / a, orientation=orientation)


def analytic_ellipse_point(phi: float, delta: float, contrast: float = 1.0) -> tuple[float, float]:
    """The exact excitation-fraction pair at pulse phase phi."""
    return (0.5 + contrast / 2.0 * math.cos(phi + delta),
            0.5 + contrast / 2.0 * math.cos(phi - delta))


def fit_ellipse(samples) -> EllipseGeometry:
    """Estimate the ellipse geometry from sampled (P1/N, P2/N) points.

    Projects the centered samples onto the +-45 degree axes and converts
    the RMS of each projection into an amplitude (exact for uniform phase
    grids of three or more points).
    """
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"samples must be an (n, 2) array, got shape {pts.shape}")
    if pts.shape[0] < 8:
        raise ValueError(f"need at least 8 samples spanning the curve, got {pts.shape[0]}")
    centered = pts - pts.mean(axis=0)
    u = (centered[:, 0] + centered[:, 1]) / math.sqrt(2.0)
    v = (centered[:, 1] - centered[:, 0]) / math.sqrt(2.0)
    amp_plus = math.sqrt(2.0 * float(np.mean(u * u)))
    amp_minus = math.sqrt(2.0 * float(np.mean(v * v)))
    if max(amp_plus, amp_minus) < 1e-12:
        raise EllipseFitError("degenerate sample set: no spread along either axis")
    if amp_minus > amp_plus:
        a, b, orientation = amp_minus, amp_plus, -math.pi / 4
    else:
        a, b, orientation = amp_plus, amp_minus, math.pi / 4
    return EllipseGeometry(a=a, b=b, e=b / a, orientation=orientation)


def estimate_delta_eff(p_d: float, n_atoms: int, t_free: float, phi: float) -> float:
    """Small-shift estimator Delta_eff = Pd / (N T sin(phi))."""
    sin_phi = math.sin(phi)
    if abs(sin_phi) < _SIN_PHI_FLOOR:
        raise SingularConfigurationError(
            f"estimator undefined near a fringe extremum: |sin(phi)| = {abs(sin_phi):.2e}")
    return p_d / (n_atoms * t_free * sin_phi)


def sensitivity(stats: ProjectionStats, n_atoms: int, t_free: float) -> float:
    """Shot-to-shot uncertainty of the shift estimate: dPd / (N T)."""
    return stats.dp_d / (n_atoms * t_free)
