"""Cycle-by-cycle shift estimates and Allan-deviation analysis.

The per-cycle estimates form a white frequency-noise series when the only
noise source is projection noise, so the fractional-frequency instability
falls as A / sqrt(tau) with A = sigma(Delta_eff) sqrt(T_c) / omega0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ramsey import RamseyConfig
from .sampler import SeededRng, _shot_counts

_G_STANDARD = 9.80665  # m/s^2
_C_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class FrequencySeries:
    """Per-cycle shift estimates (rad/s) spaced by the cycle time."""

    values: np.ndarray
    t_cycle: float
    omega0: float

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError(f"series needs at least 2 cycles, got {len(self.values)}")
        if not self.t_cycle > 0:
            raise ValueError(f"t_cycle must be > 0, got {self.t_cycle}")


@dataclass(frozen=True)
class AllanCurve:
    """sigma_y(tau) points, plus the white-noise coefficient once fitted."""

    taus: np.ndarray
    sigmas: np.ndarray
    fit_coefficient: float | None = None

    def points(self) -> list[tuple[float, float]]:
        return [(float(t), float(s)) for t, s in zip(self.taus, self.sigmas)]


def simulate_series(config: RamseyConfig, cycles: int, rng: SeededRng) -> FrequencySeries:
    """One Monte Carlo shot per cycle, converted to a shift estimate per cycle."""
    if cycles < 2:
        raise ValueError(f"cycles must be >= 2, got {cycles}")
    m1, m2 = _shot_counts(config, cycles, rng)
    sin_phi = math.sin(config.phi)
    if abs(sin_phi) < 1e-6:
        raise ValueError(f"phi = {config.phi} puts the shift estimator at a fringe extremum")
    values = (m2 - m1).astype(float) / (config.n_atoms * config.t_free * sin_phi)
    values.flags.writeable = False
    return FrequencySeries(values=values, t_cycle=config.t_cycle, omega0=config.omega0)


def allan_deviation(series: FrequencySeries, n_list, overlapping: bool = False) -> AllanCurve:
    """Two-sample deviation of block-averaged fractional frequencies.

    For each block length n the series is averaged over blocks of n cycles
    and sigma_y(n T_c) is the RMS of adjacent block-mean differences divided
    by sqrt(2), in fractional-frequency units.  The overlapping variant
    slides the block window one cycle at a time.
    """
    y = np.asarray(series.values, dtype=float) / series.omega0
    total = y.size
    taus, sigmas = [], []
    for n in n_list:
        n = int(n)
        if n < 1 or n > total // 2:
            raise ValueError(f"block length {n} needs at least 2 blocks in {total} cycles")
        if overlapping:
            block_means = np.convolve(y, np.ones(n) / n, mode="valid")
            diffs = block_means[n:] - block_means[:-n]
        else:
            blocks = total // n
            block_means = y[: blocks * n].reshape(blocks, n).mean(axis=1)
            diffs = np.diff(block_means)
        taus.append(n * series.t_cycle)
        sigmas.append(math.sqrt(0.5 * float(np.mean(diffs * diffs))))
    return AllanCurve(taus=np.asarray(taus), sigmas=np.asarray(sigmas))


def fit_white_noise(curve: AllanCurve) -> float:
    """Least-squares fit of log sigma_y vs log tau at fixed slope -1/2.

    Returns A with sigma_y = A / sqrt(tau).
    """
    taus = np.asarray(curve.taus, dtype=float)
    sigmas = np.asarray(curve.sigmas, dtype=float)
    keep = sigmas > 0
    if np.count_nonzero(keep) < 3:
        raise ValueError("white-noise fit needs at least 3 points with sigma_y > 0")
    log_a = np.mean(np.log(sigmas[keep]) + 0.5 * np.log(taus[keep]))
    return float(np.exp(log_a))


def analytic_allan(dp_d: float, n_atoms: int, t_free: float, t_cycle: float,
                   omega0: float) -> float:
    """White-noise coefficient from the exact shot noise: dPd sqrt(T_c) / (N T omega0)."""
    if min(dp_d, n_atoms, t_free, t_cycle, omega0) < 0 or not t_free > 0 or not omega0 > 0:
        raise ValueError("analytic_allan needs positive arguments")
    return dp_d / (n_atoms * t_free * omega0) * math.sqrt(t_cycle)


def redshift_fraction(height_difference: float, g: float = _G_STANDARD,
                      c: float = _C_LIGHT) -> float:
    """Gravitational fractional frequency shift g dh / c^2 between the pixels."""
    if not (math.isfinite(height_difference) and math.isfinite(g) and math.isfinite(c)):
        raise ValueError("redshift_fraction needs finite inputs")
    return g * height_difference / (c * c)


def resolution_time(coefficient: float, target_fraction: float) -> float:
    """Averaging time at which A / sqrt(tau) reaches the target fraction."""
    if not coefficient > 0 or not target_fraction > 0:
        raise ValueError("coefficient and target must be > 0")
    return (coefficient / target_fraction) ** 2
