"""Seeded Monte Carlo sampling of single-shot Ramsey outcomes.

Two samplers draw from the same exact outcome distribution: a rejection
scheme with a uniform proposal (accept outcome i with probability
p_i / p_max) and an inverse-CDF lookup, which is the default fast path.
Reproducibility contract: a given (seed, stream) pair yields byte-identical
sample sequences on every run; concurrent tasks must use distinct
sub-streams, never a shared generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ramsey import RamseyConfig, estimate_delta_eff, free_evolution, run_ramsey, second_pulse
from .twopixel import prepare

_DIST_SUM_TOL = 1e-9
_REJECTION_CHUNK = 8192


@dataclass(frozen=True)
class SeededRng:
    """Deterministic generator identity: algorithm, 64-bit seed, sub-stream index."""

    seed: int
    stream: int = 0
    algorithm: str = "pcg64"

    def __post_init__(self):
        if self.algorithm != "pcg64":
            raise ValueError(f"unsupported rng algorithm {self.algorithm!r}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(seq))

    def task_generator(self, task_index: int) -> np.random.Generator:
        """Independent generator for one parallel task, derived from (seed, task index)."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream, task_index))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, offset: int = 1) -> "SeededRng":
        return SeededRng(seed=self.seed, stream=self.stream + offset, algorithm=self.algorithm)


@dataclass(frozen=True)
class ShotSample:
    """One synchronous shot: excitation counts of both pixels and the shift estimate."""

    m1: int
    m2: int
    p_d: int
    delta_est: float


def _checked_distribution(dist) -> np.ndarray:
    p = np.asarray(dist, dtype=float).ravel()
    if p.size == 0 or np.all(p == 0.0):
        raise ValueError("distribution has no probability mass")
    if np.any(p < 0.0):
        raise ValueError("distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > _DIST_SUM_TOL:
        raise ValueError(f"distribution must sum to 1 within {_DIST_SUM_TOL}, got {total!r}")
    return p


def sample_rejection(dist, rng: SeededRng, count: int, literal_shuffle: bool = False) -> np.ndarray:
    """Rejection sampling with a uniform proposal over the flattened outcomes.

    Each attempt picks an outcome index uniformly at random and accepts it
    with probability p / p_max.  ``literal_shuffle=True`` realizes the
    uniform pick by shuffling the whole outcome array and taking its first
    element -- statistically identical, kept as a slow reference mode.
    """
    p = _checked_distribution(dist)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    p_max = float(p.max())
    gen = rng.generator()
    if literal_shuffle:
        outcomes = np.arange(p.size)
        picks = np.empty(count, dtype=np.int64)
        for k in range(count):
            while True:
                shuffled = gen.permutation(outcomes)
                candidate = int(shuffled[0])
                if gen.random() < p[candidate] / p_max:
                    picks[k] = candidate
                    break
        return picks
    accepted: list[np.ndarray] = []
    total = 0
    while total < count:
        idx = gen.integers(0, p.size, size=_REJECTION_CHUNK)
        keep = gen.random(_REJECTION_CHUNK) < p[idx] / p_max
        hits = idx[keep]
        accepted.append(hits)
        total += hits.size
    return np.concatenate(accepted)[:count]


def sample_inverse_cdf(dist, rng: SeededRng, count: int) -> np.ndarray:
    """Inverse-CDF sampling over the flattened distribution (default fast path)."""
    p = _checked_distribution(dist)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    u = rng.generator().random(count)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def _shot_counts(config: RamseyConfig, trials: int, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    """Excitation-count pairs (m1, m2) sampled from the exact post-sequence state.

    The excitation count of pixel k equals the basis index of its measured
    |M_k>, so sampled flat indices convert directly.  Product preparations
    sample the two marginals independently; entangled ones sample the joint.
    """
    state = prepare(config.preparation, config.n_atoms)
    state = second_pulse(free_evolution(state, config.phi, config.delta_phase))
    if state.is_product:
        psi1, psi2 = state.factors
        m1 = sample_inverse_cdf(np.abs(psi1.amplitudes) ** 2, rng, trials)
        m2 = sample_inverse_cdf(np.abs(psi2.amplitudes) ** 2, rng.substream(), trials)
        return m1, m2
    joint = np.abs(state.amplitudes) ** 2
    flat = sample_inverse_cdf(joint, rng, trials)
    m1, m2 = np.unravel_index(flat, joint.shape)
    return m1.astype(np.int64), m2.astype(np.int64)


def sample_counts(config: RamseyConfig, trials: int, rng: SeededRng) -> tuple[np.ndarray, np.ndarray]:
    """Raw excitation-count pairs, without the shift estimate (valid at any phi)."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return _shot_counts(config, trials, rng)


def monte_carlo_ramsey(config: RamseyConfig, trials: int, rng: SeededRng) -> list[ShotSample]:
    """Simulate single shots of the full sequence; moments converge to the exact stats."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    m1, m2 = _shot_counts(config, trials, rng)
    n, t = config.n_atoms, config.t_free
    return [
        ShotSample(m1=int(a), m2=int(b), p_d=int(b) - int(a),
                   delta_est=estimate_delta_eff(int(b) - int(a), n, t, config.phi))
        for a, b in zip(m1, m2)
    ]


def histogram(samples, bin_width: float) -> list[tuple[float, int]]:
    """Counts per bin of width ``bin_width`` centered on integer multiples of it."""
    if not bin_width > 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        return []
    bins = np.round(values / bin_width).astype(np.int64)
    lo = int(bins.min())
    counts = np.bincount(bins - lo)
    return [(float((lo + k) * bin_width), int(c)) for k, c in enumerate(counts) if c > 0]
