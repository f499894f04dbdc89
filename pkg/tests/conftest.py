"""Shared test helpers: goodness-of-fit machinery and pipeline builders."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats as scipy_stats

from squeezelab.dicke import X_AXIS, Y_AXIS
from squeezelab.twopixel import PreparationSpec, preparation_pipeline


def chi2_homogeneity_pvalue(counts_a: np.ndarray, counts_b: np.ndarray,
                            min_pooled: int = 10) -> float:
    """Two-sample chi-square p-value with sparse bins pooled for validity."""
    counts_a = np.asarray(counts_a, dtype=float)
    counts_b = np.asarray(counts_b, dtype=float)
    pooled = counts_a + counts_b
    keep = pooled >= min_pooled
    row_a = np.append(counts_a[keep], counts_a[~keep].sum())
    row_b = np.append(counts_b[keep], counts_b[~keep].sum())
    table = np.array([row_a, row_b])
    table = table[:, table.sum(axis=0) > 0]
    _, pvalue, _, _ = scipy_stats.chi2_contingency(table)
    return float(pvalue)


def ramsey_pipeline(spec: PreparationSpec, phi: float, delta: float) -> list[tuple]:
    """Preparation plus the measurement tail, as an oracle-runnable pipeline."""
    return preparation_pipeline(spec) + [
        ("zphase", phi + delta, phi - delta),
        ("rotate", X_AXIS, math.pi / 2),
    ]


def random_spec(kind: str, rng: np.random.Generator) -> PreparationSpec:
    if kind == "css":
        return PreparationSpec.css_spec(theta=float(rng.uniform(0, math.pi)))
    alpha = float(rng.uniform(0, 2 * math.pi))
    beta = float(rng.uniform(0, 2 * math.pi))
    if kind == "sss1":
        return PreparationSpec.sss1_spec(alpha, beta)
    return PreparationSpec.sss2_spec(alpha, beta)


STATS_FIELDS = ("p_total", "p1", "p2", "p_d", "dp_total", "dp1", "dp2", "dp_d", "g")


def max_stats_difference(stats_a, stats_b) -> float:
    return max(abs(getattr(stats_a, name) - getattr(stats_b, name)) for name in STATS_FIELDS)
