"""Concentration bands and summary statistics for the Monte Carlo checks.

Empirical CDFs are compared inside a Dvoretzky-Kiefer-Wolfowitz band and
event frequencies inside exact (Clopper-Pearson) binomial intervals, both
at a configurable significance level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

__all__ = [
    "StatSummary",
    "dkw_epsilon",
    "clopper_pearson",
    "frequency_summary",
    "chi_square_uniformity",
    "independence_pvalue",
    "loglog_slope",
]


@dataclass(frozen=True)
class StatSummary:
    """One empirical frequency with its exact binomial interval."""

    count: int
    n: int
    alpha: float
    ci_low: float
    ci_high: float
    ci_method: str = "clopper-pearson"

    @property
    def mean(self) -> float:
        return self.count / self.n

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0

    def covers(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


def dkw_epsilon(n: int, alpha: float) -> float:
    """Uniform CDF band half-width sqrt(ln(2/alpha) / (2n))."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def clopper_pearson(count: int, n: int, alpha: float) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval for count/n."""
    if not 0 <= count <= n:
        raise ValueError("count must lie in 0..n")
    lo = 0.0 if count == 0 else float(sps.beta.ppf(alpha / 2.0, count, n - count + 1))
    hi = 1.0 if count == n else float(sps.beta.ppf(1.0 - alpha / 2.0, count + 1, n - count))
    return lo, hi


def frequency_summary(count: int, n: int, alpha: float) -> StatSummary:
    lo, hi = clopper_pearson(count, n, alpha)
    return StatSummary(count=count, n=n, alpha=alpha, ci_low=lo, ci_high=hi)


def chi_square_uniformity(counts: np.ndarray) -> tuple[float, float]:
    """Chi-square statistic and p-value against the uniform pmf."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    expected = total / counts.size
    statistic = float(((counts - expected) ** 2 / expected).sum())
    pvalue = float(sps.chi2.sf(statistic, counts.size - 1))
    return statistic, pvalue


def independence_pvalue(x: np.ndarray, y: np.ndarray) -> float:
    """Chi-square test of independence for two binary indicator arrays."""
    x = np.asarray(x, dtype=bool)
    y = np.asarray(y, dtype=bool)
    table = np.array(
        [
            [np.sum(x & y), np.sum(x & ~y)],
            [np.sum(~x & y), np.sum(~x & ~y)],
        ],
        dtype=np.float64,
    )
    if (table.sum(axis=0) == 0).any() or (table.sum(axis=1) == 0).any():
        return 1.0  # a constant margin carries no evidence of dependence
    _, pvalue, _, _ = sps.chi2_contingency(table, correction=False)
    return float(pvalue)


def loglog_slope(ts: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of log(values) against log(ts)."""
    ts = np.asarray(ts, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0) or np.any(ts <= 0):
        raise ValueError("log-log fit needs positive times and values")
    slope, _ = np.polyfit(np.log(ts), np.log(values), 1)
    return float(slope)
