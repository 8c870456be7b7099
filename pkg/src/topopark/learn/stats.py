"""Correlation statistics and small significance helpers."""

from __future__ import annotations

import math

import numpy as np
from scipy import special, stats

from ..errors import DegenerateCorrelation, TooFewSamples


def pearson_r(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("pearson_r needs two vectors of equal length")
    if a.size < 3:
        raise TooFewSamples(f"need at least 3 samples, got {a.size}")
    da = a - a.mean()
    db = b - b.mean()
    sa = math.sqrt(float(da @ da))
    sb = math.sqrt(float(db @ db))
    if sa == 0 or sb == 0:
        raise DegenerateCorrelation("correlation undefined for a constant vector")
    return float(np.clip((da @ db) / (sa * sb), -1.0, 1.0))


def log_pearson_p_value(r: float, n: int) -> float:
    """Natural log of the two-sided p-value for correlation ``r`` over ``n`` pairs.

    With ``df = n - 2`` and ``t = r sqrt(df / (1 - r^2))`` the two-sided
    p-value is ``I_x(df/2, 1/2)`` where ``x = df / (df + t^2) = 1 - r^2``.
    """
    if n < 3:
        raise TooFewSamples(f"need at least 3 samples, got {n}")
    r = float(r)
    if abs(r) >= 1.0:
        return -math.inf
    df = n - 2
    x = 1.0 - r * r
    p = special.betainc(df / 2.0, 0.5, x)
    if p > 0:
        return math.log(min(p, 1.0))
    # below the double range: leading term of the series for I_x(a, b)
    a = df / 2.0
    return (a * math.log(x) + 0.5 * math.log1p(-x) - math.log(a)
            - special.betaln(a, 0.5))


def pearson_p_value(r: float, n: int) -> float:
    """Two-sided p-value of a sample Pearson correlation (t test, ``n - 2`` df)."""
    return math.exp(log_pearson_p_value(r, n))


def binomial_above_chance(successes: int, trials: int, chance: float) -> float:
    """One-sided p-value for ``successes / trials`` exceeding ``chance``."""
    return float(stats.binomtest(successes, trials, chance, alternative="greater").pvalue)
