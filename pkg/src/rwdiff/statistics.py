"""Estimators and tests that turn simulated paths into verdicts."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import stats

from .errors import ParameterError, PathTooShortError

MIN_BATCHES = 20
MIN_BATCH_LENGTH = 100
# 99% quantile of chi-square with 3 degrees of freedom
CHI2_3_99 = float(stats.chi2.ppf(0.99, 3))


@dataclass(frozen=True)
class ErgodicEstimate:
    value: float
    stderr: float
    batches: int
    batch_length: int

    def within(self, target, k=3.0):
        return abs(self.value - target) <= k * self.stderr


def _apply(f, x):
    try:
        out = np.asarray(f(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([f(v) for v in x], dtype=float)


def ergodic_average(path, f, batches=MIN_BATCHES) -> ErgodicEstimate:
    """Time average of f(tdot) by the trapezoid rule, with a batch-means error bar.

    The recorded cells are cut into ``batches`` equal batches; leading cells
    that do not fill a batch are dropped.
    """
    if batches < MIN_BATCHES:
        raise ParameterError(f"need at least {MIN_BATCHES} batches")
    tdot = np.asarray(path.tdot, dtype=float)
    cells = len(tdot) - 1
    length = cells // batches
    if length < MIN_BATCH_LENGTH:
        raise PathTooShortError(
            f"{cells} recorded steps cannot form {batches} batches of {MIN_BATCH_LENGTH}"
        )
    fx = _apply(f, tdot)
    ds = np.diff(np.asarray(path.s, dtype=float))
    area = 0.5 * (fx[:-1] + fx[1:]) * ds
    start = cells - batches * length
    area = area[start:].reshape(batches, length)
    dur = ds[start:].reshape(batches, length).sum(axis=1)
    means = area.sum(axis=1) / dur
    value = float(area.sum() / dur.sum())
    spread = float(np.std(means, ddof=1)) if np.ptp(means) > 0 else 0.0
    return ErgodicEstimate(value, spread / math.sqrt(batches), batches, length)


def time_ratio(path):
    """(t_S - t_0) / S, the proper-time average of tdot accumulated by the integrator."""
    return float((path.t[-1] - path.t[0]) / (path.s[-1] - path.s[0]))


def clock_slope_estimate(path, from_half=False):
    """C_S / S, or (C_S - C_{S/2}) / (S/2) with ``from_half``."""
    if path.clock is None:
        raise ParameterError("path carries no clock")
    s, c = np.asarray(path.s), np.asarray(path.clock)
    if not from_half:
        return float((c[-1] - c[0]) / (s[-1] - s[0]))
    mid = np.searchsorted(s, 0.5 * (s[0] + s[-1]))
    return float((c[-1] - c[mid]) / (s[-1] - s[mid]))


def _ks_against(sample, cdf):
    x = np.sort(np.asarray(sample, dtype=float))
    n = len(x)
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def occupation_ks(path, measure, burn_in) -> float:
    """Sup distance between the occupation CDF of tdot after ``burn_in`` and ``measure.cdf``."""
    s = np.asarray(path.s)
    if not burn_in < s[-1]:
        raise ParameterError("burn_in must be shorter than the path")
    keep = s >= s[0] + burn_in
    return _ks_against(np.asarray(path.tdot)[keep], measure.cdf)


def ks_statistic(sample, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance to a continuous CDF."""
    return _ks_against(sample, cdf)


def sphere_uniformity(samples):
    """Rayleigh test of uniformity on the 2-sphere.

    Returns ``(resultant_length, passed)`` where the resultant length is
    |mean vector| and the test passes when 3 n |mean|^2 is below the 99%
    quantile of chi-square(3).
    """
    v = np.asarray(samples, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3:
        raise ParameterError("samples must be an (n, 3) array of unit vectors")
    n = len(v)
    if n < 100:
        raise ParameterError("the uniformity test needs at least 100 samples")
    length = float(np.linalg.norm(v.mean(axis=0)))
    return length, bool(3.0 * n * length * length <= CHI2_3_99)


@dataclass(frozen=True)
class LimitPointEstimate:
    x_inf: np.ndarray
    certificate: float
    log_certificate: float


def estimate_x_infinity(path, model) -> LimitPointEstimate:
    """Final position with the bound |x_inf - x_S| <= int_{t_S}^inf du / alpha(u)."""
    if path.x is None:
        raise ParameterError("path carries no spatial component")
    t_end = float(path.t[-1])
    log_cert = model.log_inv_alpha_tail(t_end)
    return LimitPointEstimate(np.array(path.x[-1]), math.exp(log_cert), log_cert)


def two_sample_ks(a, b, level=0.01):
    """Two-sample KS statistic and whether equality in law survives at ``level``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 50 or len(b) < 50:
        raise ParameterError("two_sample_ks needs at least 50 values per sample")
    res = stats.ks_2samp(a, b)
    return float(res.statistic), bool(res.pvalue >= level)


def level_crossings(values, level) -> int:
    """Number of times a recorded sequence crosses ``level``."""
    above = np.asarray(values) > level
    return int(np.count_nonzero(above[1:] != above[:-1]))
