"""Finite-sample decisions for the different modes of convergence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import kernels

KS_MIN_SAMPLES = 8
DEFAULT_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    n: int
    m: int
    p_value: float

    def rejects(self, level: float) -> bool:
        return self.p_value < level


@dataclass(frozen=True)
class SampleSummary:
    """Mean with a normal-theory confidence interval.

    For complex samples ``mean`` is complex and ``std_error``, ``ci_lo`` and
    ``ci_hi`` are ``(real part, imaginary part)`` pairs.
    """

    n: int
    mean: complex | float
    std_error: float | tuple
    ci_lo: float | tuple
    ci_hi: float | tuple
    confidence: float
    quantiles: list = field(default_factory=list)

    def covers(self, target) -> bool:
        if isinstance(self.ci_lo, tuple):
            t = complex(target)
            return (self.ci_lo[0] <= t.real <= self.ci_hi[0]
                    and self.ci_lo[1] <= t.imag <= self.ci_hi[1])
        return self.ci_lo <= float(np.real(target)) <= self.ci_hi


def ks_two_sample(xs, ys) -> KSResult:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    xs = np.sort(np.asarray(xs, dtype=float).ravel())
    ys = np.sort(np.asarray(ys, dtype=float).ravel())
    n, m = xs.size, ys.size
    if n < KS_MIN_SAMPLES or m < KS_MIN_SAMPLES:
        raise ValueError(f"KS needs at least {KS_MIN_SAMPLES} points per sample, got {n} and {m}")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise ValueError("KS samples must be finite")
    d = float(kernels.ks_sweep(np.ascontiguousarray(xs), np.ascontiguousarray(ys)))
    en = n * m / (n + m)
    p = float(special.kolmogorov(np.sqrt(en) * d)) if d > 0 else 1.0
    return KSResult(d, n, m, min(max(p, 0.0), 1.0))


def ecdf(samples, points):
    """Right-continuous empirical CDF of ``samples`` evaluated at ``points``."""
    xs = np.sort(np.asarray(samples, dtype=float).ravel())
    return np.searchsorted(xs, np.asarray(points, dtype=float), side="right") / xs.size


def _z(confidence: float) -> float:
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    return float(stats.norm.ppf(0.5 + confidence / 2))


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    # constant samples get an exact mean and a zero-width interval
    if np.ptp(x) == 0:
        return float(x[0]), 0.0
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))


def mean_with_ci(samples, confidence: float = 0.99) -> SampleSummary:
    arr = np.asarray(samples).ravel()
    if arr.size < 2:
        raise ValueError("need at least two samples")
    z = _z(confidence)
    n = arr.size
    if np.iscomplexobj(arr):
        means, ses = zip(*(_mean_se(p) for p in (arr.real, arr.imag)))
        lo = tuple(mu - z * se for mu, se in zip(means, ses))
        hi = tuple(mu + z * se for mu, se in zip(means, ses))
        q = np.quantile(arr.real, DEFAULT_QUANTILES).tolist()
        return SampleSummary(n, complex(*means), tuple(ses), lo, hi, confidence, q)
    arr = arr.astype(float)
    mu, se = _mean_se(arr)
    q = np.quantile(arr, DEFAULT_QUANTILES).tolist()
    return SampleSummary(n, mu, se, mu - z * se, mu + z * se, confidence, q)


def welch_p_value(xs, ys) -> float:
    """Two-sided Welch test for equal means; (near-)constant samples compare directly."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    scale = max(1.0, abs(xs.mean()), abs(ys.mean()))
    if max(np.ptp(xs), np.ptp(ys)) <= 1e-12 * scale:
        return 1.0 if abs(xs.mean() - ys.mean()) <= 1e-12 * scale else 0.0
    return float(stats.ttest_ind(xs, ys, equal_var=False).pvalue)


def empirical_char_function(samples, t) -> complex:
    """``(1/n) sum_k exp(i t.x_k)``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty sample")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = x.reshape(x.shape[0], -1) if x.ndim > 1 else x.reshape(-1, 1)
    if x.shape[1] != t.size:
        raise ValueError("sample dimension does not match t")
    return complex(np.mean(np.exp(1j * (x @ t))))


def path_error_sequence(values, target) -> np.ndarray:
    """Elementwise ``|value_n - target|`` along one sample path."""
    return np.abs(np.asarray(values) - target)
