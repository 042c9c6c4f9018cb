"""Shared statistical plumbing: empirical samples, distances, summaries.

These are deliberately small wrappers with fixed conventions so that every
module reports Monte Carlo evidence the same way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# two-sided 99% normal quantile, used for all reported intervals
Z99 = 2.5758293035489004


@dataclass
class EmpiricalSample:
    """Uniformly weighted sample of real outcomes."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise ValueError("empty sample")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample contains non-finite values")

    @property
    def n(self) -> int:
        return self.values.size


@dataclass
class McSummary:
    mean: float
    stderr: float
    ci99: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "ci99_lo": self.ci99[0],
            "ci99_hi": self.ci99[1],
        }


def mc_summary(sample: EmpiricalSample | np.ndarray) -> McSummary:
    """Mean, standard error and 99% normal interval of a sample."""
    v = sample.values if isinstance(sample, EmpiricalSample) else np.asarray(sample, float)
    mean = float(np.mean(v))
    if v.size > 1:
        stderr = float(np.std(v, ddof=1) / np.sqrt(v.size))
    else:
        stderr = 0.0
    return McSummary(mean, stderr, (mean - Z99 * stderr, mean + Z99 * stderr))


def ks_distance(a, b: EmpiricalSample | np.ndarray, atoms: dict | None = None) -> float:
    """Kolmogorov-Smirnov statistic.

    ``a`` may be an EmpiricalSample/array (two-sample statistic) or a
    callable CDF (one-sample statistic against the analytic law).  When
    the law has point masses, pass them as ``atoms`` ({location: mass})
    so the CDF left limits are handled correctly.
    """
    bv = np.sort(b.values if isinstance(b, EmpiricalSample) else np.asarray(b, float))
    n = bv.size
    if callable(a):
        uniq, counts = np.unique(bv, return_counts=True)
        cum = np.cumsum(counts)
        cdf_right = np.asarray(a(uniq), dtype=float).reshape(-1)
        cdf_left = cdf_right.copy()
        if atoms:
            for loc, mass in atoms.items():
                hit = uniq == loc
                cdf_left[hit] -= mass
        hi = np.abs(cum / n - cdf_right)
        lo = cdf_left - (cum - counts) / n
        return float(max(hi.max(), lo.max(), 0.0))
    av = np.sort(a.values if isinstance(a, EmpiricalSample) else np.asarray(a, float))
    # evaluate both ECDFs on the pooled support
    allv = np.concatenate([av, bv])
    fa = np.searchsorted(av, allv, side="right") / av.size
    fb = np.searchsorted(bv, allv, side="right") / n
    return float(np.abs(fa - fb).max())


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value (1.63/sqrt(n) at 1%)."""
    c = np.sqrt(-0.5 * np.log(alpha / 2.0))
    return float(c / np.sqrt(n))


def tv_distance(p, q) -> float:
    """Total variation between two truncated integer distributions.

    Accepts IntegerDistribution-like objects (``weights``/``mass_defect``)
    or plain weight arrays.  Half the L1 distance on the union support;
    any difference in truncation mass defect counts as discrepancy too.
    """
    pw, pd = _weights_defect(p)
    qw, qd = _weights_defect(q)
    m = max(pw.size, qw.size)
    pw = np.pad(pw, (0, m - pw.size))
    qw = np.pad(qw, (0, m - qw.size))
    return float(0.5 * (np.abs(pw - qw).sum() + abs(pd - qd)))


def _weights_defect(d) -> tuple[np.ndarray, float]:
    if hasattr(d, "weights"):
        return np.asarray(d.weights, float), float(getattr(d, "mass_defect", 0.0))
    w = np.asarray(d, dtype=float)
    return w, 1.0 - float(w.sum())


def empirical_weights(values: np.ndarray, n_max: int) -> np.ndarray:
    """Relative frequencies of integer outcomes on 0..n_max."""
    values = np.asarray(values)
    counts = np.bincount(np.clip(values, 0, n_max).astype(np.int64), minlength=n_max + 1)
    return counts / values.size


def bootstrap_ci(
    values: np.ndarray,
    statistic: Callable[[np.ndarray], float],
    rng: np.random.Generator,
    n_boot: int = 200,
    level: float = 0.99,
) -> tuple[float, float, float]:
    """(point estimate, lo, hi) percentile bootstrap interval."""
    values = np.asarray(values)
    point = float(statistic(values))
    stats = np.empty(n_boot)
    for i in range(n_boot):
        idx = rng.integers(0, values.size, size=values.size)
        stats[i] = statistic(values[idx])
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(stats, [tail, 1.0 - tail])
    return point, float(lo), float(hi)
