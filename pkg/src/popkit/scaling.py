"""Numerical verification of the scaling limits.

Three ladders (law of large numbers, nearly-critical diffusion limit,
weak-mutation Wright-Fisher limit) plus the strong-mutation equilibrium
and the generating-function route from Galton-Watson processes to the
branching diffusion.  Each ladder runs the finite-N model at increasing
sizes and reports a distance to the limit law with a 99% bootstrap
interval; passing means the largest N beats the smallest N with
non-overlapping intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import markov_jump as mj
from .analysis import bootstrap_ci, ks_distance
from .diffusions import (
    FellerSpec,
    WrightFisherSpec,
    feller_extinction,
    feller_transition_cdf,
    sample_wf_terminal,
)
from .markov_jump import (
    SamplePath,
    linear_bd,
    sample_bd_terminal,
    sample_linear_bd_terminal_exact,
)
from .streams import StreamKey

# diffusion resampling coefficient matched to the binomial chain:
# one-generation frequency variance p(1-p)/N over N generations per unit
# of diffusion time gives infinitesimal variance p(1-p), i.e. beta = 1/2
WF_CHAIN_BETA = 0.5


@dataclass(frozen=True)
class LimitLadder:
    """Increasing population sizes with a replicate budget per size."""

    sizes: tuple[int, ...]
    replicates: int
    horizon: float
    target: str = ""

    def __post_init__(self):
        if len(self.sizes) < 2 or any(np.diff(self.sizes) <= 0):
            raise ValueError("sizes must be strictly increasing with >= 2 entries")
        if self.replicates <= 0 or self.horizon <= 0:
            raise ValueError("replicates and horizon must be positive")


@dataclass
class LadderReport:
    """Per-size distance rows plus the improves-along-the-ladder verdict."""

    metric: str
    rows: list[dict] = field(default_factory=list)

    def add(self, N: int, value: float, stderr: float, ci_lo: float, ci_hi: float):
        self.rows.append(
            {"N": N, "metric": self.metric, "value": value, "stderr": stderr,
             "ci99_lo": ci_lo, "ci99_hi": ci_hi}
        )

    @property
    def improves(self) -> bool:
        first, last = self.rows[0], self.rows[-1]
        return last["value"] < first["value"] and last["ci99_hi"] < first["ci99_lo"]


@dataclass(frozen=True)
class OffspringPGF:
    """Offspring distribution given by weights on counts 0..k_max."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("offspring weights must be >= 0")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("offspring weights must sum to 1 within 1e-12")

    def __call__(self, s):
        return np.polynomial.polynomial.polyval(np.asarray(s, dtype=float), np.array(self.weights))

    def mean(self) -> float:
        k = np.arange(len(self.weights), dtype=float)
        return float(k @ np.array(self.weights))

    def variance(self) -> float:
        k = np.arange(len(self.weights), dtype=float)
        w = np.array(self.weights)
        return float((k**2) @ w - (k @ w) ** 2)


def critical_geometric_pgf(k_max: int = 64) -> OffspringPGF:
    """p_k = 2^-(k+1), truncated; mean 1, variance 2."""
    w = 0.5 ** (np.arange(k_max + 1) + 1.0)
    w[-1] += 1.0 - w.sum()  # fold the 2^-(k_max+1) tail into the last atom
    return OffspringPGF(tuple(w))


def pgf_iterate(f: OffspringPGF, n: int, s) -> np.ndarray | float:
    """n-fold functional iteration of the offspring pgf at s; n=0 gives s."""
    if n < 0:
        raise ValueError("n must be >= 0")
    val = np.asarray(s, dtype=float)
    if np.any(val < 0) or np.any(val > 1):
        raise ValueError("s must lie in [0,1]")
    for _ in range(n):
        val = f(val)
    return float(val) if val.ndim == 0 else val


def lln_check(lam: float, mu: float, ladder: LimitLadder, key: StreamKey,
              t: float | None = None) -> LadderReport:
    """Mean absolute deviation of K_N(t)/N from e^{(lam-mu)t}, per N."""
    t = ladder.horizon if t is None else t
    spec = linear_bd(lam, mu)
    target = np.exp((lam - mu) * t)
    report = LadderReport("mean_abs_dev")
    for i, N in enumerate(ladder.sizes):
        term = sample_bd_terminal(spec, N, t, ladder.replicates, key.child(i))
        dev = np.abs(term / N - target)
        point, lo, hi = bootstrap_ci(dev, np.mean, key.child(1000 + i).generator())
        stderr = float(np.std(dev, ddof=1) / np.sqrt(dev.size))
        report.add(N, point, stderr, lo, hi)
    return report


def nearly_critical_check(beta: float, theta1: float, theta2: float,
                          ladder: LimitLadder, key: StreamKey,
                          t: float | None = None) -> LadderReport:
    """KS distance of K_N(Nt)/N to the branching-diffusion transition law.

    The chain has per-capita rates beta + theta1/N (birth) and
    beta + theta2/N (death), starts at N, and is observed at chain time
    N*t; the limit is the Feller diffusion with alpha = theta1 - theta2.
    """
    t = ladder.horizon if t is None else t
    limit = FellerSpec(alpha=theta1 - theta2, beta=beta)
    cdf = lambda x: feller_transition_cdf(limit, 1.0, t, x)
    atoms = {0.0: feller_extinction(limit, 1.0, t)}
    report = LadderReport("ks_distance")
    for i, N in enumerate(ladder.sizes):
        # linear rates, so the terminal chain law can be sampled exactly
        term = sample_linear_bd_terminal_exact(
            beta + theta1 / N, beta + theta2 / N, N, N * t,
            ladder.replicates, key.child(i))
        vals = term / N
        point, lo, hi = bootstrap_ci(
            vals, lambda v: ks_distance(cdf, v, atoms=atoms),
            key.child(1000 + i).generator()
        )
        report.add(N, point, 0.0, lo, hi)
    return report


def simulate_wf_chain(N: int, a1: float, a2: float, y0: float, generations: int,
                      key: StreamKey) -> SamplePath:
    """Exact Wright-Fisher Markov chain path of allele counts.

    Given frequency p, the post-mutation success probability is
    p' = p(1-a1) + (1-p)a2 and the next count is Binomial(N, p').
    """
    if not (0 <= a1 <= 1 and 0 <= a2 <= 1):
        raise ValueError("mutation probabilities must lie in [0,1]")
    count0 = y0 * N
    if abs(count0 - round(count0)) > 1e-9:
        raise ValueError("y0*N must be an integer")
    rng = key.generator()
    counts = np.empty(generations + 1, dtype=np.int64)
    counts[0] = int(round(count0))
    for g in range(generations):
        p = counts[g] / N
        counts[g + 1] = rng.binomial(N, p * (1.0 - a1) + (1.0 - p) * a2)
    return SamplePath(np.arange(generations + 1, dtype=float), counts)


def sample_wf_chain_terminal(N: int, a1: float, a2: float, count0: int,
                             generations: int, n_reps: int, key: StreamKey) -> np.ndarray:
    """Terminal allele counts of n_reps independent chains."""
    rng = key.generator()
    counts = np.full(n_reps, count0, dtype=np.int64)
    for _ in range(generations):
        p = counts / N
        counts = rng.binomial(N, p * (1.0 - a1) + (1.0 - p) * a2)
    return counts


def weak_mutation_check(gamma1: float, gamma2: float, ladder: LimitLadder,
                        key: StreamKey, t: float | None = None, y0: float = 0.5,
                        dt_ref: float = 2e-4, n_ref: int = 100_000) -> LadderReport:
    """KS distance of the chain frequency after floor(N*t) generations
    (mutation probabilities gamma_i/N) to the Wright-Fisher diffusion."""
    t = ladder.horizon if t is None else t
    wf = WrightFisherSpec(gamma1, gamma2, WF_CHAIN_BETA)
    ref = sample_wf_terminal(wf, y0, dt_ref, t, n_ref, key.child(999))
    ref_sorted = np.sort(ref)
    report = LadderReport("ks_distance")
    for i, N in enumerate(ladder.sizes):
        term = sample_wf_chain_terminal(
            N, gamma1 / N, gamma2 / N, int(round(y0 * N)), int(np.floor(N * t)),
            ladder.replicates, key.child(i)
        )
        vals = term / N
        point, lo, hi = bootstrap_ci(
            vals, lambda v: ks_distance(ref_sorted, v), key.child(1000 + i).generator()
        )
        report.add(N, point, 0.0, lo, hi)
    return report


def strong_mutation_check(gamma1: float, gamma2: float, ladder: LimitLadder,
                          key: StreamKey, y0: float = 0.5,
                          relax_units: float = 12.0) -> dict:
    """Strong-mutation regime: epsilon_N = N^{-1/2} (so N*epsilon -> inf).

    Verifies that frequencies concentrate at gamma2/(gamma1+gamma2) and
    that the rescaled fluctuations at the largest N pass an
    Anderson-Darling normality test at the 1% level.
    """
    if gamma1 + gamma2 <= 0:
        raise ValueError("need gamma1 + gamma2 > 0")
    equilibrium = gamma2 / (gamma1 + gamma2)
    rows = []
    terminal_largest = None
    for i, N in enumerate(ladder.sizes):
        eps = 1.0 / np.sqrt(N)
        gens = int(np.ceil(relax_units / (eps * (gamma1 + gamma2))))
        term = sample_wf_chain_terminal(
            N, gamma1 * eps, gamma2 * eps, int(round(y0 * N)), gens,
            ladder.replicates, key.child(i)
        )
        freqs = term / N
        # OU stationary variance: noise p*(1-p*)/N per generation against
        # restoring rate eps*(gamma1+gamma2)
        ou_var = equilibrium * (1.0 - equilibrium) / (2.0 * N * eps * (gamma1 + gamma2))
        scaled = (freqs - equilibrium) / np.sqrt(ou_var)
        rows.append({
            "N": N,
            "epsilon": eps,
            "mean_freq": float(freqs.mean()),
            "stderr": float(freqs.std(ddof=1) / np.sqrt(freqs.size)),
            "scaled_fluct_var": float(scaled.var(ddof=1)),
        })
        if i == len(ladder.sizes) - 1:
            terminal_largest = scaled
    ad = stats.anderson(terminal_largest, dist="norm")
    crit_1pct = float(ad.critical_values[list(ad.significance_level).index(1.0)])
    last = rows[-1]
    return {
        "equilibrium": equilibrium,
        "rows": rows,
        "ad_statistic": float(ad.statistic),
        "ad_critical_1pct": crit_1pct,
        "normality_pass": bool(ad.statistic < crit_1pct),
        "mean_within_3se": bool(
            abs(last["mean_freq"] - equilibrium) < 3.0 * last["stderr"]
        ),
    }


def gw_to_feller_check(pgf: OffspringPGF, ladder: LimitLadder, lam_grid,
                       t: float | None = None) -> LadderReport:
    """Rescaled generating-function iterates against the diffusion transform.

    For each N the iterate f_{floor(Nt)}(e^{-lam/N})^N (mass unit 1/N, time
    unit N generations, N independent ancestors) is compared to
    feller_laplace with matched alpha = N*(mean-1) and beta = variance/2.
    """
    t = ladder.horizon if t is None else t
    lam_grid = np.asarray(lam_grid, dtype=float)
    m, v = pgf.mean(), pgf.variance()
    report = LadderReport("max_transform_dev")
    for N in ladder.sizes:
        n_gens = int(np.floor(N * t))
        iterate = pgf_iterate(pgf, n_gens, np.exp(-lam_grid / N)) ** N
        limit = FellerSpec(alpha=N * (m - 1.0), beta=v / 2.0)
        target = np.array([
            1.0 if lam == 0.0 else _laplace(limit, lam, t) for lam in lam_grid
        ])
        dev = float(np.abs(iterate - target).max())
        report.add(N, dev, 0.0, dev, dev)
    return report


def _laplace(spec: FellerSpec, lam: float, t: float) -> float:
    from .diffusions import feller_laplace

    return float(feller_laplace(spec, 1.0, t, lam))
