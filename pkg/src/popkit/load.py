"""Substitutional (genetic) load accounting for a two-type haploid
population under selection, and the bookkeeping that exposes when the
classical load figure becomes an artifact.

Everything here is deterministic: population sizes are real masses, large
enough to neglect fluctuations.  Type A has absolute fitness mu, type a
has mu*(1-k); q_n is the relative frequency of a in generation n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

TAIL_TOL = 1e-15


@dataclass(frozen=True)
class RegulationFn:
    """Named regulation family: per-capita offspring multiplier as a
    monotone non-increasing function of total size with f(0) = 1."""

    name: str
    fn: Callable[[float], float]

    def __post_init__(self):
        if abs(self.fn(0.0) - 1.0) > 1e-12:
            raise ValueError("regulation must satisfy f(0) = 1")
        grid = np.geomspace(1e-6, 1e9, 40)
        vals = np.array([self.fn(g) for g in grid])
        if np.any(np.diff(vals) > 1e-12):
            raise ValueError("regulation must be non-increasing")

    def __call__(self, total: float) -> float:
        return self.fn(total)


def beverton_holt(c: float) -> RegulationFn:
    """f(total) = 1/(1 + c*total)."""
    if c <= 0:
        raise ValueError("c must be > 0")
    return RegulationFn(f"beverton_holt(c={c})", lambda total: 1.0 / (1.0 + c * total))


@dataclass(frozen=True)
class LoadScenario:
    """Fitness, selection and initial masses for a substitution run.

    regulation: None (geometric growth), a RegulationFn (shared ecological
    regulation), or the string "immigration" (constant total size kept up
    by proportional immigration from a reservoir).
    """

    mu: float
    k: float
    N0: float
    N0p: float
    M: int | None = None
    regulation: RegulationFn | str | None = None

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be > 0")
        if not 0.0 < self.k < 1.0:
            raise ValueError("k must lie in (0,1)")
        if self.N0 <= 0 or self.N0p <= 0:
            raise ValueError("initial masses must be > 0")
        if isinstance(self.regulation, str) and self.regulation != "immigration":
            raise ValueError("string regulation must be 'immigration'")

    @property
    def q0(self) -> float:
        return self.N0p / (self.N0 + self.N0p)


def frequency_series(q0: float, k: float, M: int) -> np.ndarray:
    """q_n = q0 (1-k)^n / (p0 + q0 (1-k)^n) for n = 0..M.

    Equivalently the one-step recursion q_{n+1} = q_n(1-k)/(1 - k q_n);
    the closed form is exact for any shared regulation because the
    regulation factor cancels in the ratio.
    """
    if not 0.0 < q0 < 1.0:
        raise ValueError("q0 must lie in (0,1)")
    if not 0.0 < k < 1.0:
        raise ValueError("k must lie in (0,1)")
    n = np.arange(M + 1)
    w = q0 * (1.0 - k) ** n
    return w / ((1.0 - q0) + w)


def haldane_load(q0: float, k: float, M: int | None = None) -> float:
    """Haldane's substitutional load D = sum_{n=0}^{M} k*q_n.

    M=None sums to infinity: terms are added until the geometric tail
    bound sum_{m>=n} k q_m <= (q0/p0)(1-k)^n drops below 1e-15.
    """
    if M is not None:
        return float(k * frequency_series(q0, k, M).sum())
    if not 0.0 < q0 < 1.0 or not 0.0 < k < 1.0:
        raise ValueError("q0 and k must lie in (0,1)")
    p0 = 1.0 - q0
    total = 0.0
    q = q0
    ratio_bound = q0 / p0
    n = 0
    while ratio_bound > TAIL_TOL:
        total += k * q
        q = q * (1.0 - k) / (1.0 - k * q)
        ratio_bound *= 1.0 - k
        n += 1
        if n > 100_000_000:  # unreachable for k in (0,1); safety stop
            raise RuntimeError("load summation failed to converge")
    return float(total)


def unregulated_trajectories(scenario: LoadScenario, M: int) -> dict:
    """Geometric subpopulation series N_n = N0 mu^n, N'_n = N0p (mu(1-k))^n."""
    n = np.arange(M + 1)
    N = scenario.N0 * scenario.mu ** n
    Np = scenario.N0p * (scenario.mu * (1.0 - scenario.k)) ** n
    return {"generation": n, "N": N, "N_prime": Np, "q": Np / (N + Np)}


def absolute_loss(scenario: LoadScenario, M: int | None = None) -> float:
    """Cumulative selective deaths in individuals over M generations.

    Requires mu = 1 (sizes would otherwise change for non-selective
    reasons as well).  Telescoping gives sum_{n<M} k N'_n = N0p - N'_M
    exactly; M=None returns the full limit N0p.
    """
    if scenario.mu != 1.0:
        raise ValueError("absolute loss accounting assumes mu = 1")
    if M is None:
        return float(scenario.N0p)
    Np_M = scenario.N0p * (1.0 - scenario.k) ** M
    return float(scenario.N0p - Np_M)


def total_a_ever_born(scenario: LoadScenario) -> float:
    """sum_n N'_n = N0p / k for mu = 1 (every a-generation, all time)."""
    if scenario.mu != 1.0:
        raise ValueError("assumes mu = 1")
    return float(scenario.N0p / scenario.k)


def regulated_trajectories(scenario: LoadScenario, M: int) -> dict:
    """Iterate the ecologically regulated map.

    N_n = mu N_{n-1} f(T_{n-1}), N'_n = mu(1-k) N'_{n-1} f(T_{n-1}) with
    T the parent-generation total (explicit form of the regulated map;
    the shared factor cancels in the frequency, which therefore still
    follows frequency_series exactly).  Also reports the long-run plateau
    of the total size via its fixed-point equation mu*f(T) = 1 when the
    regulation admits one.
    """
    f = scenario.regulation
    if not isinstance(f, RegulationFn):
        raise ValueError("scenario must carry a RegulationFn")
    N = np.empty(M + 1)
    Np = np.empty(M + 1)
    N[0], Np[0] = scenario.N0, scenario.N0p
    for n in range(M):
        factor = scenario.mu * f(N[n] + Np[n])
        N[n + 1] = factor * N[n]
        Np[n + 1] = factor * (1.0 - scenario.k) * Np[n]
    out = {"generation": np.arange(M + 1), "N": N, "N_prime": Np, "q": Np / (N + Np)}
    out["plateau"] = _plateau(scenario.mu, f)
    return out


def _plateau(mu: float, f: RegulationFn) -> float | None:
    """Root of mu*f(T) = 1 (stationary all-A population size), if any."""
    if mu * f(0.0) <= 1.0:
        return None
    lo, hi = 1e-12, 1.0
    while mu * f(hi) > 1.0:
        hi *= 2.0
        if hi > 1e15:
            return None
    return float(brentq(lambda T: mu * f(T) - 1.0, lo, hi, xtol=1e-12, rtol=1e-12))


def immigration_rescue(scenario: LoadScenario, M: int) -> dict:
    """Constant total size maintained by proportional immigration.

    After each selection step the population is topped back up to
    C = N0 + N0p with immigrants in the current post-selection
    proportions, leaving frequencies untouched.  The cumulative immigrant
    count divided by C equals the partial Haldane sums exactly.
    """
    if scenario.mu != 1.0:
        raise ValueError("the immigration bookkeeping assumes mu = 1")
    C = scenario.N0 + scenario.N0p
    q = frequency_series(scenario.q0, scenario.k, M)
    d = scenario.k * q[:-1] * C if M > 0 else np.empty(0)
    cumulative = np.concatenate([[0.0], np.cumsum(d)])
    return {
        "generation": np.arange(M + 1),
        "N": C * (1.0 - q),
        "N_prime": C * q,
        "q": q,
        "immigrants": np.concatenate([[0.0], d]),
        "cumulative_immigrants": cumulative,
        "total": C,
    }


def multilocus_load(loci: Sequence[tuple[float, float]], M: int | None = None) -> dict:
    """Load under multiplicative fitness across independent loci.

    Each locus is a (q0, k) pair evolving by frequency_series on its own;
    the total load is the sum of per-locus loads.  Also reports the peak
    fitness ratio between the all-best genotype and the generation-0
    population mean genotype, prod_i 1/(1 - k_i q0_i), which grows
    multiplicatively in the number of loci.
    """
    if not loci:
        raise ValueError("need at least one locus")
    per_locus = np.array([haldane_load(q0, k, M) for q0, k in loci])
    log_ratio = float(sum(-np.log1p(-k * q0) for q0, k in loci))
    return {
        "per_locus": per_locus,
        "total": float(per_locus.sum()),
        "log_peak_fitness_ratio": log_ratio,
        "log10_peak_fitness_ratio": log_ratio / np.log(10.0),
    }


def load_artifact_search(
    q0_grid=None, k_grid=None, N0: float = 1.0
) -> dict:
    """Search for parameters where Haldane's D times the population size
    exceeds the total number of a-individuals ever born.

    With mu = 1 and total size C = N0 + N0p the a-individuals ever born
    number N0p/k, while Haldane's figure charges D*C individuals; small
    p0 and moderate k make the latter larger.  Returns the flagged
    configurations and the most extreme one.
    """
    if q0_grid is None:
        q0_grid = [0.9, 0.99, 0.999, 0.9999]
    if k_grid is None:
        k_grid = [0.05, 0.1, 0.2, 0.3, 0.5]
    hits = []
    for q0 in q0_grid:
        for k in k_grid:
            N0p = N0 * q0 / (1.0 - q0)
            C = N0 + N0p
            D = haldane_load(q0, k)
            born = N0p / k
            if D * C > born:
                hits.append({
                    "q0": q0, "k": k, "D": D, "population_size": C,
                    "haldane_individuals": D * C, "a_ever_born": born,
                    "excess_ratio": D * C / born,
                })
    best = max(hits, key=lambda h: h["excess_ratio"]) if hits else None
    return {"hits": hits, "best": best, "artifact_found": bool(hits)}
