"""Birth-death Markov jump processes on the nonnegative integers.

Rates are polynomials in the current state n of degree at most two, which
covers the linear, pure-birth/pure-death and logistic (quadratic
competition) models.  The module provides exact stochastic simulation,
numerical integration of the truncated Kolmogorov forward equations,
the two closed-form laws (binomial for pure death, negative binomial for
pure birth), a symbolic honesty/explosion classifier, moment dynamics and
the deterministic logistic benchmark.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.integrate import solve_ivp

from .streams import StreamKey

DEFAULT_JUMP_CAP = 10_000_000


class ExplosionSuspectedError(RuntimeError):
    """Raised when a simulation exceeds its configured jump cap."""

    def __init__(self, cap: int, t_reached: float):
        self.cap = cap
        self.t_reached = t_reached
        super().__init__(
            f"jump count exceeded the cap of {cap} before the horizon "
            f"(reached t={t_reached:.6g}); the spec may be explosive"
        )


class TruncationError(RuntimeError):
    """Raised when the KFE truncation leaks more mass than allowed."""


def _poly_eval(coeffs: np.ndarray, n):
    out = np.zeros_like(np.asarray(n, dtype=float))
    for c in coeffs[::-1]:
        out = out * n + c
    return out


def _poly_degree(coeffs) -> int:
    deg = -1
    for j, c in enumerate(coeffs):
        if c != 0.0:
            deg = j
    return deg


def _check_nonneg(coeffs: np.ndarray, n_cap: int | None, what: str) -> None:
    """Nonnegativity of a degree<=2 polynomial on the integer support."""
    if n_cap is not None:
        ns = np.arange(n_cap + 1)
        if np.any(_poly_eval(coeffs, ns) < 0):
            raise ValueError(f"{what} rate is negative on the declared support")
        return
    c0 = coeffs[0] if len(coeffs) > 0 else 0.0
    c1 = coeffs[1] if len(coeffs) > 1 else 0.0
    c2 = coeffs[2] if len(coeffs) > 2 else 0.0
    if c2 < 0 or (c2 == 0 and c1 < 0) or (c2 == 0 and c1 == 0 and c0 < 0):
        raise ValueError(f"{what} rate goes negative for large n (no support cap declared)")
    if c2 > 0:
        # minimum over integers sits next to the vertex
        v = -c1 / (2 * c2)
        cand = {0, max(0, int(np.floor(v))), max(0, int(np.ceil(v)))}
        if min(_poly_eval(coeffs, np.array(sorted(cand), float))) < 0:
            raise ValueError(f"{what} rate is negative at some integer state")
    elif _poly_eval(coeffs, 0.0) < 0:
        raise ValueError(f"{what} rate is negative at n=0")


@dataclass(frozen=True)
class BirthDeathSpec:
    """State-dependent rates: rate at n is sum_j coeffs[j] * n**j.

    ``n_cap``, when given, declares a finite support 0..n_cap: rates need
    only be nonnegative there and the birth rate is clamped to zero at the
    cap so the process cannot leave the support.
    """

    birth_coeffs: tuple[float, ...]
    death_coeffs: tuple[float, ...]
    n_cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "birth_coeffs", tuple(float(c) for c in self.birth_coeffs))
        object.__setattr__(self, "death_coeffs", tuple(float(c) for c in self.death_coeffs))
        if len(self.birth_coeffs) > 3 or len(self.death_coeffs) > 3:
            raise ValueError("rates are restricted to polynomials of degree <= 2")
        if _poly_eval(np.array(self.death_coeffs), 0.0) != 0.0:
            raise ValueError("death rate must vanish at n=0")
        _check_nonneg(np.array(self.birth_coeffs), self.n_cap, "birth")
        _check_nonneg(np.array(self.death_coeffs), self.n_cap, "death")

    def birth_rate(self, n):
        r = _poly_eval(np.array(self.birth_coeffs), n)
        if self.n_cap is not None:
            r = np.where(np.asarray(n) >= self.n_cap, 0.0, r)
        return np.maximum(r, 0.0)

    def death_rate(self, n):
        return np.maximum(_poly_eval(np.array(self.death_coeffs), n), 0.0)

    @property
    def is_linear(self) -> bool:
        return _poly_degree(self.birth_coeffs) <= 1 and _poly_degree(self.death_coeffs) <= 1 \
            and (len(self.birth_coeffs) == 0 or self.birth_coeffs[0] == 0.0)


def linear_bd(lam: float, mu: float) -> BirthDeathSpec:
    """Per-capita birth rate lam, per-capita death rate mu."""
    return BirthDeathSpec((0.0, lam), (0.0, mu))


def logistic_bd(lam: float, gamma: float) -> BirthDeathSpec:
    """Birth lam*n, death gamma*n**2 (quadratic competition)."""
    return BirthDeathSpec((0.0, lam), (0.0, 0.0, gamma))


@dataclass
class IntegerDistribution:
    """Truncated probability vector on 0..n_max with tracked mass defect."""

    weights: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < -self.tolerance):
            raise ValueError("negative probability weight")
        self.weights = np.maximum(self.weights, 0.0)
        total = self.weights.sum()
        if total > 1.0 + self.tolerance:
            raise ValueError(f"weights sum to {total} > 1")
        self.mass_defect = max(0.0, 1.0 - total)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    def mean(self) -> float:
        return float(np.arange(self.weights.size) @ self.weights)

    def moment(self, order: int) -> float:
        return float((np.arange(self.weights.size, dtype=float) ** order) @ self.weights)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.weights)

    @staticmethod
    def point_mass(n: int, n_max: int) -> "IntegerDistribution":
        w = np.zeros(n_max + 1)
        w[n] = 1.0
        return IntegerDistribution(w)


@dataclass
class SamplePath:
    """Time-gridded trajectory; states integer for jump processes, real for
    diffusions, and of shape (len(times), 2) for two-species models."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states)
        if self.times.ndim != 1 or self.states.shape[0] != self.times.size:
            raise ValueError("times and states must have matching leading length")
        if self.times.size > 1 and np.any(np.diff(self.times) < 0):
            raise ValueError("times must be nondecreasing")

    @property
    def terminal(self):
        return self.states[-1]


def simulate_bd(
    spec: BirthDeathSpec,
    n0: int,
    t_end: float,
    key: StreamKey,
    max_jumps: int = DEFAULT_JUMP_CAP,
) -> SamplePath:
    """Exact path of the birth-death chain via competing exponentials.

    The path is recorded on its jump skeleton plus the horizon t_end.
    Raises ExplosionSuspectedError if more than ``max_jumps`` jumps occur.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    if t_end <= 0:
        raise ValueError("t_end must be > 0")
    rng = key.generator()
    t, n = 0.0, int(n0)
    times, states = [0.0], [n]
    jumps = 0
    while True:
        b = float(spec.birth_rate(n))
        d = float(spec.death_rate(n))
        total = b + d
        if total <= 0.0:  # absorbed
            break
        wait = rng.exponential(1.0 / total)
        if t + wait > t_end:
            break
        t += wait
        n += 1 if rng.random() * total < b else -1
        times.append(t)
        states.append(n)
        jumps += 1
        if jumps > max_jumps:
            raise ExplosionSuspectedError(max_jumps, t)
    times.append(t_end)
    states.append(n)
    return SamplePath(np.array(times), np.array(states, dtype=np.int64))


def sample_bd_terminal(
    spec: BirthDeathSpec,
    n0: int,
    t_end: float,
    n_reps: int,
    key: StreamKey,
    max_jumps: int = DEFAULT_JUMP_CAP,
) -> np.ndarray:
    """Terminal states of n_reps independent replicates of simulate_bd.

    Same competing-exponentials construction, vectorised across replicates
    (all live replicates advance one jump per sweep).  The jump cap applies
    per replicate.
    """
    if n0 < 0 or t_end <= 0 or n_reps <= 0:
        raise ValueError("invalid n0/t_end/n_reps")
    rng = key.generator()
    state = np.full(n_reps, n0, dtype=np.int64)
    t = np.zeros(n_reps)
    live = np.arange(n_reps)
    sweeps = 0
    while live.size:
        n = state[live]
        b = spec.birth_rate(n)
        d = spec.death_rate(n)
        total = b + d
        absorbed = total <= 0.0
        if absorbed.any():
            live = live[~absorbed]
            if live.size == 0:
                break
            b, d, total = b[~absorbed], d[~absorbed], total[~absorbed]
        wait = rng.exponential(1.0, size=live.size) / total
        tt = t[live] + wait
        done = tt > t_end
        up = rng.random(live.size) * total < b
        t[live] = np.where(done, t[live], tt)
        state[live] += np.where(done, 0, np.where(up, 1, -1))
        live = live[~done]
        sweeps += 1
        if sweeps > max_jumps:
            raise ExplosionSuspectedError(max_jumps, float(t[live].min()))
    return state


def sample_linear_bd_terminal_exact(
    lam: float, mu: float, n0: int, t_end: float, n_reps: int, key: StreamKey
) -> np.ndarray:
    """Exact terminal law of the linear chain (rates lam*n, mu*n).

    Each of the n0 founding lines independently either dies out by t_end
    (probability a) or leaves a geometric number of descendants
    (success parameter 1-b), so the terminal state is a binomial number
    of surviving lines plus a negative binomial overshoot.  O(1) work per
    replicate; agrees in distribution with sample_bd_terminal.
    """
    if lam < 0 or mu < 0 or n0 < 0 or t_end <= 0 or n_reps <= 0:
        raise ValueError("invalid linear chain parameters")
    if lam == mu:
        a = b = lam * t_end / (1.0 + lam * t_end)
    else:
        w = np.exp((lam - mu) * t_end)
        denom = lam * w - mu
        a = mu * (w - 1.0) / denom
        b = lam * (w - 1.0) / denom
    rng = key.generator()
    m = rng.binomial(n0, 1.0 - a, size=n_reps)
    if b == 0.0:
        return m.astype(np.int64)
    extra = rng.negative_binomial(np.maximum(m, 1), 1.0 - b)
    return np.where(m > 0, m + extra, 0).astype(np.int64)


def _kfe_rates(spec: BirthDeathSpec, n_max: int):
    ns = np.arange(n_max + 1, dtype=float)
    return spec.birth_rate(ns), spec.death_rate(ns)


def solve_kfe(
    spec: BirthDeathSpec,
    n0: int,
    t: float,
    n_max: int,
    mass_defect_tol: float = 1e-2,
    rtol: float = 1e-10,
    atol: float = 1e-14,
) -> IntegerDistribution:
    """Integrate the truncated Kolmogorov forward equations up to time t.

    Probability flowing past n_max via births at the boundary leaves the
    truncated system and is reported as the mass defect.  Raises
    TruncationError if the defect exceeds ``mass_defect_tol``.
    """
    grid = solve_kfe_grid(spec, n0, [t], n_max, mass_defect_tol, rtol, atol)
    return grid[0]


def solve_kfe_grid(
    spec: BirthDeathSpec,
    n0: int,
    t_grid,
    n_max: int,
    mass_defect_tol: float = 1e-2,
    rtol: float = 1e-10,
    atol: float = 1e-14,
) -> list[IntegerDistribution]:
    """solve_kfe evaluated on an increasing time grid in a single sweep."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if n_max < n0:
        raise ValueError("n_max must be >= n0")
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be nonnegative and strictly increasing")
    b, d = _kfe_rates(spec, n_max)
    out_rate = b + d

    def rhs(_t, p):
        dp = -out_rate * p
        dp[1:] += b[:-1] * p[:-1]
        dp[:-1] += d[1:] * p[1:]
        return dp

    p0 = np.zeros(n_max + 1)
    p0[n0] = 1.0
    results: list[IntegerDistribution] = []
    positive = t_grid[t_grid > 0]
    sols = {}
    if positive.size:
        sol = solve_ivp(rhs, (0.0, positive[-1]), p0, method="LSODA",
                        t_eval=positive, rtol=rtol, atol=atol)
        if not sol.success:
            raise TruncationError(f"KFE integration failed: {sol.message}")
        sols = {tv: sol.y[:, i] for i, tv in enumerate(positive)}
    for tv in t_grid:
        w = p0.copy() if tv == 0.0 else sols[tv]
        dist = IntegerDistribution(np.maximum(w, 0.0), tolerance=1e-6)
        if dist.mass_defect > mass_defect_tol:
            raise TruncationError(
                f"mass defect {dist.mass_defect:.3g} at t={tv} exceeds "
                f"{mass_defect_tol}; increase n_max"
            )
        results.append(dist)
    return results


def pure_death_law(N: int, lam: float, t: float) -> IntegerDistribution:
    """Closed-form law of the pure linear death process: survivors at time
    t are Binomial(N, e^{-lam*t})."""
    if N < 0 or lam < 0 or t < 0:
        raise ValueError("N, lam, t must be nonnegative")
    p = np.exp(-lam * t)
    return IntegerDistribution(stats.binom.pmf(np.arange(N + 1), N, p))


def pure_birth_law(N: int, lam: float, t: float, n_max: int | None = None) -> IntegerDistribution:
    """Closed-form law of the pure linear birth process started from N:
    sum of N independent geometrics with success parameter e^{-lam*t}."""
    if N <= 0 or lam < 0 or t < 0:
        raise ValueError("need N >= 1 and lam, t >= 0")
    p = np.exp(-lam * t)
    if n_max is None:
        n_max = int(stats.nbinom.ppf(1.0 - 1e-12, N, p)) + N
    w = np.zeros(n_max + 1)
    ks = np.arange(N, n_max + 1)
    w[N:] = stats.nbinom.pmf(ks - N, N, p)
    return IntegerDistribution(w)


def classify_honesty(birth_coeffs, support_cap: int | None = None) -> str:
    """Classify a pure birth process as 'honest' or 'explosive'.

    The decision is symbolic: a finite support (only finitely many positive
    rates) or polynomial degree <= 1 gives an honest process (sum 1/p_n
    diverges); degree >= 2 with positive leading coefficient makes the rate
    sum converge, hence explosion.
    """
    coeffs = np.array([float(c) for c in birth_coeffs])
    if coeffs.size > 3:
        raise ValueError("rates are restricted to polynomials of degree <= 2")
    _check_nonneg(coeffs, support_cap, "birth")
    if support_cap is not None:
        return "honest"
    return "honest" if _poly_degree(coeffs) <= 1 else "explosive"


def moment_trajectory(
    spec: BirthDeathSpec,
    n0: int,
    t_grid,
    order: int = 1,
    n_max: int | None = None,
) -> np.ndarray:
    """First (and optionally second) moments of K(t) on a time grid.

    Linear specs use the closed forms (the mean solves the deterministic
    linear ODE); anything else is computed from the truncated KFE, for
    which ``n_max`` must be supplied.  Returns shape (len(t_grid), order).
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if spec.is_linear:
        lam = spec.birth_coeffs[1] if len(spec.birth_coeffs) > 1 else 0.0
        mu = spec.death_coeffs[1] if len(spec.death_coeffs) > 1 else 0.0
        a = lam - mu
        m1 = n0 * np.exp(a * t_grid)
        if order == 1:
            return m1[:, None]
        if a != 0.0:
            var = n0 * (lam + mu) / a * np.exp(a * t_grid) * (np.exp(a * t_grid) - 1.0)
        else:
            var = 2.0 * lam * n0 * t_grid
        return np.column_stack([m1, var + m1**2])
    if n_max is None:
        raise ValueError("n_max is required for non-linear specs (KFE route)")
    dists = solve_kfe_grid(spec, n0, t_grid, n_max)
    cols = [np.array([d.moment(1) for d in dists])]
    if order == 2:
        cols.append(np.array([d.moment(2) for d in dists]))
    return np.column_stack(cols)


def logistic_ode(lam: float, gamma: float, m0: float, t) -> np.ndarray | float:
    """Closed-form solution of the Pearl-Verhulst logistic equation
    m' = m (lam - gamma m)."""
    t = np.asarray(t, dtype=float)
    if m0 == 0.0:
        out = np.zeros_like(t)
    else:
        out = lam * m0 / (gamma * m0 + (lam - gamma * m0) * np.exp(-lam * t))
    return float(out) if out.ndim == 0 else out


def jensen_gap(spec: BirthDeathSpec, n0: int, t_grid, n_max: int) -> dict:
    """Moment inequality dM/dt < f(M) for the logistic chain.

    Computes, per grid point, the KFE mean M(t), the logistic drift f(M),
    dM/dt = E[g(K)] with g(k) = birth(k) - death(k), and Var[K(t)].  Strict
    inequality holds exactly when the variance is positive (g concave).
    """
    deg_b = _poly_degree(spec.birth_coeffs)
    deg_d = _poly_degree(spec.death_coeffs)
    if deg_b > 1 or deg_d != 2:
        raise ValueError("jensen_gap expects a logistic spec: linear birth, quadratic death")
    lam = spec.birth_coeffs[1]
    gam = spec.death_coeffs[2]
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    dists = solve_kfe_grid(spec, n0, t_grid, n_max)
    ns = np.arange(n_max + 1, dtype=float)
    g = np.asarray(spec.birth_rate(ns)) - np.asarray(spec.death_rate(ns))
    M = np.array([d.mean() for d in dists])
    m2 = np.array([d.moment(2) for d in dists])
    dMdt = np.array([float(g @ d.weights) for d in dists])
    return {
        "t": t_grid,
        "mean": M,
        "f_of_mean": lam * M - gam * M**2,
        "dM_dt": dMdt,
        "variance": m2 - M**2,
    }
