"""The four diffusion families and their analytic oracles.

Feller's branching diffusion dZ = sqrt(2 b Z) dW + a Z dt is handled both
by Euler-Maruyama and by an exact one-shot transition sampler.  The exact
sampler follows from the Laplace transform E[exp(-l Z_t) | Z_0 = z] =
exp(-z u_t(l)) with u_t solving the Riccati equation u' = a u - b u^2:
u_t has the form rho * c * l / (c + l), which is the transform of a
Poisson(z * rho * c) number of independent Exp(c) family contributions.

Wright-Fisher, logistic branching and two-species (predator-prey)
diffusions are simulated by Euler-Maruyama with the boundary conventions
stated on each simulator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .markov_jump import SamplePath
from .streams import StreamKey


@dataclass(frozen=True)
class FellerSpec:
    """dZ = sqrt(2*beta*Z) dW + alpha*Z dt on [0, inf), 0 absorbing."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")


@dataclass(frozen=True)
class WrightFisherSpec:
    """dY = sqrt(2*beta*Y(1-Y)) dW + (gamma2*(1-Y) - gamma1*Y) dt on [0,1]."""

    gamma1: float
    gamma2: float
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("mutation rates must be >= 0")


@dataclass(frozen=True)
class LogisticFellerSpec:
    """dZ = sqrt(2*beta*Z) dW + (alpha*Z - gamma_c*Z^2) dt, 0 absorbing."""

    alpha: float
    gamma_c: float
    beta: float

    def __post_init__(self):
        if self.gamma_c <= 0 or self.beta <= 0:
            raise ValueError("gamma_c and beta must be > 0")


@dataclass(frozen=True)
class LotkaVolterraSpec:
    """Two-species predator-prey diffusion.

    dX = sqrt(2*beta1*X) dW1 + X(a - b*Y) dt
    dY = sqrt(2*beta2*Y) dW2 + Y(-c + d*X) dt

    The classical deterministic drift with branching-type noise
    proportional to each species' mass.
    """

    a: float
    b: float
    c: float
    d: float
    beta1: float
    beta2: float

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d, self.beta1, self.beta2) <= 0:
            raise ValueError("all Lotka-Volterra coefficients must be > 0")


# ---------------------------------------------------------------------------
# Feller branching diffusion: transform, extinction, exact sampler, EM


def _feller_mixture(spec: FellerSpec, t: float) -> tuple[float, float]:
    """(rho, c) with u_t(l) = rho*c*l/(c+l); rho = e^{alpha t}.

    The alpha = 0 seam is an explicit branch to avoid cancellation.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    if spec.alpha == 0.0:
        return 1.0, 1.0 / (spec.beta * t)
    rho = np.exp(spec.alpha * t)
    c = spec.alpha / (spec.beta * np.expm1(spec.alpha * t))
    return rho, c


def feller_laplace(spec: FellerSpec, z0: float, t: float, lam) -> np.ndarray | float:
    """E[exp(-lam * Z_t) | Z_0 = z0] = exp(-z0 * u_t(lam))."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("transform variable must be >= 0")
    if z0 < 0:
        raise ValueError("z0 must be >= 0")
    if t == 0:
        out = np.exp(-z0 * lam)
    else:
        rho, c = _feller_mixture(spec, t)
        out = np.exp(-z0 * rho * c * lam / (c + lam))
    return float(out) if out.ndim == 0 else out


def feller_extinction(spec: FellerSpec, z0: float, t: float) -> float:
    """P(Z_t = 0 | Z_0 = z0): the lam -> inf limit of the transform."""
    if z0 < 0:
        raise ValueError("z0 must be >= 0")
    if z0 == 0.0:
        return 1.0
    if t == 0:
        return 0.0
    rho, c = _feller_mixture(spec, t)
    return float(np.exp(-z0 * rho * c))


def feller_extinction_limit(spec: FellerSpec, z0: float) -> float:
    """t -> inf extinction probability: exp(-z0*alpha/beta) for alpha > 0,
    otherwise 1."""
    if spec.alpha <= 0:
        return 1.0
    return float(np.exp(-z0 * spec.alpha / spec.beta))


def sample_feller_exact(
    spec: FellerSpec, z0: float, t: float, key: StreamKey, n_reps: int = 1
) -> np.ndarray:
    """Exact draws from the transition law of Feller's branching diffusion.

    Z_t is zero with the extinction mass exp(-theta), otherwise a sum of
    K ~ Poisson(theta) independent Exp(c) contributions, i.e. Gamma(K, 1/c);
    theta = z0 * rho * c.  This compound construction reproduces the
    Laplace transform of feller_laplace exactly.
    """
    if z0 < 0:
        raise ValueError("z0 must be >= 0")
    rng = key.generator()
    if z0 == 0.0:
        return np.zeros(n_reps)
    rho, c = _feller_mixture(spec, t)
    theta = z0 * rho * c
    k = rng.poisson(theta, size=n_reps)
    g = rng.gamma(np.maximum(k, 1), 1.0 / c, size=n_reps)
    return np.where(k > 0, g, 0.0)


def simulate_feller_exact(spec: FellerSpec, z0: float, t: float, key: StreamKey) -> float:
    """Single exact terminal mass."""
    return float(sample_feller_exact(spec, z0, t, key, n_reps=1)[0])


def feller_transition_cdf(spec: FellerSpec, z0: float, t: float, x) -> np.ndarray:
    """Exact CDF of Z_t (atom at zero plus the Poisson-Gamma mixture)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    rho, c = _feller_mixture(spec, t)
    theta = z0 * rho * c
    k_hi = int(theta + 12.0 * np.sqrt(theta) + 30.0)
    ks = np.arange(1, k_hi + 1)
    pk = stats.poisson.pmf(ks, theta)
    # regularized lower incomplete gamma: P(Gamma(k, 1/c) <= x)
    body = pk @ special.gammainc(ks[:, None], c * np.maximum(x, 0.0)[None, :])
    out = np.where(x >= 0.0, np.exp(-theta) + body, 0.0)
    return float(out[0]) if scalar else out


def riccati_u_numeric(spec: FellerSpec, t: float, lam: float, rtol: float = 1e-12) -> float:
    """Direct numeric integration of u' = alpha*u - beta*u^2, u(0) = lam.

    Independent check of the closed form used by feller_laplace.
    """
    from scipy.integrate import solve_ivp

    sol = solve_ivp(
        lambda _t, u: spec.alpha * u - spec.beta * u * u,
        (0.0, t),
        [float(lam)],
        method="LSODA",
        rtol=rtol,
        atol=1e-14,
    )
    if not sol.success:
        raise RuntimeError(f"Riccati integration failed: {sol.message}")
    return float(sol.y[0, -1])


def feller_u_closed_form(spec: FellerSpec, t: float, lam: float) -> float:
    """The closed-form u_t(lam) itself (exponent per unit initial mass)."""
    if t == 0:
        return float(lam)
    rho, c = _feller_mixture(spec, t)
    return float(rho * c * lam / (c + lam))


# ---------------------------------------------------------------------------
# Euler-Maruyama simulators


def _em_grid(dt: float, t_end: float) -> np.ndarray:
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be > 0")
    n = int(round(t_end / dt))
    if n < 1:
        raise ValueError("t_end must cover at least one step")
    return np.linspace(0.0, n * dt, n + 1)


def _feller_em_step(z, alpha, beta, dt, xi):
    z_new = z + alpha * z * dt + np.sqrt(2.0 * beta * z * dt) * xi
    return np.maximum(z_new, 0.0)


def simulate_feller_em(
    spec: FellerSpec, z0: float, dt: float, t_end: float, key: StreamKey
) -> SamplePath:
    """Euler-Maruyama path; negative proposals truncate to the absorbing 0."""
    if z0 < 0:
        raise ValueError("z0 must be >= 0")
    times = _em_grid(dt, t_end)
    rng = key.generator()
    states = np.empty(times.size)
    states[0] = z0
    z = float(z0)
    for i in range(1, times.size):
        z = float(_feller_em_step(z, spec.alpha, spec.beta, dt, rng.standard_normal()))
        states[i] = z
    return SamplePath(times, states)


def sample_feller_em_terminal(
    spec: FellerSpec, z0: float, dt: float, t_end: float, n_reps: int, key: StreamKey
) -> np.ndarray:
    """Terminal values of n_reps Euler-Maruyama replicates."""
    times = _em_grid(dt, t_end)
    rng = key.generator()
    z = np.full(n_reps, float(z0))
    for _ in range(times.size - 1):
        z = _feller_em_step(z, spec.alpha, spec.beta, dt, rng.standard_normal(n_reps))
    return z


def _wf_drift(spec: WrightFisherSpec, y):
    return spec.gamma2 * (1.0 - y) - spec.gamma1 * y


def _wf_em_step(spec: WrightFisherSpec, y, dt, xi):
    y_new = y + _wf_drift(spec, y) * dt + np.sqrt(2.0 * spec.beta * y * (1.0 - y) * dt) * xi
    return np.clip(y_new, 0.0, 1.0)


def simulate_wf(
    spec: WrightFisherSpec, y0: float, dt: float, t_end: float, key: StreamKey
) -> SamplePath:
    """Euler-Maruyama with proposals clamped to [0,1].  With both mutation
    rates zero the endpoints absorb (drift and noise vanish there)."""
    if not 0.0 <= y0 <= 1.0:
        raise ValueError("y0 must lie in [0,1]")
    times = _em_grid(dt, t_end)
    rng = key.generator()
    states = np.empty(times.size)
    states[0] = y0
    y = float(y0)
    for i in range(1, times.size):
        y = float(_wf_em_step(spec, y, dt, rng.standard_normal()))
        states[i] = y
    return SamplePath(times, states)


def sample_wf_terminal(
    spec: WrightFisherSpec, y0: float, dt: float, t_end: float, n_reps: int, key: StreamKey
) -> np.ndarray:
    times = _em_grid(dt, t_end)
    rng = key.generator()
    y = np.full(n_reps, float(y0))
    for _ in range(times.size - 1):
        y = _wf_em_step(spec, y, dt, rng.standard_normal(n_reps))
    return y


def wf_occupancy_sample(
    spec: WrightFisherSpec,
    y0: float,
    dt: float,
    burn_in: float,
    n_chains: int,
    samples_per_chain: int,
    thin: float,
    key: StreamKey,
) -> np.ndarray:
    """Post-burn-in occupancy sample: n_chains parallel paths thinned every
    ``thin`` time units.  Returns n_chains*samples_per_chain values."""
    rng = key.generator()
    y = np.full(n_chains, float(y0))
    burn_steps = int(round(burn_in / dt))
    thin_steps = max(1, int(round(thin / dt)))
    for _ in range(burn_steps):
        y = _wf_em_step(spec, y, dt, rng.standard_normal(n_chains))
    out = np.empty((samples_per_chain, n_chains))
    for j in range(samples_per_chain):
        for _ in range(thin_steps):
            y = _wf_em_step(spec, y, dt, rng.standard_normal(n_chains))
        out[j] = y
    return out.ravel()


def wf_stationary_density(spec: WrightFisherSpec, x) -> np.ndarray | float:
    """Stationary Beta(gamma2/beta, gamma1/beta) density; needs both
    mutation rates positive."""
    if spec.gamma1 <= 0 or spec.gamma2 <= 0:
        raise ValueError("stationary density requires gamma1 > 0 and gamma2 > 0")
    out = stats.beta.pdf(np.asarray(x, dtype=float), spec.gamma2 / spec.beta, spec.gamma1 / spec.beta)
    return float(out) if np.ndim(x) == 0 else out


def wf_stationary_cdf(spec: WrightFisherSpec, x) -> np.ndarray:
    if spec.gamma1 <= 0 or spec.gamma2 <= 0:
        raise ValueError("stationary law requires gamma1 > 0 and gamma2 > 0")
    return stats.beta.cdf(np.asarray(x, dtype=float), spec.gamma2 / spec.beta, spec.gamma1 / spec.beta)


def simulate_logistic_feller(
    spec: LogisticFellerSpec, z0: float, dt: float, t_end: float, key: StreamKey
) -> SamplePath:
    """Euler-Maruyama for the branching diffusion with logistic growth."""
    if z0 < 0:
        raise ValueError("z0 must be >= 0")
    times = _em_grid(dt, t_end)
    rng = key.generator()
    states = np.empty(times.size)
    states[0] = z0
    z = float(z0)
    for i in range(1, times.size):
        drift = spec.alpha * z - spec.gamma_c * z * z
        z = max(z + drift * dt + np.sqrt(2.0 * spec.beta * z * dt) * rng.standard_normal(), 0.0)
        states[i] = z
    return SamplePath(times, states)


def sample_logistic_feller_terminal(
    spec: LogisticFellerSpec, z0: float, dt: float, t_end: float, n_reps: int, key: StreamKey
) -> np.ndarray:
    times = _em_grid(dt, t_end)
    rng = key.generator()
    z = np.full(n_reps, float(z0))
    for _ in range(times.size - 1):
        drift = spec.alpha * z - spec.gamma_c * z * z
        z = np.maximum(z + drift * dt + np.sqrt(2.0 * spec.beta * z * dt) * rng.standard_normal(n_reps), 0.0)
    return z


def simulate_lv(
    spec: LotkaVolterraSpec, x0: float, y0: float, dt: float, t_end: float, key: StreamKey
) -> SamplePath:
    """Two-species Euler-Maruyama path, componentwise absorption at 0.
    states has shape (n_steps+1, 2): prey in column 0, predator in 1."""
    if x0 < 0 or y0 < 0:
        raise ValueError("initial masses must be >= 0")
    times = _em_grid(dt, t_end)
    rng = key.generator()
    states = np.empty((times.size, 2))
    states[0] = (x0, y0)
    x, y = float(x0), float(y0)
    for i in range(1, times.size):
        xi1, xi2 = rng.standard_normal(2)
        x_new = x + x * (spec.a - spec.b * y) * dt + np.sqrt(2.0 * spec.beta1 * x * dt) * xi1
        y_new = y + y * (-spec.c + spec.d * x) * dt + np.sqrt(2.0 * spec.beta2 * y * dt) * xi2
        x, y = max(x_new, 0.0), max(y_new, 0.0)
        states[i] = (x, y)
    return SamplePath(times, states)


def sample_lv_terminal(
    spec: LotkaVolterraSpec, x0: float, y0: float, dt: float, t_end: float,
    n_reps: int, key: StreamKey
) -> np.ndarray:
    """(n_reps, 2) terminal masses."""
    times = _em_grid(dt, t_end)
    rng = key.generator()
    x = np.full(n_reps, float(x0))
    y = np.full(n_reps, float(y0))
    for _ in range(times.size - 1):
        xi1 = rng.standard_normal(n_reps)
        xi2 = rng.standard_normal(n_reps)
        x_new = x + x * (spec.a - spec.b * y) * dt + np.sqrt(2.0 * spec.beta1 * x * dt) * xi1
        y_new = y + y * (-spec.c + spec.d * x) * dt + np.sqrt(2.0 * spec.beta2 * y * dt) * xi2
        x = np.maximum(x_new, 0.0)
        y = np.maximum(y_new, 0.0)
    return np.column_stack([x, y])


def lv_ode(spec: LotkaVolterraSpec, x0: float, y0: float, t_grid) -> np.ndarray:
    """Deterministic Lotka-Volterra benchmark on a time grid."""
    from scipy.integrate import solve_ivp

    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    sol = solve_ivp(
        lambda _t, u: [u[0] * (spec.a - spec.b * u[1]), u[1] * (-spec.c + spec.d * u[0])],
        (0.0, t_grid[-1]),
        [x0, y0],
        t_eval=t_grid,
        rtol=1e-10,
        atol=1e-12,
    )
    return sol.y.T


def simulate_ou(
    theta: float, sigma: float, x0: float, dt: float, t_end: float, key: StreamKey,
    exact: bool = False,
) -> SamplePath:
    """Ornstein-Uhlenbeck dX = -theta*X dt + sigma dW.

    exact=True uses the Gaussian transition over each step instead of the
    Euler-Maruyama increment.
    """
    if theta <= 0 or sigma <= 0:
        raise ValueError("theta and sigma must be > 0")
    times = _em_grid(dt, t_end)
    rng = key.generator()
    states = np.empty(times.size)
    states[0] = x0
    x = float(x0)
    if exact:
        decay = np.exp(-theta * dt)
        sd = sigma * np.sqrt((1.0 - decay**2) / (2.0 * theta))
    for i in range(1, times.size):
        xi = rng.standard_normal()
        if exact:
            x = x * decay + sd * xi
        else:
            x = x - theta * x * dt + sigma * np.sqrt(dt) * xi
        states[i] = x
    return SamplePath(times, states)


def sample_ou_terminal(
    theta: float, sigma: float, x0: float, dt: float, t_end: float,
    n_reps: int, key: StreamKey, exact: bool = False,
) -> np.ndarray:
    times = _em_grid(dt, t_end)
    rng = key.generator()
    x = np.full(n_reps, float(x0))
    if exact:
        decay = np.exp(-theta * dt)
        sd = sigma * np.sqrt((1.0 - decay**2) / (2.0 * theta))
    for _ in range(times.size - 1):
        xi = rng.standard_normal(n_reps)
        if exact:
            x = x * decay + sd * xi
        else:
            x = x - theta * x * dt + sigma * np.sqrt(dt) * xi
    return x
