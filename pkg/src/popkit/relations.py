"""Bridges from a pair of branching diffusions to the Wright-Fisher
diffusion.

Two independent critical Feller diffusions Z1, Z2 are simulated jointly.
The relative frequency Y = Z1/(Z1+Z2) becomes Markov either under the
intrinsic clock ds = dt/(Z1+Z2) (time change) or, approximately, by
conditioning the total mass to stay in a band around 1 (rejection
sampling).  In both cases Y is compared distributionally against a
directly simulated Wright-Fisher diffusion with the same fluctuation
coefficient and zero mutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusions import FellerSpec, _em_grid, _feller_em_step
from .markov_jump import SamplePath
from .streams import StreamKey


class TimeChangeDegenerateError(RuntimeError):
    """Raised when total-mass extinction truncates too many replicates."""


class ConditioningFailedError(RuntimeError):
    """Raised when rejection sampling exhausts its attempt budget."""

    def __init__(self, accepted: int, attempts: int):
        self.acceptance_rate = accepted / attempts if attempts else 0.0
        super().__init__(
            f"only {accepted} acceptances in {attempts} attempts "
            f"(rate {self.acceptance_rate:.3g})"
        )


def _require_critical(spec: FellerSpec):
    if spec.alpha != 0.0:
        raise ValueError("the frequency bridges require the critical case alpha = 0")


def time_changed_frequency(
    spec: FellerSpec,
    z1_0: float,
    z2_0: float,
    dt: float,
    s_end: float,
    key: StreamKey,
    n_s_points: int = 31,
    max_real_time: float | None = None,
) -> SamplePath:
    """Frequency path Y on a uniform intrinsic-time grid.

    Simulates the two masses by Euler-Maruyama in real time, accumulates
    s via the left-endpoint rule ds = dt/(Z1+Z2), and records
    Y = Z1/(Z1+Z2) each time s crosses a grid point.  If the total mass
    hits 0 the frequency freezes at its last value (one component always
    dies first, so Y is already absorbed in {0,1}).
    """
    if z1_0 < 0 or z2_0 < 0 or z1_0 + z2_0 <= 0:
        raise ValueError("initial masses must be >= 0 with positive total")
    _require_critical(spec)
    s_grid = np.linspace(0.0, s_end, n_s_points)
    y = sample_time_changed_terminal(
        spec, z1_0, z2_0, dt, s_grid, 1, key, max_real_time=max_real_time
    )
    return SamplePath(s_grid, y[:, 0])


def sample_time_changed_terminal(
    spec: FellerSpec,
    z1_0: float,
    z2_0: float,
    dt: float,
    s_grid,
    n_reps: int,
    key: StreamKey,
    max_real_time: float | None = None,
    degenerate_fraction: float = 0.5,
) -> np.ndarray:
    """Y values on an intrinsic-time grid for n_reps replicates.

    Returns shape (len(s_grid), n_reps).  Raises TimeChangeDegenerateError
    if more than ``degenerate_fraction`` of replicates run out of real time
    before reaching the end of the grid.
    """
    _require_critical(spec)
    s_grid = np.atleast_1d(np.asarray(s_grid, dtype=float))
    if np.any(s_grid < 0) or np.any(np.diff(s_grid) <= 0):
        raise ValueError("s_grid must be nonnegative and strictly increasing")
    if max_real_time is None:
        # generous default: the clock runs at rate 1/total, total starts at
        # z1_0+z2_0 and is a nonnegative martingale
        max_real_time = 50.0 * s_grid[-1] * max(1.0, z1_0 + z2_0)
    rng = key.generator()
    z1 = np.full(n_reps, float(z1_0))
    z2 = np.full(n_reps, float(z2_0))
    s = np.zeros(n_reps)
    y_last = np.full(n_reps, z1_0 / (z1_0 + z2_0))
    next_idx = np.zeros(n_reps, dtype=np.int64)
    out = np.empty((s_grid.size, n_reps))
    if s_grid[0] == 0.0:
        out[0] = y_last
        next_idx[:] = 1
    live = np.arange(n_reps)
    n_steps = int(np.ceil(max_real_time / dt))
    timed_out = 0
    for _ in range(n_steps):
        if live.size == 0:
            break
        total = z1[live] + z2[live]
        dead = total <= 0.0
        if dead.any():
            # total extinct: Y stays frozen at its last value (one component
            # almost always died earlier, so Y is already absorbed in {0,1})
            for idx in live[dead]:
                out[next_idx[idx]:, idx] = y_last[idx]
            live = live[~dead]
            if live.size == 0:
                break
            total = z1[live] + z2[live]
        s_new = s[live] + dt / total
        xi1 = rng.standard_normal(live.size)
        xi2 = rng.standard_normal(live.size)
        z1[live] = _feller_em_step(z1[live], 0.0, spec.beta, dt, xi1)
        z2[live] = _feller_em_step(z2[live], 0.0, spec.beta, dt, xi2)
        s[live] = s_new
        total_new = z1[live] + z2[live]
        pos = total_new > 0
        y_live = np.where(pos, z1[live] / np.where(pos, total_new, 1.0), y_last[live])
        y_last[live] = y_live
        crossed = s_new >= s_grid[np.minimum(next_idx[live], s_grid.size - 1)]
        if crossed.any():
            for idx in live[crossed]:
                # the state at the first grid crossing stands for every grid
                # point passed within this step
                while next_idx[idx] < s_grid.size and s[idx] >= s_grid[next_idx[idx]]:
                    out[next_idx[idx], idx] = y_last[idx]
                    next_idx[idx] += 1
        finished = next_idx[live] >= s_grid.size
        live = live[~finished]
    if live.size:
        timed_out = live.size
        for idx in live:
            out[next_idx[idx]:, idx] = y_last[idx]
    if timed_out > degenerate_fraction * n_reps:
        raise TimeChangeDegenerateError(
            f"{timed_out}/{n_reps} replicates ran out of real time before "
            f"reaching s = {s_grid[-1]}"
        )
    return out


@dataclass
class ConditionedSample:
    """Accepted frequency paths plus the bookkeeping the report must carry."""

    times: np.ndarray
    paths: np.ndarray  # shape (n_accepted, len(times))
    epsilon: float
    attempts: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0

    @property
    def terminal(self) -> np.ndarray:
        return self.paths[:, -1]


def conditioned_frequency(
    spec: FellerSpec,
    y0: float,
    epsilon: float,
    dt: float,
    t_end: float,
    key: StreamKey,
    max_attempts: int = 1_000_000,
    target_accepted: int = 1,
    batch: int = 4096,
) -> ConditionedSample:
    """Rejection-sampled approximation of conditioning on total mass 1.

    Simulates the pair (Z1, Z2) from (y0, 1-y0) and accepts a path iff
    sup_t |Z1+Z2 - 1| <= epsilon on the grid.  This is an epsilon-band
    approximation of the singular conditioning; the acceptance rate is
    part of the result.  Raises ConditioningFailedError when the attempt
    budget is exhausted before ``target_accepted`` acceptances.
    """
    if not 0.0 < epsilon:
        raise ValueError("epsilon must be > 0")
    if not 0.0 < y0 < 1.0:
        raise ValueError("y0 must lie in (0,1)")
    _require_critical(spec)
    times = _em_grid(dt, t_end)
    rng = key.generator()
    kept: list[np.ndarray] = []
    attempts = 0
    accepted = 0
    while accepted < target_accepted and attempts < max_attempts:
        n = min(batch, max_attempts - attempts)
        z1 = np.full(n, float(y0))
        z2 = np.full(n, 1.0 - float(y0))
        ok = np.ones(n, dtype=bool)
        ypath = np.empty((n, times.size))
        ypath[:, 0] = y0
        for i in range(1, times.size):
            z1 = _feller_em_step(z1, 0.0, spec.beta, dt, rng.standard_normal(n))
            z2 = _feller_em_step(z2, 0.0, spec.beta, dt, rng.standard_normal(n))
            total = z1 + z2
            ok &= np.abs(total - 1.0) <= epsilon
            with np.errstate(invalid="ignore", divide="ignore"):
                ypath[:, i] = np.where(total > 0, z1 / np.maximum(total, 1e-300), ypath[:, i - 1])
        attempts += n
        if ok.any():
            kept.append(ypath[ok])
            accepted += int(ok.sum())
    if accepted < target_accepted:
        raise ConditioningFailedError(accepted, attempts)
    paths = np.concatenate(kept, axis=0)
    return ConditionedSample(times, paths, epsilon, attempts, accepted)


def conditioned_terminal_coupled(
    spec: FellerSpec,
    y0: float,
    epsilon: float,
    dt: float,
    t_end: float,
    key: StreamKey,
    target_accepted: int,
    max_attempts: int = 10_000_000,
    batch: int = 120_000,
) -> dict:
    """Band-conditioned terminal frequencies with a coupled WF control.

    The frequency Y = Z1/(Z1+Z2) of the critical pair is driven by the
    Brownian motion W = ((1-Y)sqrt(Z1) dW1 - Y sqrt(Z2) dW2) / sqrt(Y(1-Y)T),
    which is orthogonal to the total-mass noise (sqrt(Z1)dW1 +
    sqrt(Z2)dW2)/sqrt(T) -- exactly so per Euler step, since the two unit
    coefficient vectors have zero dot product.  Advancing a Wright-Fisher
    state X with the same W therefore yields an exact WF(beta) sample that
    is independent of the acceptance event yet pathwise close to Y, so the
    two-sample KS between accepted Y and accepted X estimates the law
    discrepancy of the epsilon-band conditioning with far less noise than
    an independent WF sample would allow.

    Returns terminal arrays (trimmed to target_accepted) plus attempt
    bookkeeping.
    """
    if not 0.0 < epsilon:
        raise ValueError("epsilon must be > 0")
    if not 0.0 < y0 < 1.0:
        raise ValueError("y0 must lie in (0,1)")
    _require_critical(spec)
    steps = _em_grid(dt, t_end).size - 1
    beta = spec.beta
    rng = key.generator()
    kept_y: list[np.ndarray] = []
    kept_x: list[np.ndarray] = []
    attempts = 0
    accepted = 0
    while accepted < target_accepted and attempts < max_attempts:
        n = min(batch, max_attempts - attempts)
        z1 = np.full(n, float(y0))
        z2 = np.full(n, 1.0 - float(y0))
        x = np.full(n, float(y0))
        ok = np.ones(n, dtype=bool)
        for _ in range(steps):
            g1 = rng.standard_normal(n)
            g2 = rng.standard_normal(n)
            total = z1 + z2
            with np.errstate(invalid="ignore", divide="ignore"):
                y = np.where(total > 0, z1 / np.maximum(total, 1e-300), 0.5)
            num = (1.0 - y) * np.sqrt(z1) * g1 - y * np.sqrt(z2) * g2
            den = np.sqrt(np.maximum(y * (1.0 - y) * total, 0.0))
            xi = np.where(den > 1e-12, num / np.maximum(den, 1e-12), g1)
            x = np.clip(x + np.sqrt(2.0 * beta * np.maximum(x * (1.0 - x), 0.0) * dt) * xi,
                        0.0, 1.0)
            z1 = _feller_em_step(z1, 0.0, beta, dt, g1)
            z2 = _feller_em_step(z2, 0.0, beta, dt, g2)
            ok &= np.abs(z1 + z2 - 1.0) <= epsilon
        attempts += n
        if ok.any():
            total = z1[ok] + z2[ok]
            kept_y.append(z1[ok] / total)
            kept_x.append(x[ok])
            accepted += int(ok.sum())
    if accepted < target_accepted:
        raise ConditioningFailedError(accepted, attempts)
    return {
        "terminal": np.concatenate(kept_y)[:target_accepted],
        "wf_coupled": np.concatenate(kept_x)[:target_accepted],
        "attempts": attempts,
        "accepted": accepted,
        "acceptance_rate": accepted / attempts,
        "epsilon": epsilon,
    }
