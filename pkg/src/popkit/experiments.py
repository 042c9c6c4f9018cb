"""Experiment registry: every check in the package as a named, parameterised,
reproducible run emitting a table, metrics and a pass/fail verdict.

Each experiment is a pure function of (params, stream key); replicate work
is split into fixed chunks with derived child streams, so results are
byte-identical regardless of how many workers execute the chunks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import diffusions as df
from . import load as gl
from . import markov_jump as mj
from . import relations as rel
from . import scaling as sc
from .analysis import empirical_weights, ks_distance, mc_summary, tv_distance
from .streams import StreamKey

N_CHUNKS = 16  # fixed replicate chunking; independent of the worker count


def chunked_sample(sampler: Callable[[int, StreamKey], np.ndarray], n_total: int,
                   key: StreamKey, jobs: int = 1) -> np.ndarray:
    """Run ``sampler(n, key)`` over fixed chunks and concatenate in order."""
    sizes = [n_total // N_CHUNKS + (1 if i < n_total % N_CHUNKS else 0)
             for i in range(N_CHUNKS)]
    tasks = [(i, sizes[i]) for i in range(N_CHUNKS) if sizes[i] > 0]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda t: sampler(t[1], key.child(t[0])), tasks))
    else:
        parts = [sampler(n, key.child(i)) for i, n in tasks]
    return np.concatenate(parts)


@dataclass
class ExperimentResult:
    name: str
    params: dict
    metrics: dict
    tolerances: dict
    passed: bool
    table: dict = field(default_factory=dict)  # column name -> sequence
    plot: dict | None = None

    def summary(self) -> dict:
        return {
            "experiment": self.name,
            "params": self.params,
            "metrics": self.metrics,
            "tolerances": self.tolerances,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    params: dict  # name -> {"type": ..., "default": ...}
    fn: Callable[[dict, StreamKey, int], ExperimentResult]

    def run(self, params: dict, key: StreamKey, jobs: int = 1) -> ExperimentResult:
        merged = {k: v["default"] for k, v in self.params.items()}
        for k, v in params.items():
            if k not in self.params:
                raise KeyError(f"unknown parameter {k!r} for experiment {self.name!r}")
            merged[k] = _coerce(v, self.params[k]["type"], k)
        return self.fn(merged, key, jobs)

    def schema(self) -> dict:
        return {
            "description": self.description,
            "params": {k: {"type": v["type"], "default": v["default"]}
                       for k, v in self.params.items()},
        }


def _coerce(value, typ: str, name: str):
    try:
        if typ == "int":
            if isinstance(value, float) and value != int(value):
                raise ValueError
            return int(value)
        if typ == "float":
            return float(value)
        if typ == "list":
            if not isinstance(value, (list, tuple)):
                raise ValueError
            return list(value)
        if typ == "str":
            return str(value)
    except (TypeError, ValueError):
        pass
    if typ in ("int", "float", "list", "str"):
        raise ValueError(f"parameter {name!r} must be of type {typ}")
    raise ValueError(f"unknown parameter type {typ!r}")


REGISTRY: dict[str, Experiment] = {}


def register(name, description, params):
    def deco(fn):
        REGISTRY[name] = Experiment(name, description, params, fn)
        return fn
    return deco


def get(name: str) -> Experiment:
    if name not in REGISTRY:
        raise KeyError(f"unknown experiment {name!r}; see list-experiments")
    return REGISTRY[name]


def run_experiment(name: str, params: dict, key: StreamKey, jobs: int = 1) -> ExperimentResult:
    return get(name).run(params, key, jobs)


# ---------------------------------------------------------------------------
# markov_jump experiments


@register(
    "pure_death_mc",
    "Monte Carlo replicates of the pure linear death chain against the "
    "closed-form binomial law (TV distance).",
    {
        "N": {"type": "int", "default": 50},
        "lam": {"type": "float", "default": 1.0},
        "t": {"type": "float", "default": 0.7},
        "replicates": {"type": "int", "default": 100_000},
        "tv_tol": {"type": "float", "default": 0.02},
    },
)
def _pure_death_mc(p, key, jobs):
    spec = mj.BirthDeathSpec((), (0.0, p["lam"]))
    term = chunked_sample(
        lambda n, k: mj.sample_bd_terminal(spec, p["N"], p["t"], n, k),
        p["replicates"], key, jobs)
    law = mj.pure_death_law(p["N"], p["lam"], p["t"])
    emp = empirical_weights(term, p["N"])
    tv = tv_distance(emp, law)
    states = np.arange(p["N"] + 1)
    return ExperimentResult(
        "pure_death_mc", p,
        metrics={"tv_distance": tv, "replicates": p["replicates"]},
        tolerances={"tv_tol": p["tv_tol"]},
        passed=tv < p["tv_tol"],
        table={"state": states, "probability": law.weights, "empirical": emp},
        plot={"kind": "dist_compare", "x": states, "series":
              {"closed form": law.weights, "empirical": emp},
              "xlabel": "survivors", "title": "pure death law"},
    )


@register(
    "pure_birth_mc",
    "Monte Carlo replicates of the pure linear birth chain against the "
    "closed-form negative binomial law (TV distance).",
    {
        "N": {"type": "int", "default": 5},
        "lam": {"type": "float", "default": 1.0},
        "t": {"type": "float", "default": 0.5},
        "replicates": {"type": "int", "default": 100_000},
        "tv_tol": {"type": "float", "default": 0.02},
    },
)
def _pure_birth_mc(p, key, jobs):
    spec = mj.BirthDeathSpec((0.0, p["lam"]), ())
    term = chunked_sample(
        lambda n, k: mj.sample_bd_terminal(spec, p["N"], p["t"], n, k),
        p["replicates"], key, jobs)
    n_max = int(max(term.max(), 1))
    law = mj.pure_birth_law(p["N"], p["lam"], p["t"], n_max=n_max)
    emp = empirical_weights(term, n_max)
    tv = tv_distance(emp, law)
    states = np.arange(n_max + 1)
    return ExperimentResult(
        "pure_birth_mc", p,
        metrics={"tv_distance": tv, "replicates": p["replicates"]},
        tolerances={"tv_tol": p["tv_tol"]},
        passed=tv < p["tv_tol"],
        table={"state": states, "probability": law.weights, "empirical": emp},
        plot={"kind": "dist_compare", "x": states, "series":
              {"closed form": law.weights, "empirical": emp},
              "xlabel": "population size", "title": "pure birth law"},
    )


@register(
    "logistic_jensen",
    "Moment ordering for the logistic chain: the KFE mean stays strictly "
    "below the deterministic logistic solution, and dM/dt < f(M) wherever "
    "the variance is positive.",
    {
        "lam": {"type": "float", "default": 1.0},
        "gamma": {"type": "float", "default": 0.02},
        "n0": {"type": "int", "default": 20},
        "t_grid": {"type": "list", "default": [0.5, 1.0, 2.0, 4.0]},
        "n_max": {"type": "int", "default": 220},
    },
)
def _logistic_jensen(p, key, jobs):
    spec = mj.logistic_bd(p["lam"], p["gamma"])
    gap = mj.jensen_gap(spec, p["n0"], p["t_grid"], p["n_max"])
    ode = mj.logistic_ode(p["lam"], p["gamma"], float(p["n0"]), gap["t"])
    mean_below = bool(np.all(gap["mean"] < ode))
    deriv_below = bool(np.all(gap["dM_dt"][gap["variance"] > 0]
                              < gap["f_of_mean"][gap["variance"] > 0]))
    return ExperimentResult(
        "logistic_jensen", p,
        metrics={
            "min_ode_minus_mean": float(np.min(ode - gap["mean"])),
            "min_f_minus_dMdt": float(np.min(gap["f_of_mean"] - gap["dM_dt"])),
            "mean_below_ode": mean_below,
            "dMdt_below_f": deriv_below,
        },
        tolerances={"strict": 0.0},
        passed=mean_below and deriv_below,
        table={"t": gap["t"], "kfe_mean": gap["mean"], "logistic_ode": ode,
               "f_of_mean": gap["f_of_mean"], "dM_dt": gap["dM_dt"],
               "variance": gap["variance"]},
        plot={"kind": "lines", "x": gap["t"], "series":
              {"KFE mean": gap["mean"], "logistic ODE": ode},
              "xlabel": "t", "title": "Jensen ordering (logistic)"},
    )


# ---------------------------------------------------------------------------
# diffusion experiments


@register(
    "feller_transform",
    "Laplace-transform identity for both branching-diffusion samplers "
    "against the closed-form transform, plus the Riccati closed-form check.",
    {
        "configs": {"type": "list", "default": [[0.0, 1.0], [0.5, 1.0], [-0.5, 2.0]]},
        "z0": {"type": "float", "default": 1.0},
        "t_grid": {"type": "list", "default": [0.5, 1.0]},
        "lam_grid": {"type": "list", "default": [0.25, 1.0, 4.0]},
        "exact_reps": {"type": "int", "default": 100_000},
        "em_reps": {"type": "int", "default": 20_000},
        "em_dt": {"type": "float", "default": 4e-4},
        "riccati_tol": {"type": "float", "default": 1e-8},
    },
)
def _feller_transform(p, key, jobs):
    rows = {k: [] for k in ("alpha", "beta", "t", "lam", "target", "exact_mean",
                            "exact_3se", "em_mean", "em_3se", "riccati_err")}
    worst_exact = worst_em = 0.0
    max_ric = 0.0
    child = 0
    for alpha, beta in p["configs"]:
        spec = df.FellerSpec(alpha, beta)
        for t in p["t_grid"]:
            exact = chunked_sample(
                lambda n, k: df.sample_feller_exact(spec, p["z0"], t, k, n),
                p["exact_reps"], key.child(child), jobs)
            em = chunked_sample(
                lambda n, k: df.sample_feller_em_terminal(spec, p["z0"], p["em_dt"], t, n, k),
                p["em_reps"], key.child(child + 1), jobs)
            child += 2
            for lam in p["lam_grid"]:
                target = df.feller_laplace(spec, p["z0"], t, lam)
                s_ex = mc_summary(np.exp(-lam * exact))
                s_em = mc_summary(np.exp(-lam * em))
                ric = abs(df.feller_u_closed_form(spec, t, lam)
                          - df.riccati_u_numeric(spec, t, lam))
                max_ric = max(max_ric, ric)
                dev_ex = abs(s_ex.mean - target) / (3 * s_ex.stderr)
                dev_em = abs(s_em.mean - target) / (3 * s_em.stderr)
                worst_exact = max(worst_exact, dev_ex)
                worst_em = max(worst_em, dev_em)
                for col, val in zip(rows, (alpha, beta, t, lam, target, s_ex.mean,
                                           3 * s_ex.stderr, s_em.mean,
                                           3 * s_em.stderr, ric)):
                    rows[col].append(val)
    passed = worst_exact < 1.0 and worst_em < 1.0 and max_ric < p["riccati_tol"]
    return ExperimentResult(
        "feller_transform", p,
        metrics={"worst_exact_dev_over_3se": worst_exact,
                 "worst_em_dev_over_3se": worst_em,
                 "max_riccati_error": max_ric},
        tolerances={"dev_over_3se": 1.0, "riccati_tol": p["riccati_tol"]},
        passed=passed,
        table={k: np.array(v) for k, v in rows.items()},
        plot={"kind": "transform", "table_cols": ("lam", "target", "exact_mean", "em_mean")},
    )


@register(
    "feller_extinction",
    "Extinction probability: monotone increasing in the fluctuation "
    "coefficient, nondecreasing in time, and the long-horizon limit "
    "exp(-z0*alpha/beta) confirmed by the exact sampler.",
    {
        "alpha": {"type": "float", "default": 0.5},
        "z0": {"type": "float", "default": 1.0},
        "t": {"type": "float", "default": 2.0},
        "beta_grid": {"type": "list", "default": [0.5, 1.0, 2.0, 4.0]},
        "t_long": {"type": "float", "default": 50.0},
        "mc_reps": {"type": "int", "default": 100_000},
    },
)
def _feller_extinction(p, key, jobs):
    betas = np.array(p["beta_grid"], dtype=float)
    ext = np.array([df.feller_extinction(df.FellerSpec(p["alpha"], b), p["z0"], p["t"])
                    for b in betas])
    mono_beta = bool(np.all(np.diff(ext) > 0))
    t_grid = np.array([0.5, 1.0, 2.0, 4.0, 8.0]) * p["t"]
    ext_t = np.array([df.feller_extinction(df.FellerSpec(p["alpha"], betas[1]), p["z0"], tv)
                      for tv in t_grid])
    mono_t = bool(np.all(np.diff(ext_t) >= 0))
    spec = df.FellerSpec(p["alpha"], betas[1])
    term = chunked_sample(
        lambda n, k: df.sample_feller_exact(spec, p["z0"], p["t_long"], k, n),
        p["mc_reps"], key, jobs)
    p_hat = float(np.mean(term == 0.0))
    limit = df.feller_extinction_limit(spec, p["z0"])
    se = np.sqrt(max(p_hat * (1 - p_hat), 1e-12) / term.size)
    limit_ok = abs(p_hat - limit) < 3 * se
    return ExperimentResult(
        "feller_extinction", p,
        metrics={"extinction_by_beta": ext.tolist(), "monotone_in_beta": mono_beta,
                 "monotone_in_t": mono_t, "mc_extinction_t_long": p_hat,
                 "limit": limit, "limit_dev_over_3se": float(abs(p_hat - limit) / (3 * se))},
        tolerances={"dev_over_3se": 1.0},
        passed=mono_beta and mono_t and limit_ok,
        table={"beta": betas, "extinction": ext},
        plot={"kind": "lines", "x": betas, "series": {"P(extinct by t)": ext},
              "xlabel": "beta", "title": "extinction vs fluctuation coefficient"},
    )


@register(
    "wf_stationary",
    "Wright-Fisher occupancy against the stationary Beta law "
    "(one-sample KS on post-burn-in thinned samples).",
    {
        "configs": {"type": "list", "default": [[0.5, 0.5, 1.0], [2.0, 1.0, 1.0]]},
        "y0": {"type": "float", "default": 0.5},
        "dt": {"type": "float", "default": 4e-4},
        "burn_in": {"type": "float", "default": 4.0},
        "n_chains": {"type": "int", "default": 2000},
        "samples_per_chain": {"type": "int", "default": 500},
        "thin": {"type": "float", "default": 0.05},
        "ks_tol": {"type": "float", "default": 0.02},
    },
)
def _wf_stationary(p, key, jobs):
    rows = {"gamma1": [], "gamma2": [], "beta": [], "ks": [], "n_samples": []}
    worst = 0.0
    sample0 = None
    spec0 = None
    for i, (g1, g2, beta) in enumerate(p["configs"]):
        spec = df.WrightFisherSpec(g1, g2, beta)
        sample = df.wf_occupancy_sample(
            spec, p["y0"], p["dt"], p["burn_in"], p["n_chains"],
            p["samples_per_chain"], p["thin"], key.child(i))
        ks = ks_distance(lambda x: df.wf_stationary_cdf(spec, x), sample)
        worst = max(worst, ks)
        for col, val in zip(rows, (g1, g2, beta, ks, sample.size)):
            rows[col].append(val)
        if i == 0:
            sample0, spec0 = sample, spec
    xs = np.linspace(1e-3, 1 - 1e-3, 400)
    return ExperimentResult(
        "wf_stationary", p,
        metrics={"worst_ks": worst, "ks_by_config": rows["ks"]},
        tolerances={"ks_tol": p["ks_tol"]},
        passed=worst < p["ks_tol"],
        table={k: np.array(v) for k, v in rows.items()},
        plot={"kind": "hist_density", "sample": sample0, "x": xs,
              "density": df.wf_stationary_density(spec0, xs),
              "xlabel": "allele frequency", "title": "WF occupancy vs Beta law"},
    )


# ---------------------------------------------------------------------------
# scaling-limit ladders


def _ladder_result(name, p, report: sc.LadderReport, extra_metrics=None):
    table = {k: np.array([r[k] for r in report.rows])
             for k in ("N", "value", "stderr", "ci99_lo", "ci99_hi")}
    metrics = {
        "distance_by_N": {str(r["N"]): r["value"] for r in report.rows},
        "improves": report.improves,
    }
    if extra_metrics:
        metrics.update(extra_metrics)
    return ExperimentResult(
        name, p, metrics=metrics, tolerances={"largest_below_smallest": True},
        passed=report.improves, table=table,
        plot={"kind": "ladder", "N": table["N"], "value": table["value"],
              "lo": table["ci99_lo"], "hi": table["ci99_hi"],
              "ylabel": report.metric, "title": name},
    )


_LADDER_PARAMS = {
    "sizes": {"type": "list", "default": [50, 200, 800]},
    "replicates": {"type": "int", "default": 2000},
    "t": {"type": "float", "default": 0.5},
}


@register(
    "lln_ladder",
    "Law of large numbers: K_N(t)/N approaches the exponential ODE solution "
    "as N grows.",
    {**_LADDER_PARAMS,
     "lam": {"type": "float", "default": 1.0},
     "mu": {"type": "float", "default": 0.5}},
)
def _lln_ladder(p, key, jobs):
    ladder = sc.LimitLadder(tuple(p["sizes"]), p["replicates"], p["t"], "linear ODE")
    report = sc.lln_check(p["lam"], p["mu"], ladder, key)
    return _ladder_result("lln_ladder", p, report)


@register(
    "nearly_critical_ladder",
    "Nearly-critical diffusion limit: K_N(Nt)/N approaches the branching "
    "diffusion transition law (one-sample KS).",
    {**_LADDER_PARAMS,
     "replicates": {"type": "int", "default": 800_000},
     "beta": {"type": "float", "default": 1.0},
     "theta1": {"type": "float", "default": 1.0},
     "theta2": {"type": "float", "default": 0.5}},
)
def _nearly_critical_ladder(p, key, jobs):
    ladder = sc.LimitLadder(tuple(p["sizes"]), p["replicates"], p["t"], "Feller diffusion")
    report = sc.nearly_critical_check(p["beta"], p["theta1"], p["theta2"], ladder, key)
    return _ladder_result("nearly_critical_ladder", p, report)


@register(
    "weak_mutation_ladder",
    "Weak-mutation limit: the Wright-Fisher chain frequency after "
    "floor(Nt) generations approaches the Wright-Fisher diffusion "
    "(two-sample KS).",
    {**_LADDER_PARAMS,
     "gamma1": {"type": "float", "default": 0.5},
     "gamma2": {"type": "float", "default": 0.5},
     "replicates": {"type": "int", "default": 100_000},
     "y0": {"type": "float", "default": 0.5},
     "n_ref": {"type": "int", "default": 400_000}},
)
def _weak_mutation_ladder(p, key, jobs):
    ladder = sc.LimitLadder(tuple(p["sizes"]), p["replicates"], p["t"], "WF diffusion")
    report = sc.weak_mutation_check(p["gamma1"], p["gamma2"], ladder, key,
                                    y0=p["y0"], n_ref=p["n_ref"])
    return _ladder_result("weak_mutation_ladder", p, report)


@register(
    "strong_mutation",
    "Strong-mutation regime: concentration at the mutation equilibrium with "
    "Gaussian fluctuations (Anderson-Darling at 1%).",
    {
        "sizes": {"type": "list", "default": [100, 400, 1600]},
        "replicates": {"type": "int", "default": 2000},
        "gamma1": {"type": "float", "default": 2.0},
        "gamma2": {"type": "float", "default": 1.0},
    },
)
def _strong_mutation(p, key, jobs):
    ladder = sc.LimitLadder(tuple(p["sizes"]), p["replicates"], 1.0, "OU limit")
    out = sc.strong_mutation_check(p["gamma1"], p["gamma2"], ladder, key)
    table = {k: np.array([r[k] for r in out["rows"]])
             for k in ("N", "epsilon", "mean_freq", "stderr", "scaled_fluct_var")}
    return ExperimentResult(
        "strong_mutation", p,
        metrics={"equilibrium": out["equilibrium"],
                 "ad_statistic": out["ad_statistic"],
                 "ad_critical_1pct": out["ad_critical_1pct"],
                 "normality_pass": out["normality_pass"],
                 "mean_within_3se": out["mean_within_3se"]},
        tolerances={"ad_level": 0.01},
        passed=out["normality_pass"] and out["mean_within_3se"],
        table=table,
        plot={"kind": "lines", "x": table["N"], "series":
              {"mean frequency": table["mean_freq"]},
              "xlabel": "N", "title": "strong mutation equilibrium",
              "hline": out["equilibrium"]},
    )


@register(
    "pgf_closed_form",
    "Generating-function iteration against the critical-geometric closed "
    "form and the semigroup property.",
    {
        "n_grid": {"type": "list", "default": [1, 2, 5, 10, 30, 64]},
        "s_grid": {"type": "list", "default": [0.0, 0.2, 0.5, 0.8, 0.95, 1.0]},
        "tol": {"type": "float", "default": 1e-12},
    },
)
def _pgf_closed_form(p, key, jobs):
    f = sc.critical_geometric_pgf()
    rows = {"n": [], "s": [], "iterate": [], "closed_form": [], "error": []}
    max_err = 0.0
    for n in p["n_grid"]:
        for s in p["s_grid"]:
            it = sc.pgf_iterate(f, n, s)
            cf = (n - (n - 1) * s) / (n + 1 - n * s)
            err = abs(it - cf)
            max_err = max(max_err, err)
            for col, val in zip(rows, (n, s, it, cf, err)):
                rows[col].append(val)
    semi_err = 0.0
    for s in p["s_grid"]:
        semi_err = max(semi_err, abs(sc.pgf_iterate(f, 12, s)
                                     - sc.pgf_iterate(f, 5, sc.pgf_iterate(f, 7, s))))
    passed = max_err < p["tol"] and semi_err < p["tol"]
    return ExperimentResult(
        "pgf_closed_form", p,
        metrics={"max_closed_form_error": max_err, "max_semigroup_error": semi_err},
        tolerances={"tol": p["tol"]},
        passed=passed,
        table={k: np.array(v) for k, v in rows.items()},
        plot=None,
    )


@register(
    "gw_to_feller",
    "Rescaled Galton-Watson generating-function iterates against the "
    "branching-diffusion Laplace transform along a size ladder.",
    {
        "sizes": {"type": "list", "default": [32, 128, 512]},
        "t": {"type": "float", "default": 1.0},
        "lam_grid": {"type": "list", "default": [0.25, 1.0, 4.0]},
    },
)
def _gw_to_feller(p, key, jobs):
    f = sc.critical_geometric_pgf()
    ladder = sc.LimitLadder(tuple(p["sizes"]), 1, p["t"], "Feller transform")
    report = sc.gw_to_feller_check(f, ladder, p["lam_grid"])
    return _ladder_result("gw_to_feller", p, report,
                          extra_metrics={"offspring_variance": f.variance(),
                                         "matched_beta": f.variance() / 2.0})


# ---------------------------------------------------------------------------
# bridge experiments


@register(
    "time_change_bridge",
    "Frequency of two critical branching diffusions under the intrinsic "
    "clock ds = dt/total against a direct Wright-Fisher simulation "
    "(two-sample KS).",
    {
        "beta": {"type": "float", "default": 1.0},
        "z1_0": {"type": "float", "default": 0.5},
        "z2_0": {"type": "float", "default": 0.5},
        "s": {"type": "float", "default": 0.3},
        "dt": {"type": "float", "default": 5e-4},
        "replicates": {"type": "int", "default": 100_000},
        "ks_tol": {"type": "float", "default": 0.02},
    },
)
def _time_change_bridge(p, key, jobs):
    spec = df.FellerSpec(0.0, p["beta"])
    y0 = p["z1_0"] / (p["z1_0"] + p["z2_0"])
    tc = chunked_sample(
        lambda n, k: rel.sample_time_changed_terminal(
            spec, p["z1_0"], p["z2_0"], p["dt"], [p["s"]], n, k)[-1],
        p["replicates"], key.child(0), jobs)
    wf_spec = df.WrightFisherSpec(0.0, 0.0, p["beta"])
    wf = chunked_sample(
        lambda n, k: df.sample_wf_terminal(wf_spec, y0, p["dt"], p["s"], n, k),
        p["replicates"], key.child(1), jobs)
    ks = ks_distance(tc, wf)
    return ExperimentResult(
        "time_change_bridge", p,
        metrics={"ks": ks, "mean_time_changed": float(tc.mean()),
                 "mean_wf": float(wf.mean())},
        tolerances={"ks_tol": p["ks_tol"]},
        passed=ks < p["ks_tol"],
        table={"quantile": np.linspace(0, 1, 101),
               "time_changed": np.quantile(tc, np.linspace(0, 1, 101)),
               "wright_fisher": np.quantile(wf, np.linspace(0, 1, 101))},
        plot={"kind": "qq", "a": tc, "b": wf,
              "labels": ("time-changed frequency", "Wright-Fisher"),
              "title": "time-change bridge"},
    )


@register(
    "conditioning_bridge",
    "Frequency of a branching pair conditioned (epsilon-band rejection) to "
    "near-constant total mass: KS to the Wright-Fisher diffusion improves "
    "as the band shrinks.  Uses a WF sample coupled through the frequency "
    "noise (orthogonal to the accept/reject noise) so the small band effect "
    "is resolvable.",
    {
        "beta": {"type": "float", "default": 0.02},
        "y0": {"type": "float", "default": 0.5},
        "t_end": {"type": "float", "default": 0.2},
        "dt": {"type": "float", "default": 1e-3},
        "eps_grid": {"type": "list", "default": [0.2, 0.05]},
        "target_accepted": {"type": "int", "default": 40_000},
        "max_attempts": {"type": "int", "default": 10_000_000},
    },
)
def _conditioning_bridge(p, key, jobs):
    spec = df.FellerSpec(0.0, p["beta"])
    rows = {"epsilon": [], "accepted": [], "attempts": [], "acceptance_rate": [], "ks": []}
    ks_by_eps = []
    for i, eps in enumerate(p["eps_grid"]):
        out = rel.conditioned_terminal_coupled(
            spec, p["y0"], eps, p["dt"], p["t_end"], key.child(1 + i),
            target_accepted=p["target_accepted"], max_attempts=p["max_attempts"])
        ks = ks_distance(out["wf_coupled"], out["terminal"])
        ks_by_eps.append(ks)
        for col, val in zip(rows, (eps, out["accepted"], out["attempts"],
                                   out["acceptance_rate"], ks)):
            rows[col].append(val)
    improves = all(ks_by_eps[i + 1] < ks_by_eps[i] for i in range(len(ks_by_eps) - 1))
    return ExperimentResult(
        "conditioning_bridge", p,
        metrics={"ks_by_eps": dict(zip(map(str, p["eps_grid"]), ks_by_eps)),
                 "acceptance_rates": rows["acceptance_rate"],
                 "improves": improves},
        tolerances={"ks_improves": True},
        passed=improves,
        table={k: np.array(v) for k, v in rows.items()},
        plot={"kind": "lines", "x": np.array(rows["epsilon"]),
              "series": {"KS to WF": np.array(rows["ks"])},
              "xlabel": "epsilon", "title": "conditioning bridge"},
    )


# ---------------------------------------------------------------------------
# genetic-load experiments


@register(
    "load_identities",
    "Exact arithmetic identities of the load accounting: telescoping "
    "absolute loss, the immigration identity, frequency invariance under "
    "regulation, and the D <= -ln(p0) bound on a parameter grid.",
    {
        "q0_grid": {"type": "list", "default": [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95,
                                                0.99, 0.999, 0.9999]},
        "k_grid": {"type": "list", "default": [0.005, 0.01, 0.05, 0.1, 0.2, 0.3,
                                               0.5, 0.7, 0.9, 0.99]},
        "M": {"type": "int", "default": 200},
        "tol": {"type": "float", "default": 1e-12},
    },
)
def _load_identities(p, key, jobs):
    tele_err = immi_err = reg_err = 0.0
    bound_ok = True
    rows = {"q0": [], "k": [], "D_inf": [], "bound": []}
    f = gl.beverton_holt(0.01)
    for q0 in p["q0_grid"]:
        for k in p["k_grid"]:
            sc_ = gl.LoadScenario(mu=1.0, k=k, N0=(1 - q0) * 100, N0p=q0 * 100)
            # telescoping
            loss = gl.absolute_loss(sc_, p["M"])
            NpM = sc_.N0p * (1 - k) ** p["M"]
            tele_err = max(tele_err, abs(loss + NpM - sc_.N0p))
            # immigration identity
            res = gl.immigration_rescue(sc_, p["M"])
            partial = k * np.cumsum(gl.frequency_series(q0, k, p["M"]))[:-1]
            diff = np.abs(res["cumulative_immigrants"][1:] / res["total"] - partial)
            immi_err = max(immi_err, float(np.max(diff / np.maximum(1.0, np.abs(partial)))))
            # regulation invariance of the frequency series
            sc_reg = gl.LoadScenario(mu=1.2, k=k, N0=sc_.N0, N0p=sc_.N0p, regulation=f)
            reg = gl.regulated_trajectories(sc_reg, p["M"])
            reg_err = max(reg_err, float(np.max(np.abs(
                reg["q"] - gl.frequency_series(q0, k, p["M"])))))
            # Haldane bound
            D = gl.haldane_load(q0, k)
            bound = -np.log(1.0 - q0)
            bound_ok &= D <= bound + p["tol"]
            for col, val in zip(rows, (q0, k, D, bound)):
                rows[col].append(val)
    passed = (tele_err < p["tol"] and immi_err < p["tol"]
              and reg_err < p["tol"] and bound_ok)
    return ExperimentResult(
        "load_identities", p,
        metrics={"telescoping_err": tele_err, "immigration_err": immi_err,
                 "regulation_err": reg_err, "bound_holds": bound_ok,
                 "grid_points": len(rows["q0"])},
        tolerances={"tol": p["tol"]},
        passed=passed,
        table={k_: np.array(v) for k_, v in rows.items()},
        plot={"kind": "lines", "x": np.array(rows["q0"][: len(p["k_grid"])]),
              "series": {}, "xlabel": "q0", "title": "load bound",
              "scatter": (np.array(rows["D_inf"]), np.array(rows["bound"]))},
    )


@register(
    "load_artifact",
    "Search for configurations where Haldane's D times population size "
    "exceeds the number of a-individuals ever born.",
    {
        "q0_grid": {"type": "list", "default": [0.9, 0.99, 0.999, 0.9999]},
        "k_grid": {"type": "list", "default": [0.05, 0.1, 0.2, 0.3, 0.5]},
    },
)
def _load_artifact(p, key, jobs):
    out = gl.load_artifact_search(p["q0_grid"], p["k_grid"])
    hits = out["hits"]
    table = {k: np.array([h[k] for h in hits]) for k in
             ("q0", "k", "D", "population_size", "haldane_individuals",
              "a_ever_born", "excess_ratio")} if hits else {}
    return ExperimentResult(
        "load_artifact", p,
        metrics={"artifact_found": out["artifact_found"],
                 "n_hits": len(hits), "best": out["best"]},
        tolerances={"artifact_found": True},
        passed=out["artifact_found"],
        table=table,
        plot=None,
    )


@register(
    "multilocus",
    "Additivity of the load and growth of the peak fitness ratio under "
    "multiplicative fitness across independent loci.",
    {
        "L_grid": {"type": "list", "default": [1, 10, 100]},
        "q0": {"type": "float", "default": 0.5},
        "k": {"type": "float", "default": 0.01},
        "tol": {"type": "float", "default": 1e-9},
    },
)
def _multilocus(p, key, jobs):
    single = gl.haldane_load(p["q0"], p["k"])
    rows = {"L": [], "D_total": [], "log10_peak_fitness_ratio": []}
    add_err = 0.0
    for L in p["L_grid"]:
        res = gl.multilocus_load([(p["q0"], p["k"])] * L)
        add_err = max(add_err, abs(res["total"] - L * single))
        for col, val in zip(rows, (L, res["total"], res["log10_peak_fitness_ratio"])):
            rows[col].append(val)
    ratios = np.array(rows["log10_peak_fitness_ratio"])
    mono = bool(np.all(np.diff(ratios) > 0))
    passed = add_err < p["tol"] and mono
    return ExperimentResult(
        "multilocus", p,
        metrics={"additivity_err": add_err, "ratio_monotone_in_L": mono,
                 "single_locus_D": single},
        tolerances={"tol": p["tol"]},
        passed=passed,
        table={k: np.array(v) for k, v in rows.items()},
        plot={"kind": "lines", "x": np.array(rows["L"], dtype=float),
              "series": {"log10 peak fitness ratio": ratios},
              "xlabel": "loci", "title": "multiplicative-loci artifact"},
    )
