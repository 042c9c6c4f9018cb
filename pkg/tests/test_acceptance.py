"""End-to-end acceptance checks with pinned parameters and tolerances.

Each criterion prints one PASS/FAIL line (written straight to the real
stdout so it also shows under pytest capture) and then asserts both the
verdict and its wall-clock budget.
"""

import contextlib
import copy
import sys
import time
from pathlib import Path

import pytest

from popkit import StreamKey
from popkit.cli import run_config
from popkit.experiments import run_experiment

ROOT_SEED = 20260401


def _key(n: int) -> StreamKey:
    return StreamKey(ROOT_SEED).child(n)


_CAPSYS = None


@pytest.fixture(autouse=True)
def _live_reporting(capsys):
    # lets _report bypass output capture so each criterion line always shows
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def _report(num: int, label: str, ok: bool, elapsed: float, budget: float, detail: str):
    line = (f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {label} "
            f"({elapsed:.1f}s / {budget:.0f}s budget)  {detail}")
    ctx = _CAPSYS.disabled() if _CAPSYS is not None else contextlib.nullcontext()
    with ctx:
        print(line, file=sys.stdout, flush=True)
    assert ok, f"criterion {num}: {detail}"
    assert elapsed < budget, f"criterion {num}: {elapsed:.1f}s exceeds {budget:.0f}s"


def test_criterion_01_pure_death_tv():
    t0 = time.perf_counter()
    r = run_experiment("pure_death_mc",
                       {"N": 50, "lam": 1.0, "t": 0.7, "replicates": 100_000,
                        "tv_tol": 0.02}, _key(1))
    tv = r.metrics["tv_distance"]
    _report(1, "pure death vs binomial law", tv < 0.02,
            time.perf_counter() - t0, 10, f"tv={tv:.4g} (< 0.02)")


def test_criterion_02_pure_birth_tv():
    t0 = time.perf_counter()
    r = run_experiment("pure_birth_mc",
                       {"N": 5, "lam": 1.0, "t": 0.5, "replicates": 100_000,
                        "tv_tol": 0.02}, _key(2))
    tv = r.metrics["tv_distance"]
    _report(2, "pure birth vs negative-binomial law", tv < 0.02,
            time.perf_counter() - t0, 10, f"tv={tv:.4g} (< 0.02)")


def test_criterion_03_logistic_jensen_gap():
    t0 = time.perf_counter()
    r = run_experiment("logistic_jensen",
                       {"lam": 1.0, "gamma": 0.02, "n0": 20,
                        "t_grid": [0.5, 1.0, 2.0, 4.0]}, _key(3))
    ok = r.metrics["mean_below_ode"] and r.metrics["dMdt_below_f"]
    _report(3, "stochastic mean strictly below logistic ODE", ok,
            time.perf_counter() - t0, 30,
            f"min(ode-mean)={r.metrics['min_ode_minus_mean']:.4g}, "
            f"min(f(M)-dM/dt)={r.metrics['min_f_minus_dMdt']:.4g} (both > 0)")


def test_criterion_04_feller_transform():
    t0 = time.perf_counter()
    r = run_experiment("feller_transform",
                       {"configs": [[0.0, 1.0], [0.5, 1.0], [-0.5, 2.0]],
                        "z0": 1.0, "t_grid": [0.5, 1.0],
                        "lam_grid": [0.25, 1.0, 4.0],
                        "riccati_tol": 1e-8}, _key(4))
    m = r.metrics
    ok = (m["worst_exact_dev_over_3se"] < 1.0 and m["worst_em_dev_over_3se"] < 1.0
          and m["max_riccati_error"] < 1e-8)
    _report(4, "branching-diffusion Laplace transform (both samplers)", ok,
            time.perf_counter() - t0, 60,
            f"exact dev/3se={m['worst_exact_dev_over_3se']:.3f}, "
            f"em dev/3se={m['worst_em_dev_over_3se']:.3f}, "
            f"riccati err={m['max_riccati_error']:.2e} (< 1e-8)")


def test_criterion_05_feller_extinction():
    t0 = time.perf_counter()
    r = run_experiment("feller_extinction",
                       {"alpha": 0.5, "z0": 1.0, "t": 2.0,
                        "beta_grid": [0.5, 1.0, 2.0, 4.0], "t_long": 50.0,
                        "mc_reps": 100_000}, _key(5))
    m = r.metrics
    ok = m["monotone_in_beta"] and m["monotone_in_t"] and m["limit_dev_over_3se"] < 1.0
    _report(5, "extinction monotone in beta with exp(-z0*alpha/beta) limit", ok,
            time.perf_counter() - t0, 60,
            f"ext={['%.4f' % e for e in m['extinction_by_beta']]}, "
            f"limit dev/3se={m['limit_dev_over_3se']:.3f}")


def test_criterion_06_wf_stationary():
    t0 = time.perf_counter()
    r = run_experiment("wf_stationary",
                       {"configs": [[0.5, 0.5, 1.0], [2.0, 1.0, 1.0]],
                        "n_chains": 2000, "samples_per_chain": 500,
                        "ks_tol": 0.02}, _key(6))
    n_samples = int(r.table["n_samples"][0])
    ok = r.metrics["worst_ks"] < 0.02 and n_samples >= 1_000_000
    _report(6, "Wright-Fisher occupancy vs Beta stationary law", ok,
            time.perf_counter() - t0, 120,
            f"worst KS={r.metrics['worst_ks']:.4g} (< 0.02) on "
            f"{n_samples} thinned samples per config")


def test_criterion_07_scaling_ladders():
    t0 = time.perf_counter()
    sizes = [50, 200, 800]
    details = []
    ok = True
    for sub, (name, params) in enumerate((
        ("lln_ladder", {"sizes": sizes, "lam": 1.0, "mu": 0.5}),
        ("nearly_critical_ladder",
         {"sizes": sizes, "beta": 1.0, "theta1": 1.0, "theta2": 0.5}),
        ("weak_mutation_ladder", {"sizes": sizes, "gamma1": 0.5, "gamma2": 0.5}),
    )):
        r = run_experiment(name, params, _key(70 + sub))
        ok &= bool(r.metrics["improves"])
        d = r.metrics["distance_by_N"]
        details.append(f"{name}: {d['50']:.4g} -> {d['800']:.4g} "
                       f"(improves={r.metrics['improves']})")
    _report(7, "three limit ladders improve with disjoint 99% intervals", ok,
            time.perf_counter() - t0, 600, "; ".join(details))


def test_criterion_08_load_identities():
    t0 = time.perf_counter()
    r = run_experiment("load_identities", {"tol": 1e-12}, _key(8))
    m = r.metrics
    ok = (m["telescoping_err"] < 1e-12 and m["immigration_err"] < 1e-12
          and m["regulation_err"] < 1e-12 and m["bound_holds"]
          and m["grid_points"] >= 100)
    _report(8, "load accounting identities to 1e-12 and -ln(p0) bound", ok,
            time.perf_counter() - t0, 5,
            f"telescoping={m['telescoping_err']:.2e}, "
            f"immigration={m['immigration_err']:.2e}, "
            f"regulation={m['regulation_err']:.2e}, "
            f"bound on {m['grid_points']} grid points")


def test_criterion_09_load_artifact_json():
    import json
    t0 = time.perf_counter()
    r = run_experiment("load_artifact", {}, _key(9))
    verdict = json.loads(json.dumps(r.summary(), default=float))
    found = verdict["metrics"]["artifact_found"]
    ok = found is True and verdict["metrics"]["best"]["excess_ratio"] > 1.0
    _report(9, "accounting-artifact search reported in JSON verdict", ok,
            time.perf_counter() - t0, 5,
            f"{verdict['metrics']['n_hits']} hits, best excess ratio "
            f"{verdict['metrics']['best']['excess_ratio']:.3g}")


def test_criterion_10_multilocus():
    t0 = time.perf_counter()
    r = run_experiment("multilocus",
                       {"L_grid": [1, 10, 100], "q0": 0.5, "k": 0.01,
                        "tol": 1e-9}, _key(10))
    m = r.metrics
    ok = m["additivity_err"] < 1e-9 and m["ratio_monotone_in_L"]
    _report(10, "multilocus additivity at L=100 and monotone peak-fitness ratio",
            ok, time.perf_counter() - t0, 5,
            f"additivity err={m['additivity_err']:.2e} (< 1e-9), "
            f"ratio monotone={m['ratio_monotone_in_L']}")


def test_criterion_11_frequency_bridges():
    t0 = time.perf_counter()
    tc = run_experiment("time_change_bridge",
                        {"s": 0.3, "replicates": 100_000, "ks_tol": 0.02},
                        _key(11))
    cond = run_experiment("conditioning_bridge",
                          {"eps_grid": [0.2, 0.05]}, _key(12))
    ks_by_eps = cond.metrics["ks_by_eps"]
    ok = tc.metrics["ks"] < 0.02 and ks_by_eps["0.05"] < ks_by_eps["0.2"]
    _report(11, "time-change and conditioning bridges to Wright-Fisher", ok,
            time.perf_counter() - t0, 300,
            f"time-change KS={tc.metrics['ks']:.4g} (< 0.02); conditioned KS "
            f"{ks_by_eps['0.2']:.4g} -> {ks_by_eps['0.05']:.4g} as eps 0.2 -> 0.05")


def test_criterion_12_generating_functions():
    t0 = time.perf_counter()
    pgf = run_experiment("pgf_closed_form", {"tol": 1e-12}, _key(13))
    gw = run_experiment("gw_to_feller",
                        {"sizes": [32, 128, 512], "lam_grid": [0.25, 1.0, 4.0]},
                        _key(14))
    d = gw.metrics["distance_by_N"]
    ok = (pgf.metrics["max_closed_form_error"] < 1e-12
          and pgf.metrics["max_semigroup_error"] < 1e-12
          and d["512"] < d["32"])
    _report(12, "generating-function closed form and rescaled iterates", ok,
            time.perf_counter() - t0, 60,
            f"closed-form err={pgf.metrics['max_closed_form_error']:.2e}, "
            f"semigroup err={pgf.metrics['max_semigroup_error']:.2e}, "
            f"transform dev {d['32']:.2e} -> {d['512']:.2e}")


def test_criterion_13_determinism(tmp_path):
    t0 = time.perf_counter()
    base = {
        "seed": 11,
        "experiments": [
            {"name": "pure_death_mc", "params": {"replicates": 50_000}},
            {"name": "time_change_bridge", "params": {"replicates": 20_000}},
            {"name": "load_identities", "params": {}},
        ],
    }
    blobs = []
    for run, jobs in (("a", 1), ("b", 4), ("c", 1)):
        cfg = copy.deepcopy(base)
        cfg["output_dir"] = str(tmp_path / run)
        run_config(cfg, jobs=jobs, figures=True, log=lambda *a: None)
        blobs.append({p.name: p.read_bytes()
                      for p in sorted(Path(cfg["output_dir"]).iterdir())})
    ok = blobs[0] == blobs[1] == blobs[2]
    names = sorted(blobs[0])
    _report(13, "byte-identical outputs across reruns and --jobs", ok,
            time.perf_counter() - t0, 120,
            f"{len(names)} files compared (csv/json/png), jobs 1 vs 4 vs rerun")
