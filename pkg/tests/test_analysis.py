import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from popkit.analysis import (
    EmpiricalSample,
    bootstrap_ci,
    empirical_weights,
    ks_critical_value,
    ks_distance,
    mc_summary,
    tv_distance,
)


def test_empirical_sample_rejects_bad_input():
    with pytest.raises(ValueError):
        EmpiricalSample(np.array([]))
    with pytest.raises(ValueError):
        EmpiricalSample(np.array([1.0, np.nan]))


def test_mc_summary_known_values():
    s = mc_summary(np.array([1.0, 2.0, 3.0, 4.0]))
    assert s.mean == 2.5
    assert s.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert s.ci99[0] < 2.5 < s.ci99[1]


def test_ks_one_sample_matches_scipy_continuous():
    rng = np.random.default_rng(0)
    x = rng.normal(size=400)
    ours = ks_distance(stats.norm.cdf, x)
    theirs = stats.kstest(x, "norm").statistic
    assert ours == pytest.approx(theirs, abs=1e-12)


def test_ks_one_sample_with_atom():
    # law: mass 0.3 at 0, else Exp(1) scaled by 0.7
    cdf = lambda x: np.where(np.asarray(x) >= 0, 0.3 + 0.7 * (1 - np.exp(-np.asarray(x, float))), 0.0)
    rng = np.random.default_rng(1)
    u = rng.random(20000)
    x = np.where(u < 0.3, 0.0, rng.exponential(1.0, 20000))
    d = ks_distance(cdf, x, atoms={0.0: 0.3})
    assert d < 0.02
    # without declaring the atom the left-limit term misfires
    assert ks_distance(cdf, x) > 0.25


def test_ks_two_sample_matches_scipy():
    rng = np.random.default_rng(2)
    a = rng.normal(size=300)
    b = rng.normal(0.3, 1.0, size=500)
    ours = ks_distance(a, b)
    theirs = stats.ks_2samp(a, b).statistic
    assert ours == pytest.approx(theirs, abs=1e-12)


def test_ks_critical_value():
    # classic 1% asymptotic constant 1.628.../sqrt(n)
    assert ks_critical_value(100, 0.01) == pytest.approx(0.16276, abs=2e-4)


def test_tv_identical_and_disjoint():
    p = np.array([0.2, 0.8])
    assert tv_distance(p, p) == 0.0
    assert tv_distance(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0


def test_tv_counts_mass_defect():
    # truncated distributions missing different amounts of mass
    assert tv_distance(np.array([0.9]), np.array([0.9])) == 0.0
    assert tv_distance(np.array([0.9]), np.array([1.0])) == pytest.approx(0.1)


@settings(deadline=None, max_examples=50)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8),
       st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8))
def test_tv_symmetric_and_bounded(pw, qw):
    p = np.array(pw)
    q = np.array(qw)
    tot_p, tot_q = p.sum(), q.sum()
    if tot_p > 1 or tot_q > 1:
        p = p / max(tot_p, 1.0)
        q = q / max(tot_q, 1.0)
    assert tv_distance(p, q) == pytest.approx(tv_distance(q, p))
    assert -1e-12 <= tv_distance(p, q) <= 1.0 + 1e-12


def test_empirical_weights():
    w = empirical_weights(np.array([0, 1, 1, 3]), 3)
    assert np.allclose(w, [0.25, 0.5, 0.0, 0.25])
    assert w.sum() == pytest.approx(1.0)


def test_bootstrap_ci_contains_point_for_mean():
    rng = np.random.default_rng(3)
    x = rng.normal(5.0, 1.0, 2000)
    point, lo, hi = bootstrap_ci(x, np.mean, np.random.default_rng(4))
    assert lo < point < hi
    assert point == pytest.approx(5.0, abs=0.1)
    assert hi - lo < 0.3
