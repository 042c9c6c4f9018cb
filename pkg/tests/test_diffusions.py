import numpy as np
import pytest
from scipy import integrate, stats

from popkit.analysis import ks_distance, mc_summary
from popkit.diffusions import (
    FellerSpec,
    LogisticFellerSpec,
    LotkaVolterraSpec,
    WrightFisherSpec,
    feller_extinction,
    feller_extinction_limit,
    feller_laplace,
    feller_transition_cdf,
    feller_u_closed_form,
    lv_ode,
    riccati_u_numeric,
    sample_feller_em_terminal,
    sample_feller_exact,
    sample_lv_terminal,
    sample_ou_terminal,
    sample_wf_terminal,
    simulate_feller_em,
    simulate_wf,
    wf_occupancy_sample,
    wf_stationary_cdf,
    wf_stationary_density,
)
from popkit.streams import StreamKey


def test_spec_validation():
    with pytest.raises(ValueError):
        FellerSpec(0.0, -1.0)
    with pytest.raises(ValueError):
        WrightFisherSpec(-0.1, 0.0, 1.0)
    with pytest.raises(ValueError):
        LogisticFellerSpec(1.0, -0.1, 1.0)
    with pytest.raises(ValueError):
        LotkaVolterraSpec(1.0, 0.1, 1.0, 0.1, -1.0, 1.0)


# --- transform identities ---------------------------------------------------

def test_laplace_trivial_cases():
    spec = FellerSpec(0.3, 1.0)
    assert feller_laplace(spec, 1.0, 0.7, 0.0) == pytest.approx(1.0)
    assert feller_laplace(spec, 2.0, 1e-12, 1.5) == pytest.approx(np.exp(-1.5 * 2.0), rel=1e-8)


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (0.5, 1.0), (-0.5, 2.0)])
@pytest.mark.parametrize("lam", [0.25, 1.0, 4.0])
def test_u_closed_form_vs_riccati(alpha, beta, lam):
    spec = FellerSpec(alpha, beta)
    assert feller_u_closed_form(spec, 1.0, lam) == pytest.approx(
        riccati_u_numeric(spec, 1.0, lam), abs=1e-8)


def test_exact_sampler_matches_transform():
    spec = FellerSpec(0.5, 1.0)
    z = sample_feller_exact(spec, 1.0, 0.8, StreamKey(0), 50_000)
    s = mc_summary(np.exp(-z))
    target = feller_laplace(spec, 1.0, 0.8, 1.0)
    assert abs(s.mean - target) < 3 * s.stderr


def test_em_sampler_matches_transform():
    spec = FellerSpec(-0.5, 2.0)
    z = sample_feller_em_terminal(spec, 1.0, 5e-4, 0.5, 20_000, StreamKey(1))
    s = mc_summary(np.exp(-0.25 * z))
    target = feller_laplace(spec, 1.0, 0.5, 0.25)
    assert abs(s.mean - target) < 3.5 * s.stderr


def test_em_vs_exact_distribution():
    spec = FellerSpec(0.0, 1.0)
    em = sample_feller_em_terminal(spec, 1.0, 5e-4, 0.5, 20_000, StreamKey(2))
    cdf = lambda x: feller_transition_cdf(spec, 1.0, 0.5, x)
    atom = {0.0: feller_extinction(spec, 1.0, 0.5)}
    assert ks_distance(cdf, em, atoms=atom) < 0.03


def test_transition_cdf_consistent_with_exact_sampler():
    spec = FellerSpec(0.5, 1.5)
    z = sample_feller_exact(spec, 2.0, 1.0, StreamKey(3), 50_000)
    cdf = lambda x: feller_transition_cdf(spec, 2.0, 1.0, x)
    atom = {0.0: feller_extinction(spec, 2.0, 1.0)}
    assert ks_distance(cdf, z, atoms=atom) < 0.01


# --- extinction --------------------------------------------------------------

def test_extinction_increases_with_beta():
    probs = [feller_extinction(FellerSpec(0.5, b), 1.0, 2.0) for b in (0.5, 1, 2, 4)]
    assert np.all(np.diff(probs) > 0)


def test_extinction_limit_supercritical():
    spec = FellerSpec(0.5, 1.0)
    assert feller_extinction_limit(spec, 1.0) == pytest.approx(np.exp(-0.5))
    assert feller_extinction(spec, 1.0, 60.0) == pytest.approx(np.exp(-0.5), abs=1e-6)


def test_extinction_limit_critical_is_one():
    assert feller_extinction_limit(FellerSpec(0.0, 1.0), 1.0) == pytest.approx(1.0)


def test_extinction_matches_laplace_limit():
    # P(Z_t = 0) = lim_{lam->inf} E[exp(-lam Z_t)]
    spec = FellerSpec(0.2, 0.7)
    assert feller_extinction(spec, 1.3, 1.1) == pytest.approx(
        feller_laplace(spec, 1.3, 1.1, 1e9), rel=1e-6)


# --- Wright-Fisher -----------------------------------------------------------

def test_wf_stationary_density_is_beta():
    spec = WrightFisherSpec(2.0, 1.0, 1.0)
    xs = np.linspace(0.01, 0.99, 11)
    ref = stats.beta.pdf(xs, 1.0, 2.0)  # Beta(gamma2/beta, gamma1/beta)
    assert np.allclose(wf_stationary_density(spec, xs), ref, rtol=1e-12)
    total, _ = integrate.quad(lambda x: wf_stationary_density(spec, x), 0, 1)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_wf_occupancy_matches_stationary_law():
    spec = WrightFisherSpec(1.0, 2.0, 1.0)
    sample = wf_occupancy_sample(spec, 0.5, 1e-3, 3.0, 200, 200, 0.05, StreamKey(4))
    assert ks_distance(lambda x: wf_stationary_cdf(spec, x), sample) < 0.03


def test_wf_path_stays_in_unit_interval():
    path = simulate_wf(WrightFisherSpec(0.0, 0.0, 1.0), 0.5, 1e-3, 1.0, StreamKey(5))
    assert np.all((path.states >= 0) & (path.states <= 1))


def test_wf_martingale_without_mutation():
    term = sample_wf_terminal(WrightFisherSpec(0.0, 0.0, 1.0), 0.3, 1e-3, 0.5,
                              50_000, StreamKey(6))
    s = mc_summary(term)
    assert abs(s.mean - 0.3) < 3 * s.stderr


# --- auxiliary diffusions ----------------------------------------------------

def test_lv_means_track_ode_when_noise_small():
    spec = LotkaVolterraSpec(1.0, 0.1, 0.5, 0.05, 1e-4, 1e-4)
    term = sample_lv_terminal(spec, 5.0, 3.0, 1e-3, 2.0, 2000, StreamKey(7))
    ode = lv_ode(spec, 5.0, 3.0, [2.0])
    assert term[:, 0].mean() == pytest.approx(ode[0, 0], rel=0.05)
    assert term[:, 1].mean() == pytest.approx(ode[0, 1], rel=0.05)


def test_ou_exact_transition_moments():
    theta, sigma, x0, t = 1.5, 0.7, 2.0, 0.9
    x = sample_ou_terminal(theta, sigma, x0, 1e-3, t, 50_000, StreamKey(8), exact=True)
    mean = x0 * np.exp(-theta * t)
    var = sigma**2 * (1 - np.exp(-2 * theta * t)) / (2 * theta)
    assert x.mean() == pytest.approx(mean, abs=4 * np.sqrt(var / x.size))
    assert x.var() == pytest.approx(var, rel=0.05)


def test_feller_em_path_nonnegative():
    path = simulate_feller_em(FellerSpec(-1.0, 2.0), 0.5, 1e-3, 2.0, StreamKey(9))
    assert np.all(path.states >= 0)
