import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.stats import spearmanr

from ximsis.simgen import (
    PRESETS,
    SimScenario,
    calibrate_censoring,
    calibrated_bound,
    cox_time,
    gen_aft,
    gen_cox,
    gen_nonlinear,
    gen_transformation,
    generate,
    preset,
    sample_covariates,
    transformation_h,
    transformation_time,
)
from ximsis.survival import censoring_rate


class ZeroNoise:
    """Stand-in generator whose noise draws are all zero."""

    def standard_normal(self, size):
        return np.zeros(size)

    def standard_cauchy(self, size):
        return np.zeros(size)


def test_ar1_independent_when_rho_zero():
    n = 20000
    X = sample_covariates(n, 4, "ar1", 0.0, np.random.default_rng(0))
    c = np.cov(X, rowvar=False)
    assert abs(c[0, 1]) < 4 / np.sqrt(n)
    assert abs(c[2, 3]) < 4 / np.sqrt(n)


def test_ar1_lag_two_correlation():
    X = sample_covariates(50000, 3, "ar1", 0.6, np.random.default_rng(1))
    assert np.corrcoef(X[:, 0], X[:, 2])[0, 1] == pytest.approx(0.36, abs=0.02)


def test_cs_pairwise_correlation():
    X = sample_covariates(50000, 4, "cs", 0.5, np.random.default_rng(2))
    c = np.corrcoef(X, rowvar=False)
    assert np.all(np.abs(c[np.triu_indices(4, 1)] - 0.5) <= 0.02)


@pytest.mark.parametrize("cov, rho", [("ar1", 0.6), ("ar1", -0.4), ("cs", 0.5), ("cs", 0.2)])
def test_covariance_matrix_matches_target(cov, rho):
    X = sample_covariates(100000, 5, cov, rho, np.random.default_rng(3))
    i, j = np.indices((5, 5))
    target = rho ** np.abs(i - j) if cov == "ar1" else np.where(i == j, 1.0, rho)
    assert np.max(np.abs(np.corrcoef(X, rowvar=False) - target)) <= 0.02
    assert np.all(np.abs(X.var(axis=0) - 1) < 0.02)


def test_invalid_rho():
    with pytest.raises(ValueError):
        sample_covariates(3, 3, "ar1", 1.0, np.random.default_rng())
    with pytest.raises(ValueError):
        sample_covariates(3, 3, "cs", -0.2, np.random.default_rng())


def test_cox_null_mean():
    rng = np.random.default_rng(4)
    X = np.zeros((100000, 3))
    t = gen_cox(X, np.zeros(3), 0.5, rng)
    assert t.mean() == pytest.approx(2.0, abs=0.05)


def test_cox_fixed_draw():
    assert cox_time(0.5, 0.0, 0.5) == pytest.approx(1.3862943611198906, abs=1e-15)


def test_cox_sign_of_effect():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(10000, 5))
    beta = np.full(5, 0.35)
    t = gen_cox(X, beta, 0.5, rng)
    assert spearmanr(X @ beta, t).statistic < 0


def test_transformation_inverse():
    assert transformation_time(transformation_h(1.7)) == pytest.approx(1.7, abs=1e-12)
    assert transformation_time(0.0) == pytest.approx(0.5 * np.log(3), abs=1e-15)
    big = transformation_time(800.0)
    assert np.isfinite(big)
    assert big == pytest.approx(400 + np.log(2) / 2, abs=1e-9)


def test_transformation_zero_noise():
    X = np.array([[0.0, 0.0], [1.0, 0.0]])
    t = gen_transformation(X, np.array([1.0, 0.0]), ZeroNoise())
    assert t[0] == pytest.approx(0.5 * np.log(3))
    assert t[1] == pytest.approx(transformation_time(-1.0))


def test_aft_closed_forms():
    X = np.zeros((2, 7))
    X[1, 6] = 2.0
    t = gen_aft(X, ZeroNoise())
    assert t[0] == 1.0
    assert t[1] == pytest.approx(np.exp(4.0), rel=1e-15)


def test_nonlinear_zero_noise_and_moments():
    X = np.random.default_rng(6).normal(size=(5, 7))
    np.testing.assert_allclose(gen_nonlinear(X, ZeroNoise()), np.exp(1.5))
    log_t = np.log(gen_nonlinear(np.zeros((100000, 7)), np.random.default_rng(7)))
    assert np.median(log_t) == pytest.approx(1.5, abs=0.02)
    assert log_t.var() == pytest.approx(1.0, abs=0.05)


def test_latent_times_positive():
    for name in ("example1-n200-cr30", "example2-n200-cr20", "example3-n300-cr30", "example4-n300-cr20"):
        s = generate(preset(name, quick=True), 0)
        assert np.all(s.t_true > 0)
        assert np.all(s.resp.y > 0)


def test_calibration_degenerate_time():
    scen = SimScenario("cox", 10, 5, "ar1", 0.5, 0.5)
    c = calibrate_censoring(scen, np.random.default_rng(0), latent=np.ones(1000))
    # CR(c) = 1/c near c = 2, so |dc| <= tol * c^2
    assert c == pytest.approx(2.0, abs=0.005 * 4)


def test_calibration_exponential_time():
    root = brentq(lambda c: (1 - np.exp(-c)) / c - 0.5, 0.1, 10)
    assert root == pytest.approx(1.5936, abs=1e-4)
    scen = SimScenario("cox", 10, 5, "ar1", 0.5, 0.5)
    t = np.random.default_rng(1).exponential(size=200000)
    c = calibrate_censoring(scen, np.random.default_rng(0), latent=t)
    # slope of (1 - e^-c)/c at the root is about -0.23, so tol maps to ~0.03 in c
    assert c == pytest.approx(root, abs=0.04)


def test_calibration_unattainable():
    scen = SimScenario("cox", 10, 5, "ar1", 0.5, 0.5)
    with pytest.raises(ValueError, match="target CR unattainable"):
        calibrate_censoring(scen, np.random.default_rng(0), latent=np.full(100, 1e300), max_doublings=5)


def test_calibration_pilot_seed_stability():
    scen = preset("example1-n200-cr30")
    cs = [calibrate_censoring(scen, np.random.default_rng(s), pilot_n=50000) for s in range(4)]
    rng = np.random.default_rng(99)
    X = sample_covariates(200000, 5, "ar1", 0.6, rng)
    t = gen_cox(X, np.full(5, 0.35), 0.5, rng)
    crs = [np.mean(np.minimum(t, c)) / c for c in cs]
    assert np.mean(np.abs(np.array(crs) - 0.3)) < 2 * 0.005


def test_generate_deterministic():
    scen = preset("example2-n200-cr20", quick=True)
    a, b = generate(scen, 3), generate(scen, 3)
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.resp.y, b.resp.y)
    assert np.array_equal(a.resp.delta, b.resp.delta)
    assert not np.array_equal(a.X, generate(scen, 4).X)


def test_generate_observed_is_min():
    s = generate(preset("example3-n200-cr30", quick=True), 1)
    assert np.array_equal(s.resp.y, np.minimum(s.t_true, s.censor))
    assert np.array_equal(s.resp.delta, (s.t_true <= s.censor).astype(np.int8))


def test_example1_per_replication_censoring():
    scen = preset("example1-n200-cr30", quick=True)
    c = calibrated_bound(scen)
    for rep in range(20):
        assert 0.22 <= censoring_rate(generate(scen, rep, c_upper=c).resp) <= 0.38


def test_example1_realized_censoring_rate():
    scen = preset("example1-n200-cr30", quick=True)
    c = calibrated_bound(scen)
    rates = [censoring_rate(generate(scen, rep, c_upper=c).resp) for rep in range(500)]
    assert 0.28 <= np.mean(rates) <= 0.32


def test_active_sets():
    assert preset("example1-n200-cr30").active_set == (0, 1, 2, 3, 4)
    assert preset("example2-n200-cr20").active_set == (0, 1, 8, 9)
    assert preset("example3-n300-cr30").active_set == (0, 1, 6)
    assert preset("example4-n300-cr20").active_set == (0, 1, 6)


def test_scenario_validation():
    with pytest.raises(ValueError):
        SimScenario("weibull", 10, 5, "ar1", 0.5, 0.3)
    with pytest.raises(ValueError):
        SimScenario("cox", 10, 5, "ar1", 0.5, 1.0)
    with pytest.raises(ValueError):
        SimScenario("aft", 10, 5, "ar1", 0.5, 0.3)
    with pytest.raises(KeyError):
        preset("example9")


def test_presets_cover_designs():
    # example 1: 3 sizes x 2 rates; examples 2-4: 2 sizes x 2 rates
    assert len(PRESETS) == 18
    assert preset("example1-n400-cr50", quick=True).p == 500
