import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from carhmm.distributions import (
    GammaMeanSd,
    LogNormalAR,
    WrappedCauchy,
    gamma_cdf,
    gamma_logpdf,
    lognormal_logpdf,
    sample_gamma,
    sample_lognormal,
    sample_wc,
    wc_cdf,
    wc_logpdf,
)
from carhmm.errors import DomainError


def test_gamma_parameterization():
    p = GammaMeanSd(mean=2.0, sd=1.0)
    assert p.shape == pytest.approx(4.0)
    assert p.scale == pytest.approx(0.5)


def test_gamma_logpdf_exponential_case():
    # mean = sd = 1 is the unit exponential: log f(1) = -1
    assert gamma_logpdf(1.0, GammaMeanSd(1.0, 1.0)) == pytest.approx(-1.0, abs=1e-12)


def test_gamma_logpdf_against_mpmath():
    # independent evaluation through mpmath's log-gamma
    p = GammaMeanSd(0.398, 0.279)
    x = 0.398
    with mp.workdps(40):
        k = mp.mpf(p.mean) ** 2 / mp.mpf(p.sd) ** 2
        th = mp.mpf(p.sd) ** 2 / mp.mpf(p.mean)
        expected = float((k - 1) * mp.log(x) - x / th - k * mp.log(th) - mp.loggamma(k))
    assert gamma_logpdf(x, p) == pytest.approx(expected, abs=1e-10)


def test_gamma_logpdf_rejects_nonpositive():
    with pytest.raises(DomainError):
        gamma_logpdf(0.0, GammaMeanSd(1.0, 1.0))
    with pytest.raises(DomainError):
        gamma_logpdf(-1.0, GammaMeanSd(1.0, 1.0))


def test_gamma_cdf_limits_and_median():
    p = GammaMeanSd(1.0, 1.0)
    assert gamma_cdf(1e-12, p) == pytest.approx(0.0, abs=1e-9)
    assert gamma_cdf(60.0, p) == pytest.approx(1.0, abs=1e-12)
    assert gamma_cdf(math.log(2.0), p) == pytest.approx(0.5, abs=1e-12)


def test_gamma_cdf_against_quadrature():
    # shape 4, scale 0.5 (mean 2, sd 1) at x = 2
    p = GammaMeanSd(2.0, 1.0)
    val, err = quad(lambda x: math.exp(gamma_logpdf(x, p)), 1e-12, 2.0)
    assert err < 1e-9
    assert gamma_cdf(2.0, p) == pytest.approx(val, abs=1e-6)
    assert gamma_cdf(2.0, p) == pytest.approx(0.5665, abs=1e-4)


def test_gamma_pdf_normalization_grid():
    for mean in (0.2, 1.0, 2.0):
        for sd in (0.16, 0.3, 0.5):
            p = GammaMeanSd(mean, sd)
            val, _ = quad(lambda x: math.exp(gamma_logpdf(x, p)), 1e-300, np.inf)
            assert val == pytest.approx(1.0, abs=1e-6)


def test_wc_logpdf_uniform_limit():
    p = WrappedCauchy(0.3, 1e-12)
    for theta in (-3.0, 0.0, 1.5):
        assert wc_logpdf(theta, p) == pytest.approx(math.log(1 / (2 * math.pi)), abs=1e-9)


def test_wc_logpdf_peak_value():
    for rho in (0.2, 0.6, 0.906):
        p = WrappedCauchy(0.4, rho)
        expected = math.log((1 + rho) / ((1 - rho) * 2 * math.pi))
        assert wc_logpdf(0.4, p) == pytest.approx(expected, abs=1e-12)


def test_wc_logpdf_direct_formula():
    c, rho, theta = 0.0, 0.906, 0.5
    expected = math.log(
        (1 - rho**2) / (2 * math.pi * (1 + rho**2 - 2 * rho * math.cos(theta - c)))
    )
    assert wc_logpdf(theta, WrappedCauchy(c, rho)) == pytest.approx(expected, abs=1e-12)


def test_wc_pdf_normalization():
    for rho in (0.01, 0.5, 0.99):
        p = WrappedCauchy(0.7, rho)
        val, _ = quad(lambda t: math.exp(wc_logpdf(t, p)), -math.pi, math.pi, points=[p.c], limit=200)
        assert val == pytest.approx(1.0, abs=1e-9)


def test_wc_cdf_support_endpoints():
    for c in (-2.0, 0.0, 1.3):
        for rho in (0.1, 0.5, 0.9):
            p = WrappedCauchy(c, rho)
            assert wc_cdf(-math.pi, p) == pytest.approx(0.0, abs=1e-12)
            assert wc_cdf(math.pi, p) == pytest.approx(1.0, abs=1e-12)


def test_wc_cdf_symmetry_at_center():
    assert wc_cdf(0.0, WrappedCauchy(0.0, 0.77)) == pytest.approx(0.5, abs=1e-12)


def test_wc_cdf_against_quadrature():
    p = WrappedCauchy(0.0, 0.5)
    val, _ = quad(lambda t: math.exp(wc_logpdf(t, p)), -math.pi, math.pi / 2)
    assert wc_cdf(math.pi / 2, p) == pytest.approx(val, abs=1e-6)
    # frozen from the quadrature oracle; scipy's wrapcauchy agrees
    assert wc_cdf(math.pi / 2, p) == pytest.approx(0.8976, abs=1e-4)
    from scipy import stats

    f = stats.wrapcauchy(0.5)
    independent = (1 - f.cdf(math.pi)) + f.cdf(math.pi / 2)
    assert wc_cdf(math.pi / 2, p) == pytest.approx(independent, abs=1e-12)


def test_wc_cdf_offcenter_against_quadrature():
    for c in (-2.9, -0.5, 1.1, 2.8):
        p = WrappedCauchy(c, 0.8)
        for theta in (-2.0, 0.3, 2.5):
            val, _ = quad(
                lambda t: math.exp(wc_logpdf(t, p)), -math.pi, theta, points=[c], limit=200
            )
            assert wc_cdf(theta, p) == pytest.approx(val, abs=1e-7)


def test_wc_cdf_is_antiderivative():
    p = WrappedCauchy(0.4, 0.6)
    h = 1e-6
    for theta in np.linspace(-2.8, 2.8, 15):
        deriv = (wc_cdf(theta + h, p) - wc_cdf(theta - h, p)) / (2 * h)
        pdf = math.exp(wc_logpdf(theta, p))
        assert deriv == pytest.approx(pdf, rel=1e-5)


def test_lognormal_logpdf_matches_normal_on_logs():
    p = LogNormalAR(0.3, 0.5)
    x = 1.7
    z = (math.log(x) - 0.3) / 0.5
    expected = -math.log(x) - math.log(0.5) - 0.5 * math.log(2 * math.pi) - 0.5 * z * z
    assert lognormal_logpdf(x, p) == pytest.approx(expected, abs=1e-12)


def test_sample_gamma_moments():
    rng = np.random.default_rng(11)
    x = sample_gamma(GammaMeanSd(2.0, 1.0), rng, size=100_000)
    assert x.mean() == pytest.approx(2.0, abs=0.02)
    assert x.std() == pytest.approx(1.0, abs=0.02)
    assert np.all(x > 0)


def test_sample_wc_resultant_length():
    # E cos(theta - c) = rho for the wrapped Cauchy
    rng = np.random.default_rng(12)
    x = sample_wc(WrappedCauchy(0.0, 0.8), rng, size=100_000)
    assert np.cos(x).mean() == pytest.approx(0.8, abs=0.01)
    assert np.all((x > -math.pi) & (x <= math.pi))


def test_sample_lognormal_moments():
    rng = np.random.default_rng(13)
    x = sample_lognormal(LogNormalAR(0.2, 0.4), rng, size=100_000)
    assert np.log(x).mean() == pytest.approx(0.2, abs=0.01)
    assert np.log(x).std() == pytest.approx(0.4, abs=0.01)


def test_samplers_deterministic_under_seed():
    a = sample_wc(WrappedCauchy(0.5, 0.7), np.random.default_rng(99), size=50)
    b = sample_wc(WrappedCauchy(0.5, 0.7), np.random.default_rng(99), size=50)
    np.testing.assert_array_equal(a, b)
    g1 = sample_gamma(GammaMeanSd(1.0, 0.5), np.random.default_rng(5), size=50)
    g2 = sample_gamma(GammaMeanSd(1.0, 0.5), np.random.default_rng(5), size=50)
    np.testing.assert_array_equal(g1, g2)


def _ks_statistic(sample, cdf):
    x = np.sort(sample)
    n = len(x)
    u = cdf(x)
    upper = np.max(np.arange(1, n + 1) / n - u)
    lower = np.max(u - np.arange(0, n) / n)
    return max(upper, lower)


def test_sampler_ks_gamma():
    rng = np.random.default_rng(21)
    p = GammaMeanSd(1.3, 0.6)
    x = sample_gamma(p, rng, size=100_000)
    ks = _ks_statistic(x, lambda v: gamma_cdf(v, p))
    assert ks < 1.63 / math.sqrt(len(x))


def test_sampler_ks_wrapped_cauchy():
    rng = np.random.default_rng(22)
    p = WrappedCauchy(-0.9, 0.65)
    x = sample_wc(p, rng, size=100_000)
    ks = _ks_statistic(x, lambda v: np.asarray(wc_cdf(v, p)))
    assert ks < 1.63 / math.sqrt(len(x))
