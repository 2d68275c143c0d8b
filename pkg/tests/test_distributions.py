import math

import numpy as np
import pytest

from conekit.distributions import (
    GigParams,
    McmcConfig,
    WishartParams,
    gig_draws,
    gig_logdensity_lebesgue,
    gig_logpdf,
    gig_mcmc,
    gig_sample,
    inv_wishart_draws,
    multivariate_gamma,
    wishart_draws,
    wishart_logpdf,
    wishart_normalization,
)
from conekit.errors import DomainError, UsageError
from conekit.jordan import element, make_algebra
from conekit.rng import stream
from conekit.stats import energy_test, ks_test, moment_summary

# frozen oracle values
REAL_GIG_LOGPDF_P15_X2 = -0.9034264097200273  # (p-1) log 2 - (2 + 1/2)/2
LOG_MVGAMMA_SYMREAL2_P3 = 1.8967685842375372  # log((2 pi)^(1/2) Gamma(3) Gamma(2.5))


def test_real_gig_logpdf_closed_form():
    alg = make_algebra("real")
    params = GigParams(alg, 1.5, element(alg, [1.0]), element(alg, [1.0]))
    assert gig_logdensity_lebesgue(params, element(alg, [2.0])) == pytest.approx(
        REAL_GIG_LOGPDF_P15_X2, rel=1e-14)


def test_gig_logpdf_off_cone():
    alg = make_algebra("sym_real", 2)
    e = alg.identity
    assert gig_logpdf(alg, 1.0, e, e, np.array([1.0, -1.0, 0.0])) == -np.inf


def test_gig_params_validation():
    alg = make_algebra("sym_real", 2)
    with pytest.raises(DomainError):
        GigParams(alg, 1.0, np.array([1.0, -1.0, 0.0]), alg.identity)
    with pytest.raises(UsageError):
        GigParams(alg, 1.0, np.ones(4), alg.identity)


def test_wishart_parameter_threshold():
    with pytest.raises(DomainError, match="dim E/r-1"):
        WishartParams(make_algebra("sym_real", 2), 0.4)


def test_multivariate_gamma():
    assert multivariate_gamma(4.0, make_algebra("real")) == pytest.approx(math.lgamma(4.0))
    assert multivariate_gamma(3.0, make_algebra("sym_real", 2)) == pytest.approx(
        LOG_MVGAMMA_SYMREAL2_P3, rel=1e-14)


@pytest.mark.parametrize("kind,size,p", [("sym_real", 2, 3.0), ("lorentz", 4, 2.5), ("real", None, 2.0)])
def test_wishart_density_normalized(kind, size, p):
    est, se = wishart_normalization(make_algebra(kind, size), p, 40000, stream(1, kind))
    assert abs(est - 1.0) < max(0.02, 3 * se)


def test_wishart_density_matches_scalar_gamma():
    from scipy import stats

    alg = make_algebra("real")
    x = np.array([[0.5], [3.0]])
    np.testing.assert_allclose(wishart_logpdf(alg, 2.5, x), stats.gamma(2.5, scale=2).logpdf(x[:, 0]))


@pytest.mark.parametrize("kind,size,p", [("real", None, 2.0), ("sym_real", 2, 3.0), ("lorentz", 4, 3.0)])
def test_wishart_mean(kind, size, p):
    alg = make_algebra(kind, size)
    x = wishart_draws(alg, p, 20000, stream(2, kind))
    assert moment_summary(x).within(2 * p * alg.identity).all()


@pytest.mark.parametrize("kind,size,p,scale", [("real", None, 2.0, 0.5), ("sym_real", 2, 3.0, 1 / 3)])
def test_inverse_wishart_mean(kind, size, p, scale):
    alg = make_algebra(kind, size)
    x = inv_wishart_draws(alg, p, 20000, stream(3, kind))
    assert moment_summary(x).within(scale * alg.identity).all()


def test_real_mcmc_matches_exact():
    alg = make_algebra("real")
    rng = stream(4)
    mc = gig_mcmc(alg, 1.5, 2.0, 0.5, 5000, 1, McmcConfig(), rng).samples.reshape(-1)
    exact, _ = gig_draws(alg, 1.5, 2.0 * alg.identity, 0.5 * alg.identity, 5000, rng)
    assert ks_test(mc, exact[:, 0]).p_value > 0.01


@pytest.mark.parametrize("kind,size", [("sym_real", 2), ("lorentz", 4)])
def test_mcmc_wishart_limit(kind, size):
    # GIG(p; e, b) tends to gamma_{p,e} as b -> 0
    alg = make_algebra(kind, size)
    rng = stream(5, kind)
    e = alg.identity
    x, res = gig_draws(alg, 3.0, e, 1e-10 * e, 2000, rng)
    y = wishart_draws(alg, 3.0, 2000, rng)
    assert energy_test(x, y, 999, rng=rng).p_value > 0.01
    assert 0.2 < res.acceptance < 0.4


def test_gig_per_row_targets():
    alg = make_algebra("sym_real", 2)
    rng = stream(6)
    a = np.stack([alg.identity, 4 * alg.identity] * 500)
    x, _ = gig_draws(alg, 2.0, a, alg.identity, len(a), rng, McmcConfig(burn_in=2000))
    # scaling: if X ~ GIG(p; 4e, e) then 2X ~ GIG(p; e, 4e) has larger mean than GIG(p; e, e)
    assert x[0::2].mean(axis=0)[0] > x[1::2].mean(axis=0)[0]


def test_gig_sample_metadata():
    alg = make_algebra("lorentz", 3)
    res = gig_sample(GigParams(alg, 1.0, alg.identity, alg.identity), 50,
                     McmcConfig(burn_in=200), stream(7))
    assert res.samples.shape == (50, 3)
    meta = res.metadata()
    assert set(meta) == {"acceptance", "step_size_median", "warnings"}


def test_mcmc_config_validation():
    with pytest.raises(UsageError):
        McmcConfig(step_size=-1.0)
    with pytest.raises(UsageError):
        McmcConfig(thin=0)
    with pytest.raises(TypeError):
        McmcConfig.from_dict({"bogus": 1})


def test_sample_count_must_be_positive():
    alg = make_algebra("real")
    with pytest.raises(UsageError):
        gig_sample(GigParams(alg, 1.0, alg.identity, alg.identity), 0, None, stream(8))
