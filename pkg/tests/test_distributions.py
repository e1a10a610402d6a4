from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from energy_lab.distributions import (
    BandedDelta,
    DistributionSpec,
    FactorizationError,
    SampleMatrix,
    banded_gaussian_pair,
    isotropic_scale,
    random_covariance,
    sample,
    sinh_arcsinh,
)


def _cov2(rho=0.3):
    return np.array([[1.0, rho], [rho, 1.0]])


def test_spec_validation():
    with pytest.raises(ValueError, match="unknown family"):
        DistributionSpec("Cauchy", np.zeros(2), np.eye(2))
    with pytest.raises(ValueError, match="shape"):
        DistributionSpec("Gaussian", np.zeros(2), np.eye(3))
    with pytest.raises(ValueError, match="symmetric"):
        DistributionSpec("Gaussian", np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError, match="dof"):
        DistributionSpec("MultivariateT", np.zeros(2), np.eye(2))
    with pytest.raises(ValueError, match="dof must be positive"):
        DistributionSpec("MultivariateT", np.zeros(2), np.eye(2), 0.0)
    with pytest.raises(ValueError, match="sigma"):
        DistributionSpec("ExpScale", np.zeros(2), np.eye(2), -1.0)


def test_spec_identity_and_labels():
    a = DistributionSpec("MultivariateT", [0.0, 1.0], _cov2(), 5)
    b = DistributionSpec("MultivariateT", np.array([0.0, 1.0]), _cov2(), 5.0)
    c = DistributionSpec("MultivariateT", [0.0, 1.0], _cov2(), 6)
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert a.label == "MultivariateT(dof=5)"
    assert DistributionSpec("Gaussian", [0.0], [[1.0]], 3.0).param is None
    with pytest.raises(ValueError):
        a.mean[0] = 2.0


def test_sample_matrix_validation():
    assert SampleMatrix([1.0, 2.0]).data.shape == (2, 1)
    with pytest.raises(ValueError, match="non-finite"):
        SampleMatrix([[1.0, np.nan]])
    with pytest.raises(ValueError, match="2-d"):
        SampleMatrix(np.zeros((2, 2, 2)))


@pytest.mark.parametrize("family,param", [("Gaussian", None), ("MultivariateT", 3.0),
                                          ("ExpScale", 0.5), ("SinhArcsinhSkew", 0.2)])
def test_sampling_is_deterministic(family, param):
    spec = DistributionSpec(family, np.full(3, 0.1), np.eye(3), param)
    a, b = sample(spec, 500, 42), sample(spec, 500, 42)
    assert np.array_equal(a.data, b.data)
    assert a.spec_digest == spec.digest() and a.seed == 42
    assert not np.array_equal(a.data, sample(spec, 500, 43).data)


def test_zero_skew_is_gaussian_bit_for_bit():
    cov = _cov2()
    g = sample(DistributionSpec("Gaussian", [0.1, -0.2], cov), 1000, 5)
    s = sample(DistributionSpec("SinhArcsinhSkew", [0.1, -0.2], cov, 0.0), 1000, 5)
    assert np.array_equal(g.data, s.data)


def test_gaussian_moments(rng):
    cov = _cov2(0.6) * 2.0
    x = sample(DistributionSpec("Gaussian", [1.0, -1.0], cov), 200_000, 1).data
    np.testing.assert_allclose(x.mean(axis=0), [1.0, -1.0], atol=0.02)
    np.testing.assert_allclose(np.cov(x, rowvar=False), cov, atol=0.03)


def test_multivariate_t_covariance_and_marginal():
    dof, cov = 6.0, _cov2(0.5)
    x = sample(DistributionSpec("MultivariateT", [2.0, 0.0], cov, dof), 400_000, 3).data
    np.testing.assert_allclose(x.mean(axis=0), [2.0, 0.0], atol=0.02)
    np.testing.assert_allclose(np.cov(x, rowvar=False), dof / (dof - 2) * cov, rtol=0.05)
    # First marginal is a location-shifted Student t.
    ks = stats.kstest(x[:20_000, 0] - 2.0, stats.t(dof).cdf)
    assert ks.pvalue > 1e-3


def test_expscale_lognormal_marginals():
    sigma = 0.5
    x = sample(DistributionSpec("ExpScale", [0.2, 0.0], _cov2(), sigma), 200_000, 4).data
    expected_mean = np.exp(sigma * np.array([0.2, 0.0]) + sigma ** 2 / 2)
    np.testing.assert_allclose(x.mean(axis=0), expected_mean, rtol=0.01)
    ks = stats.kstest(x[:20_000, 1], stats.lognorm(s=sigma).cdf)
    assert ks.pvalue > 1e-3


def test_sinh_arcsinh_mean_matches_quadrature():
    skew = 0.3
    x = sample(DistributionSpec("SinhArcsinhSkew", [0.0], [[1.0]], skew), 400_000, 9).data[:, 0]
    truth, _ = integrate.quad(lambda z: sinh_arcsinh(z, skew) * stats.norm.pdf(z), -40, 40)
    assert abs(x.mean() - truth) < 4 * x.std() / math.sqrt(x.size)


def test_non_spd_covariance_reports_min_eigenvalue():
    spec = DistributionSpec("Gaussian", np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(FactorizationError, match="-1"):
        sample(spec, 10, 0)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["Wishart", "ExpDecay"]), st.integers(2, 40), st.floats(0.0, 1.0),
       st.integers(0, 2 ** 31))
def test_random_covariance_is_spd_with_trace_d(kind, d, closeness, seed):
    c = random_covariance(kind, d, closeness, seed)
    assert np.array_equal(c, c.T)
    assert np.linalg.eigvalsh(c).min() > 0
    assert np.trace(c) == pytest.approx(d, rel=1e-12)
    assert np.array_equal(c, random_covariance(kind, d, closeness, seed))


def test_random_covariance_closeness_controls_distance():
    near = random_covariance("Wishart", 16, 0.05, 1)
    far = random_covariance("Wishart", 16, 0.5, 1)
    assert np.linalg.norm(near - np.eye(16)) < np.linalg.norm(far - np.eye(16))
    with pytest.raises(ValueError):
        random_covariance("Toeplitz", 4, 0.1, 0)


@pytest.mark.parametrize("d,M", [(5, 1), (9, 4), (32, 2), (64, 3)])
def test_banded_delta_counts(d, M):
    b = BandedDelta(d, 0.3, 0.7, M)
    m = b.matrix()
    assert np.count_nonzero(np.triu(m, 1)) * 2 == b.n_band_entries
    assert b.frob_sq == pytest.approx(float(np.sum(m * m)))
    assert b.trace_sq == pytest.approx(np.trace(m) ** 2)
    assert b.frob_sq == pytest.approx(d * 0.09 + 0.49 * (2 * M * d - M * (M + 1)))


def test_banded_delta_bandwidth_guard():
    with pytest.raises(ValueError, match="bandwidth"):
        BandedDelta(4, 0.0, 1.0, 2)


def test_banded_pair_and_positivity():
    b = BandedDelta(16, 0.0, 4.0, 2)
    sx, sy = banded_gaussian_pair(b, 0.1, 4.0)
    np.testing.assert_allclose(sx.base_cov - sy.base_cov, b.matrix())
    np.testing.assert_allclose(sx.mean, 0.1)
    with pytest.raises(ValueError, match="minimum eigenvalue"):
        banded_gaussian_pair(b, 0.0, 1.0)


def test_isotropic_scale():
    assert isotropic_scale(2 * np.eye(3), np.eye(3)) == pytest.approx(math.sqrt(1.5))
