"""
Difference moments between two laws and the scalar functionals built from them.

For laws X and Y we track

* ``mu``    = E X - E Y
* ``Delta`` = Cov X - Cov Y
* ``beta``  with ``beta_j = sum_i kappa_iij``, where ``kappa`` is the
  difference of third central moment tensors.

``beta . mu`` measures how well the skew difference lines up with the mean
difference; it vanishes whenever both laws are symmetric about their means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .distributions import (
    DistributionSpec,
    SampleMatrix,
    apply_transform,
    as_sample_matrix,
    cholesky_factor,
)

#: Sample size of the Monte-Carlo fallback used where no closed form is coded.
FALLBACK_SAMPLES = 2 ** 22
FALLBACK_SEED = 20240917
_CHUNK = 2 ** 16


class MomentDoesNotExistError(ValueError):
    """A requested moment is infinite for the given law."""


@dataclass(frozen=True)
class LawMoments:
    mean: np.ndarray
    cov: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class MomentDiff:
    """Difference moments ``(mu, Delta, beta)`` of X relative to Y."""
    mu: np.ndarray
    Delta: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        delta = np.asarray(self.Delta, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        if delta.shape != (mu.shape[0],) * 2 or beta.shape != mu.shape:
            raise ValueError("inconsistent MomentDiff shapes")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(delta)) and np.all(np.isfinite(beta))):
            raise ValueError("MomentDiff entries must be finite")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Delta", 0.5 * (delta + delta.T))
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    def __neg__(self) -> MomentDiff:
        return MomentDiff(-self.mu, -self.Delta, -self.beta)


@dataclass(frozen=True)
class MomentFunctionals:
    """Scalar functionals of a :class:`MomentDiff` entering the D^2 expansion."""
    mu_norm_sq: float
    mu_norm_4: float
    delta_frob_sq: float
    trace_sq: float
    beta_dot_mu: float

    @property
    def covariance_bracket(self) -> float:
        """``2 ||Delta||_F^2 + Trace(Delta)^2 - ||mu||^4 - 4 beta . mu``."""
        return 2.0 * self.delta_frob_sq + self.trace_sq - self.mu_norm_4 - 4.0 * self.beta_dot_mu

    @property
    def features(self) -> tuple[float, float]:
        """The two regression columns ``(||mu||^2, covariance_bracket)``."""
        return self.mu_norm_sq, self.covariance_bracket

    @property
    def gamma_sq(self) -> float:
        """Diagonal importance ``Trace(Delta)^2 / ||Delta||_F^2``."""
        if self.delta_frob_sq == 0.0:
            raise ZeroDivisionError("gamma_sq is undefined for Delta = 0")
        return self.trace_sq / self.delta_frob_sq


def sample_third_contraction(data: np.ndarray) -> np.ndarray:
    """
    Plug-in estimate of ``sum_i E[(X_i - m_i)^2 (X_j - m_j)]`` for each j.

    Uses ``sum_i c_i^2 = ||c||^2`` so the d^3 tensor is never formed.
    """
    c = data - data.mean(axis=0)
    r = np.einsum("ij,ij->i", c, c)
    return (r @ c) / data.shape[0]


def moment_diff_from_samples(x, y) -> MomentDiff:
    """
    Sample-based :class:`MomentDiff` of ``x`` relative to ``y``.

    Covariances use the unbiased (N-1) normalization; third central moments
    use the plug-in estimator.
    """
    x, y = as_sample_matrix(x).data, as_sample_matrix(y).data
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: x has d={x.shape[1]}, y has d={y.shape[1]}")
    if x.shape[0] < 3 or y.shape[0] < 3:
        raise ValueError("need at least 3 rows in each sample")
    mu = x.mean(axis=0) - y.mean(axis=0)
    delta = np.atleast_2d(np.cov(x, rowvar=False)) - np.atleast_2d(np.cov(y, rowvar=False))
    beta = sample_third_contraction(x) - sample_third_contraction(y)
    return MomentDiff(mu, delta, beta)


def _lognormal_moments(spec: DistributionSpec) -> LawMoments:
    s = spec.param
    m, c = spec.mean, spec.base_cov
    diag = np.diag(c)
    mean = np.exp(s * m + 0.5 * s ** 2 * diag)
    g = np.exp(s ** 2 * c)
    cov = np.outer(mean, mean) * (g - 1.0)
    gii = np.diag(g)
    # kappa_iij = m_i^2 m_j (g_ii g_ij^2 - 2 g_ij - g_ii + 2)
    kappa_iij = (mean ** 2)[:, None] * mean[None, :] * (
        gii[:, None] * g ** 2 - 2.0 * g - gii[:, None] + 2.0
    )
    return LawMoments(mean, cov, kappa_iij.sum(axis=0))


@lru_cache(maxsize=256)
def _monte_carlo_moments_cached(spec: DistributionSpec, n: int, seed: int) -> LawMoments:
    d = spec.d
    factor = cholesky_factor(spec.base_cov)
    n_chunks = -(-n // _CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    shift = None
    s1 = np.zeros(d)
    s2 = np.zeros((d, d))
    s3 = np.zeros((d, d))
    total = 0
    for k, child in enumerate(children):
        rows = min(_CHUNK, n - k * _CHUNK)
        rng = np.random.default_rng(child)
        z = spec.mean + rng.standard_normal((rows, d)) @ factor.T
        x = apply_transform(spec, z, rng)
        if shift is None:
            shift = x.mean(axis=0)
        x = x - shift
        s1 += x.sum(axis=0)
        s2 += x.T @ x
        s3 += (x * x).T @ x
        total += rows
    m = s1 / total
    e2 = s2 / total
    e3 = s3 / total  # e3[i, j] = E[x_i^2 x_j]
    cov_plugin = e2 - np.outer(m, m)
    cov = cov_plugin * total / (total - 1)
    dm = np.diag(e2)
    kappa_iij = e3 - 2.0 * m[:, None] * e2 - dm[:, None] * m[None, :] + 2.0 * (m ** 2)[:, None] * m[None, :]
    return LawMoments(m + shift, cov, kappa_iij.sum(axis=0))


def law_moments(spec: DistributionSpec, n_mc: int = FALLBACK_SAMPLES,
                seed: int = FALLBACK_SEED) -> LawMoments:
    """
    Mean, covariance and contracted third central moment of ``spec``.

    Closed forms are used for the Gaussian, multivariate t and exponential
    families. The sinh-arcsinh family falls back to a deterministic,
    chunked Monte-Carlo estimate with ``n_mc`` draws (cached per spec).
    """
    d = spec.d
    if spec.family == "Gaussian":
        return LawMoments(spec.mean.copy(), spec.base_cov.copy(), np.zeros(d))
    if spec.family == "MultivariateT":
        nu = spec.param
        if nu <= 2:
            raise MomentDoesNotExistError(
                f"second moment does not exist for MultivariateT(dof={nu:g}); need dof > 2"
            )
        return LawMoments(spec.mean.copy(), spec.base_cov * (nu / (nu - 2.0)), np.zeros(d))
    if spec.family == "ExpScale":
        return _lognormal_moments(spec)
    if spec.param == 0.0:
        return LawMoments(spec.mean.copy(), spec.base_cov.copy(), np.zeros(d))
    return _monte_carlo_moments_cached(spec, int(n_mc), int(seed))


def moment_diff_analytic(spec_x: DistributionSpec, spec_y: DistributionSpec,
                         n_mc: int = FALLBACK_SAMPLES) -> MomentDiff:
    """:class:`MomentDiff` from family knowledge (Monte-Carlo where no closed form exists)."""
    if spec_x.d != spec_y.d:
        raise ValueError(f"dimension mismatch: {spec_x.d} vs {spec_y.d}")
    mx, my = law_moments(spec_x, n_mc), law_moments(spec_y, n_mc)
    return MomentDiff(mx.mean - my.mean, mx.cov - my.cov, mx.beta - my.beta)


def functionals(md: MomentDiff) -> MomentFunctionals:
    mu_sq = float(md.mu @ md.mu)
    return MomentFunctionals(
        mu_norm_sq=mu_sq,
        mu_norm_4=mu_sq ** 2,
        delta_frob_sq=float(np.sum(md.Delta * md.Delta)),
        trace_sq=float(np.trace(md.Delta)) ** 2,
        beta_dot_mu=float(md.beta @ md.mu),
    )


def lognormal_third_central(sigma: float, m: float = 0.0, v: float = 1.0) -> float:
    """Third central moment of exp(sigma * Z), Z ~ N(m, v)."""
    s2 = sigma ** 2 * v
    mean = math.exp(sigma * m + 0.5 * s2)
    g = math.exp(s2)
    return mean ** 3 * (g ** 3 - 3.0 * g + 2.0)
