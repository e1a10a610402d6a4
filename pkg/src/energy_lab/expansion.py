"""
Closed-form moment expansions of the squared energy distance.

In the perturbative regime (laws of scale ``lam`` much larger than their
moment differences) the squared energy distance is, to leading orders,

    D^2 ~ A1(d) * ||mu||^2 / lam + A2(d) * bracket / lam^3,
    bracket = 2 ||Delta||_F^2 + Trace(Delta)^2 - ||mu||^4 - 4 beta . mu.

The remainder is not modelled. This module also holds the gradient cosine
similarity between the covariance part of that expansion and the plain
Frobenius loss ``||Delta||_F^2``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .moments import MomentFunctionals
from .numerics import surface_volume, volume_ratio


@dataclass(frozen=True)
class ExpansionResult:
    """Predicted D^2 split into its 1/lam (mean) and 1/lam^3 (covariance/skew) parts."""
    first_order: float
    third_order: float

    @property
    def total(self) -> float:
        return self.first_order + self.third_order


@dataclass(frozen=True)
class HProfile:
    """The radial integrals ``i0 = int h(r) dr`` and ``i2 = int h(r) r^2 dr``."""
    i0: float
    i2: float

    def __post_init__(self):
        if not (self.i0 > 0 and self.i2 > 0):
            raise ValueError("HProfile integrals must be positive")


#: Profile of h(r) = exp(-r^2), the Gaussian case.
GAUSSIAN_PROFILE = HProfile(math.sqrt(math.pi) / 2.0, math.sqrt(math.pi) / 4.0)


def _check_lambda(lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    return float(lam)


def _expand(f: MomentFunctionals, lam: float, d: int, ratio: float, h: HProfile) -> ExpansionResult:
    lam = _check_lambda(lam)
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    first = ratio / d * f.mu_norm_sq * h.i0 / lam
    third = ratio / (4.0 * d * (d + 2)) * f.covariance_bracket * h.i2 / lam ** 3
    return ExpansionResult(first, third)


def spherical_expansion(f: MomentFunctionals, lam: float, d: int,
                        h: HProfile = GAUSSIAN_PROFILE) -> ExpansionResult:
    """Expansion with the exact ratio Vol(S^{d-1}) / Vol(S^d)."""
    return _expand(f, lam, d, volume_ratio(d), h)


def asymptotic_expansion(f: MomentFunctionals, lam: float, d: int,
                         h: HProfile = GAUSSIAN_PROFILE) -> ExpansionResult:
    """Expansion with the large-d ratio ``sqrt(d / (2 pi))``."""
    return _expand(f, lam, d, math.sqrt(d / (2.0 * math.pi)), h)


def gaussian_expansion(mu, Delta, lam: float, d: int | None = None,
                       check_spd: bool = True) -> ExpansionResult:
    """
    Leading terms of D^2 for X ~ N(mu, lam^2 I + Delta/2), Y ~ N(0, lam^2 I - Delta/2).

    ``first = ||mu||^2 / (lam sqrt(8d))`` and
    ``third = (2||Delta||_F^2 + Tr(Delta)^2 - ||mu||^4) / (8d sqrt(8d) lam^3)``.
    Symmetric laws have no skew term. With ``check_spd`` a warning is issued
    (and the formula still evaluated) when either covariance would fail to be
    positive definite.
    """
    lam = _check_lambda(lam)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    Delta = np.asarray(Delta, dtype=float)
    if d is None:
        d = mu.shape[0]
    if Delta.shape != (d, d) or mu.shape != (d,):
        raise ValueError("mu and Delta must have dimensions d and d x d")
    if check_spd and lam ** 2 - 0.5 * np.abs(np.linalg.eigvalsh(0.5 * (Delta + Delta.T))).max(initial=0.0) <= 0:
        warnings.warn("lam^2 I +/- Delta/2 is not positive definite", RuntimeWarning, stacklevel=2)
    mu_sq = float(mu @ mu)
    bracket = 2.0 * float(np.sum(Delta * Delta)) + float(np.trace(Delta)) ** 2 - mu_sq ** 2
    root = math.sqrt(8.0 * d)
    return ExpansionResult(mu_sq / (root * lam), bracket / (8.0 * d * root * lam ** 3))


def mdependent_terms(mu1: float, delta_sq: float, lam: float, d: int, M: int,
                     rho_sq: float) -> ExpansionResult:
    """:func:`mdependent_expansion` split into its two orders."""
    lam = _check_lambda(lam)
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    scale = math.sqrt(d / 8.0)
    bracket = (delta_sq ** 2 / 8.0 - mu1 ** 4 / 8.0
               + delta_sq ** 2 / (4.0 * d) + M * rho_sq ** 2 / (2.0 * d))
    return ExpansionResult(scale * mu1 ** 2 / lam, scale * bracket / lam ** 3)


def mdependent_expansion(mu1: float, delta_sq: float, lam: float, d: int, M: int,
                         rho_sq: float) -> float:
    """
    Large-d D^2 for banded Gaussian pairs with constant mean shift ``mu1``.

    ``sqrt(d/8) [mu1^2/lam + (delta^4/8 - mu1^4/8 + delta^4/(4d) + M rho^4/(2d)) / lam^3]``
    where ``delta^4 = delta_sq**2`` and ``rho^4 = rho_sq**2``.
    """
    return mdependent_terms(mu1, delta_sq, lam, d, M, rho_sq).total


def mdependent_marginal_form(mu1: float, delta_sq: float, lam: float) -> float:
    """Per-sqrt(d) marginal approximation ``2^{-3/2} [mu1^2/lam - mu1^4/(8 lam^3) + delta^4/(8 lam^3)]``."""
    lam = _check_lambda(lam)
    if lam ** 2 < delta_sq / 2.0:
        raise ValueError("need lam^2 >= delta_sq / 2")
    return 2.0 ** -1.5 * (mu1 ** 2 / lam - mu1 ** 4 / (8.0 * lam ** 3) + delta_sq ** 2 / (8.0 * lam ** 3))


def mdependent_marginal_exact(mu1: float, delta_sq: float, lam: float) -> float:
    """The un-expanded marginal form the approximation above comes from."""
    lam = _check_lambda(lam)
    if lam ** 2 < delta_sq / 2.0:
        raise ValueError("need lam^2 >= delta_sq / 2 (negative under radical)")
    return (math.sqrt(mu1 ** 2 + 2.0 * lam ** 2)
            - (math.sqrt(lam ** 2 + delta_sq / 2.0) + math.sqrt(lam ** 2 - delta_sq / 2.0)) / math.sqrt(2.0))


def cosine_similarity_gamma(gamma_sq: float, d: int) -> float:
    """``S = (2 + g) / sqrt(4 + g (4 + d))`` for diagonal importance ``g`` in [0, d]."""
    tol = 1e-12 * max(1.0, d)
    if not (-tol <= gamma_sq <= d + tol):
        raise ValueError(f"gamma_sq must lie in [0, {d}], got {gamma_sq}")
    g = min(max(gamma_sq, 0.0), float(d))
    return (2.0 + g) / math.sqrt(4.0 + g * (4.0 + d))


def cosine_similarity(Delta) -> float:
    """
    Cosine similarity between the eigenvalue gradients of
    ``2||Delta||_F^2 + Tr(Delta)^2`` and of ``||Delta||_F^2``.
    """
    Delta = np.asarray(Delta, dtype=float)
    frob_sq = float(np.sum(Delta * Delta))
    if frob_sq == 0.0:
        raise ValueError("similarity is undefined for Delta = 0")
    d = Delta.shape[0]
    return cosine_similarity_gamma(float(np.trace(Delta)) ** 2 / frob_sq, d)


SIMILARITY_CASES = ("local-biased", "local-unbiased", "global-biased", "global-unbiased")


def similarity_regime(case: str, d: int, M: int | None = None) -> float:
    """
    Large-d similarity for local (band M) or global correlations, with
    biased or unbiased diagonal scales.
    """
    if case not in SIMILARITY_CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {SIMILARITY_CASES}")
    if case.startswith("local"):
        if M is None or M < 1:
            raise ValueError("local cases need a band size M >= 1")
        return math.sqrt(1.0 / M) if case == "local-biased" else math.sqrt(M / d)
    return math.sqrt(1.0 / d) if case == "global-biased" else 1.0


def psi_tensors(mu, Delta, kappa) -> tuple[np.ndarray, np.ndarray]:
    """
    Coefficient tensors of the angular Taylor terms.

    Returns ``(T2, T4)`` such that ``psi2(theta) = T2 . theta^2`` equals
    ``2 (theta.mu)^2`` and ``psi4(theta) = T4 . theta^4`` equals
    ``6 (theta.Delta theta)^2 - 2 (theta.mu)^4 - 8 (theta.mu) kappa(theta, theta, theta)``.
    """
    mu = np.asarray(mu, dtype=float)
    Delta = np.asarray(Delta, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    t2 = 2.0 * np.einsum("i,j->ij", mu, mu)
    t4 = (6.0 * np.einsum("ij,kl->ijkl", Delta, Delta)
          - 2.0 * np.einsum("i,j,k,l->ijkl", mu, mu, mu, mu)
          - 8.0 * np.einsum("i,jkl->ijkl", mu, kappa))
    return t2, t4


def expansion_coefficients(d: int) -> tuple[float, float]:
    """Angular prefactors ``Vol(S^{d-1})/d`` and ``Vol(S^{d-1})/(4 d (d+2))``."""
    vol = surface_volume(d)
    return vol / d, vol / (4.0 * d * (d + 2))
