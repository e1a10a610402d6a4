"""
Sphere geometry, spherical polynomial integrals and small fitting helpers.

Everything here is a pure function of its inputs. Gamma functions are
evaluated in log space, so volume ratios stay accurate even for dimensions
where the volumes themselves underflow (d beyond roughly 900).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln


class DegenerateDesignError(ValueError):
    """Raised when regression feature columns are (numerically) collinear."""


@dataclass(frozen=True)
class RegressionFit:
    """Result of a two-term, no-intercept least-squares fit."""
    alpha1: float
    alpha2: float
    r_squared: float


def _check_dim(d: int, minimum: int = 1) -> int:
    if int(d) != d or d < minimum:
        raise ValueError(f"dimension must be an integer >= {minimum}, got {d!r}")
    return int(d)


def log_surface_volume(d: int) -> float:
    """Logarithm of the surface measure of the unit sphere in R^d."""
    d = _check_dim(d)
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - gammaln(0.5 * d)


def surface_volume(d: int) -> float:
    """
    Surface measure of the unit sphere S^{d-1} embedded in R^d.

    ``surface_volume(2) == 2*pi`` (circle) and ``surface_volume(3) == 4*pi``.
    The normalizing constant of the Fourier form of the energy distance is
    ``surface_volume(d + 1)``.
    """
    return math.exp(log_surface_volume(d))


def volume_ratio(d: int) -> float:
    """Return Vol(S^{d-1}) / Vol(S^d), computed without overflow."""
    d = _check_dim(d)
    return math.exp(log_surface_volume(d) - log_surface_volume(d + 1))


def sphere_monomial_integral(exponents: Sequence[int], d: int | None = None) -> float:
    """
    Integrate ``prod(theta_i ** a_i)`` over the unit sphere S^{d-1}.

    Parameters
    ----------
    exponents : sequence of int
        Non-negative exponents, one per coordinate.
    d : int, optional
        Ambient dimension. Must equal ``len(exponents)`` when given.

    Returns
    -------
    float
        ``2 * prod Gamma((a_i+1)/2) / Gamma(sum (a_i+1)/2)``, or 0 when any
        exponent is odd.
    """
    a = [int(e) for e in exponents]
    if d is not None and len(a) != d:
        raise ValueError(f"expected {d} exponents, got {len(a)}")
    _check_dim(len(a))
    if any(e < 0 for e in a):
        raise ValueError("exponents must be non-negative")
    if any(e % 2 for e in a):
        return 0.0
    half = [0.5 * (e + 1) for e in a]
    log_val = math.log(2.0) + sum(gammaln(h) for h in half) - gammaln(sum(half))
    return math.exp(log_val)


def sphere_moment_tensor(d: int, order: int) -> np.ndarray:
    """
    Dense tensor ``T[i1..ik] = int theta_i1 ... theta_ik dOmega`` over S^{d-1}.

    Only intended for small ``d ** order`` (test oracles, consistency checks).
    """
    d = _check_dim(d)
    cache: dict[tuple[int, ...], float] = {}
    out = np.zeros((d,) * order)
    for idx in itertools.product(range(d), repeat=order):
        counts = [0] * d
        for i in idx:
            counts[i] += 1
        key = tuple(sorted(c for c in counts if c))
        if key not in cache:
            cache[key] = sphere_monomial_integral(list(key) + [0] * (d - len(key)))
        out[idx] = cache[key]
    return out


def _validate_symmetric(mat, name: str = "Delta") -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 1.0)
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError(f"{name} must be symmetric")
    return mat


def quadratic_form_sphere_integral(delta) -> float:
    """Integral of ``(theta . Delta theta)**2`` over S^{d-1}."""
    delta = _validate_symmetric(delta)
    d = delta.shape[0]
    frob_sq = float(np.sum(delta * delta))
    trace = float(np.trace(delta))
    return (2.0 * frob_sq + trace ** 2) * surface_volume(d) / (d * (d + 2))


def linear_square_sphere_integral(mu) -> float:
    """Integral of ``(theta . mu)**2`` over S^{d-1}."""
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[0]
    return float(mu @ mu) * surface_volume(d) / d


def linear_fourth_sphere_integral(mu) -> float:
    """Integral of ``(theta . mu)**4`` over S^{d-1}."""
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[0]
    return 3.0 * float(mu @ mu) ** 2 * surface_volume(d) / (d * (d + 2))


def skew_contraction(kappa) -> np.ndarray:
    """Return ``beta_j = sum_i kappa[i, i, j]`` for a third-order tensor."""
    kappa = np.asarray(kappa, dtype=float)
    return np.einsum("iij->j", kappa)


def skew_sphere_integral(kappa, mu) -> float:
    """
    Integral of ``(theta . mu) * sum_ijk kappa_ijk theta_i theta_j theta_k``.

    ``kappa`` must be symmetric under index permutations.
    """
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[0]
    beta = skew_contraction(kappa)
    return 3.0 * float(beta @ mu) * surface_volume(d) / (d * (d + 2))


def uniform_sphere(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` points uniformly on S^{d-1} by normalizing Gaussian vectors."""
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sphere_mc_integral(values: np.ndarray, d: int) -> tuple[float, float]:
    """
    Turn integrand values at uniform sphere points into (estimate, std_error).
    """
    vol = surface_volume(d)
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    return vol * float(values.mean()), vol * float(values.std(ddof=1)) / math.sqrt(n)


def fit_two_term(features, targets, max_condition: float = 1e12) -> RegressionFit:
    """
    No-intercept least squares ``targets ~ alpha1 * f1 + alpha2 * f2``.

    ``r_squared`` is ``1 - SS_res / SS_tot`` with ``SS_tot`` taken about the
    target mean, so it can be negative for a model that fits worse than a
    constant.
    """
    features = np.asarray(features, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if features.ndim != 2 or features.shape[1] != 2:
        raise ValueError(f"features must have shape (N, 2), got {features.shape}")
    if targets.shape != (features.shape[0],):
        raise ValueError("targets must be a vector matching the feature rows")
    n = features.shape[0]
    if n < 2:
        raise DegenerateDesignError("need at least 2 rows to fit two coefficients")

    norms = np.linalg.norm(features, axis=0)
    for j, name in enumerate(("feature1", "feature2")):
        if norms[j] == 0.0:
            raise DegenerateDesignError(f"column {name} is identically zero")
    # Column equilibration keeps the condition check scale-free.
    scaled = features / norms
    gram = scaled.T @ scaled
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > max_condition:
        raise DegenerateDesignError(
            f"columns feature1 and feature2 are collinear (condition number {cond:.3g})"
        )
    rhs = scaled.T @ targets
    (a11, a12), (_, a22) = gram
    det = a11 * a22 - a12 * a12
    c1 = (a22 * rhs[0] - a12 * rhs[1]) / det
    c2 = (a11 * rhs[1] - a12 * rhs[0]) / det
    alpha1, alpha2 = c1 / norms[0], c2 / norms[1]

    resid = targets - features @ np.array([alpha1, alpha2])
    ss_res = float(resid @ resid)
    centered = targets - targets.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res == 0.0 else -math.inf
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RegressionFit(float(alpha1), float(alpha2), float(r_squared))


def r_squared(predicted, observed) -> float:
    """Coefficient of determination of a fixed (unfitted) prediction."""
    predicted = np.asarray(predicted, dtype=float)
    observed = np.asarray(observed, dtype=float)
    resid = observed - predicted
    centered = observed - observed.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        return 1.0 if float(resid @ resid) == 0.0 else -math.inf
    return 1.0 - float(resid @ resid) / ss_tot


def quad_abs_normal_mean(m: float, s: float) -> float:
    """
    E|Z| for Z ~ Normal(m, s**2), by adaptive quadrature.

    The integrand is split at the kink ``z = 0`` and the two half-lines are
    integrated separately.
    """
    if not s > 0:
        raise ValueError(f"s must be positive, got {s!r}")

    def density(z):
        u = (z - m) / s
        return abs(z) * math.exp(-0.5 * u * u) / (s * math.sqrt(2.0 * math.pi))

    # Finite windows of 40 sd around the mode carry all the mass in double precision.
    lo, hi = m - 40.0 * s, m + 40.0 * s
    total = 0.0
    if lo < 0.0:
        val, _ = integrate.quad(density, lo, min(0.0, hi), epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
    if hi > 0.0:
        val, _ = integrate.quad(density, max(0.0, lo), hi, epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
    return total


@dataclass(frozen=True)
class SphereCheckRow:
    name: str
    closed_form: float
    monte_carlo: float
    std_error: float

    @property
    def z_score(self) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.monte_carlo == self.closed_form else math.inf
        return (self.monte_carlo - self.closed_form) / self.std_error

    @property
    def rel_error(self) -> float:
        if self.closed_form == 0.0:
            return abs(self.monte_carlo)
        return abs(self.monte_carlo - self.closed_form) / abs(self.closed_form)


def random_symmetric_tensor3(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random third-order tensor symmetric under all index permutations."""
    t = rng.standard_normal((d, d, d))
    perms = ("ijk", "ikj", "jik", "jki", "kij", "kji")
    return sum(np.einsum(f"ijk->{p}", t) for p in perms) / 6.0


def lemma_sphere_check(d: int, n_mc: int = 10 ** 6, seed: int = 0, mu=None, delta=None,
                       kappa=None, chunk: int = 2 ** 15) -> list[SphereCheckRow]:
    """
    Closed form versus uniform-sphere Monte Carlo for the four angular integrals

    ``(theta.mu)^2``, ``(theta.mu)^4``, ``(theta.Delta theta)^2`` and
    ``(theta.mu) kappa(theta, theta, theta)``.

    Missing ``mu``, ``delta`` or ``kappa`` are drawn at random from ``seed``.
    """
    d = _check_dim(d, 2)
    rng = np.random.default_rng(seed)
    mu = rng.standard_normal(d) if mu is None else np.asarray(mu, dtype=float)
    if delta is None:
        a = rng.standard_normal((d, d))
        delta = 0.5 * (a + a.T)
    delta = _validate_symmetric(delta)
    kappa = random_symmetric_tensor3(d, rng) if kappa is None else np.asarray(kappa, dtype=float)

    kappa_flat = kappa.reshape(d, d * d)
    sums = np.zeros(4)
    sq_sums = np.zeros(4)
    done = 0
    while done < n_mc:
        m = min(chunk, n_mc - done)
        theta = uniform_sphere(m, d, rng)
        tm = theta @ mu
        quad = np.einsum("nj,nj->n", theta @ delta, theta)
        contracted = (theta @ kappa_flat).reshape(m, d, d)
        cubic = np.einsum("njk,nj,nk->n", contracted, theta, theta)
        vals = np.stack([tm ** 2, tm ** 4, quad ** 2, tm * cubic])
        sums += vals.sum(axis=1)
        sq_sums += (vals ** 2).sum(axis=1)
        done += m
    vol = surface_volume(d)
    mean = sums / n_mc
    var = (sq_sums - n_mc * mean ** 2) / (n_mc - 1)
    se = vol * np.sqrt(np.maximum(var, 0.0) / n_mc)
    closed = (
        linear_square_sphere_integral(mu),
        linear_fourth_sphere_integral(mu),
        quadratic_form_sphere_integral(delta),
        skew_sphere_integral(kappa, mu),
    )
    names = ("mu_sq", "mu_fourth", "delta_quadratic", "kappa_skew")
    return [SphereCheckRow(n, float(c), float(vol * m), float(s))
            for n, c, m, s in zip(names, closed, mean, se)]
