"""
Sampleable distribution families and random covariance generators.

Every family is a componentwise (or, for the multivariate t, a row-wise)
transformation of a Gaussian core ``Z ~ N(mean, base_cov)``:

* ``Gaussian``         X = Z
* ``MultivariateT``    X = mean + (Z - mean) / sqrt(chi2_dof / dof), one chi2 draw per row
* ``ExpScale``         X = exp(sigma * Z)
* ``SinhArcsinhSkew``  X = sinh(arcsinh(Z) + skew)

No global random state is used; all randomness flows from explicit seeds.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("Gaussian", "MultivariateT", "ExpScale", "SinhArcsinhSkew")
_PARAM_NAMES = {"MultivariateT": "dof", "ExpScale": "sigma", "SinhArcsinhSkew": "skew"}


class FactorizationError(ValueError):
    """A covariance matrix could not be factorized (not positive definite)."""


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """
    A d-dimensional law: transformation family applied to N(mean, base_cov).

    For ``MultivariateT`` the ``base_cov`` is the scale matrix of the
    Gaussian core, not the covariance of the resulting law.
    """
    family: str
    mean: np.ndarray
    base_cov: np.ndarray
    param: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.base_cov, dtype=float)
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValueError(f"base_cov must have shape {(d, d)}, got {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("base_cov must be symmetric")
        if self.family == "Gaussian":
            param = None
        else:
            if self.param is None:
                raise ValueError(f"{self.family} requires parameter {_PARAM_NAMES[self.family]}")
            param = float(self.param)
            if self.family == "MultivariateT" and not param > 0:
                raise ValueError(f"dof must be positive, got {param}")
            if self.family == "ExpScale" and not param > 0:
                raise ValueError(f"sigma must be positive, got {param}")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "base_cov", cov)
        object.__setattr__(self, "param", param)

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @property
    def label(self) -> str:
        if self.param is None:
            return self.family
        return f"{self.family}({_PARAM_NAMES[self.family]}={self.param:g})"

    def digest(self) -> str:
        """Stable short identifier of the family, parameters, mean and covariance."""
        h = hashlib.sha256()
        h.update(self.family.encode())
        h.update(repr(self.param).encode())
        h.update(np.ascontiguousarray(self.mean).tobytes())
        h.update(np.ascontiguousarray(self.base_cov).tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, DistributionSpec):
            return NotImplemented
        return self.digest() == other.digest()

    def __hash__(self):
        return hash(self.digest())


@dataclass(frozen=True)
class SampleMatrix:
    """An N x d array of draws together with its provenance."""
    data: np.ndarray
    seed: int | None = None
    spec_digest: str | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ValueError(f"sample data must be 2-d, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("sample data contains non-finite entries")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def as_sample_matrix(x) -> SampleMatrix:
    return x if isinstance(x, SampleMatrix) else SampleMatrix(x)


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        min_eig = float(np.linalg.eigvalsh(cov).min())
        raise FactorizationError(
            f"covariance is not positive definite (minimum eigenvalue {min_eig:.6g})"
        ) from None


def sinh_arcsinh(z, skew: float):
    """Skew-only sinh-arcsinh transform with unit tail weight."""
    return np.sinh(np.arcsinh(z) + skew)


def apply_transform(spec: DistributionSpec, z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Map Gaussian-core draws ``z`` (rows) to draws of ``spec``."""
    if spec.family == "Gaussian":
        return z
    if spec.family == "MultivariateT":
        scale = np.sqrt(rng.chisquare(spec.param, size=z.shape[0]) / spec.param)
        return spec.mean + (z - spec.mean) / scale[:, None]
    if spec.family == "ExpScale":
        return np.exp(spec.param * z)
    if spec.param == 0.0:
        return z
    return sinh_arcsinh(z, spec.param)


def sample(spec: DistributionSpec, n: int, seed: int) -> SampleMatrix:
    """
    Draw ``n`` i.i.d. rows from ``spec`` using a generator seeded by ``seed``.

    Identical ``(spec, n, seed)`` gives bit-identical output.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    factor = cholesky_factor(spec.base_cov)
    rng = np.random.default_rng(seed)
    z = spec.mean + rng.standard_normal((n, spec.d)) @ factor.T
    x = apply_transform(spec, z, rng)
    return SampleMatrix(x, seed=seed, spec_digest=spec.digest())


def random_covariance(kind: str, d: int, closeness: float, seed) -> np.ndarray:
    """
    Random SPD matrix ``(1 - closeness) * I + closeness * K``.

    ``kind="Wishart"``: K = W * d / trace(W) with W = A^T A / m, A an m x d
    standard Gaussian matrix and m = 2d.
    ``kind="ExpDecay"``: K_ij = exp(-|i - j| / ell), ell ~ Uniform[1, max(1, d/4)].
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 0.0 <= closeness <= 1.0:
        raise ValueError(f"closeness must lie in [0, 1], got {closeness}")
    rng = np.random.default_rng(seed)
    if kind == "Wishart":
        m = 2 * d
        a = rng.standard_normal((m, d))
        w = a.T @ a / m
        k = w * (d / np.trace(w))
    elif kind == "ExpDecay":
        ell = rng.uniform(1.0, max(1.0, d / 4.0))
        idx = np.arange(d)
        k = np.exp(-np.abs(idx[:, None] - idx[None, :]) / ell)
    else:
        raise ValueError(f"unknown covariance kind {kind!r}; expected 'Wishart' or 'ExpDecay'")
    c = (1.0 - closeness) * np.eye(d) + closeness * k
    return 0.5 * (c + c.T)


@dataclass(frozen=True)
class BandedDelta:
    """Covariance difference with ``delta_sq`` on the diagonal and ``rho_sq`` on M bands."""
    d: int
    delta_sq: float
    rho_sq: float
    M: int = field(default=0)

    def __post_init__(self):
        if self.d < 1 or self.M < 0:
            raise ValueError("need d >= 1 and M >= 0")
        if 2 * self.M >= self.d:
            raise ValueError(f"bandwidth too large: 2M = {2 * self.M} must be < d = {self.d}")

    def matrix(self) -> np.ndarray:
        out = self.delta_sq * np.eye(self.d)
        for k in range(1, self.M + 1):
            out += self.rho_sq * (np.eye(self.d, k=k) + np.eye(self.d, k=-k))
        return out

    @property
    def n_band_entries(self) -> int:
        """Exact count of nonzero off-diagonal entries, ``2 * (M d - M (M+1) / 2)``."""
        return 2 * self.M * self.d - self.M * (self.M + 1)

    @property
    def frob_sq(self) -> float:
        return self.d * self.delta_sq ** 2 + self.n_band_entries * self.rho_sq ** 2

    @property
    def trace_sq(self) -> float:
        return (self.d * self.delta_sq) ** 2


def banded_gaussian_pair(b: BandedDelta, mu1: float, lam: float):
    """
    Gaussian pair X ~ N(mu1 * 1, lam^2 I + Delta/2), Y ~ N(0, lam^2 I - Delta/2).

    Returns ``(spec_x, spec_y)``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    delta = b.matrix()
    base = lam ** 2 * np.eye(b.d)
    cov_x, cov_y = base + 0.5 * delta, base - 0.5 * delta
    for name, cov in (("X", cov_x), ("Y", cov_y)):
        min_eig = float(np.linalg.eigvalsh(cov).min())
        if min_eig <= 0:
            raise ValueError(
                f"covariance of {name} is not positive definite (minimum eigenvalue {min_eig:.6g})"
            )
    spec_x = DistributionSpec("Gaussian", np.full(b.d, float(mu1)), cov_x)
    spec_y = DistributionSpec("Gaussian", np.zeros(b.d), cov_y)
    return spec_x, spec_y


def isotropic_scale(cov_x: np.ndarray, cov_y: np.ndarray) -> float:
    """``lambda`` with ``lambda^2 = trace(cov_x + cov_y) / (2 d)``."""
    d = cov_x.shape[0]
    return math.sqrt(float(np.trace(cov_x) + np.trace(cov_y)) / (2.0 * d))
