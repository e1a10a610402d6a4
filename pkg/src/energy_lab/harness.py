"""
Verification sweep: sample distribution pairs, estimate D^2, compute the
moment functionals, and compare against the expansion.

Each cell of the sweep is seeded from ``(master_seed, d, family, mu1 index,
cov index)`` alone, so results do not depend on execution order or on the
number of worker threads.
"""
from __future__ import annotations

import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .distributions import (
    BandedDelta,
    DistributionSpec,
    banded_gaussian_pair,
    isotropic_scale,
    random_covariance,
    sample,
)
from .estimators import USTAT, VSTAT, EstimateWithError, energy_distance_sq
from .expansion import gaussian_expansion, mdependent_expansion
from .moments import (
    FALLBACK_SAMPLES,
    MomentFunctionals,
    functionals,
    law_moments,
    moment_diff_analytic,
    moment_diff_from_samples,
)
from .numerics import DegenerateDesignError, RegressionFit, fit_two_term, r_squared

logger = logging.getLogger(__name__)

UNRELIABLE = "moments_unreliable"

DEFAULT_FAMILIES = (
    ("Gaussian", None),
    ("MultivariateT", 2.0), ("MultivariateT", 3.0), ("MultivariateT", 5.0),
    ("ExpScale", 0.75), ("ExpScale", 1.0), ("ExpScale", 1.25),
    ("SinhArcsinhSkew", 0.05), ("SinhArcsinhSkew", 0.1), ("SinhArcsinhSkew", 0.2),
)

#: Mean-shift grids used by the figures' two Gaussian regimes.
SMALL_MU1 = (0.02, 0.04, 0.06)
LARGE_MU1 = (0.05, 0.10, 0.15)


@dataclass(frozen=True)
class SweepConfig:
    dims: tuple[int, ...] = (16, 32, 64)
    families: tuple[tuple[str, float | None], ...] = DEFAULT_FAMILIES
    mu1_values: tuple[float, ...] = SMALL_MU1
    n_cov: int = 28
    n_samples: int = 2 ** 14
    master_seed: int = 0
    mode: str = USTAT
    closeness: float = 0.1
    moment_mc_samples: int = FALLBACK_SAMPLES
    threads: int = 1

    def __post_init__(self):
        if self.n_cov < 3:
            raise ValueError(f"n_cov must be >= 3, got {self.n_cov}")
        if self.n_samples < 2 ** 10:
            raise ValueError(f"n_samples must be >= 1024, got {self.n_samples}")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ValueError("dims must be a nonempty set of integers >= 2")
        if not self.mu1_values:
            raise ValueError("mu1_values must be nonempty")
        if not 0.0 < self.closeness <= 1.0:
            raise ValueError(f"closeness must lie in (0, 1], got {self.closeness}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.mode not in (USTAT, VSTAT):
            raise ValueError(f"mode must be 'ustat' or 'vstat', got {self.mode!r}")
        for fam, param in self.families:
            # Validates family names and parameters.
            DistributionSpec(fam, np.zeros(2), np.eye(2), param)


@dataclass(frozen=True)
class Cell:
    d: int
    family: str
    param: float | None
    mu1_index: int
    cov_index: int

    @property
    def cov_kind(self) -> str:
        return "Wishart" if self.cov_index % 2 == 0 else "ExpDecay"

    @property
    def family_label(self) -> str:
        return family_label(self.family, self.param)


def family_label(family: str, param: float | None) -> str:
    if param is None:
        return family
    return DistributionSpec(family, np.zeros(2), np.eye(2), param).label


def _family_id(family: str, param: float | None) -> int:
    return zlib.crc32(family_label(family, param).encode())


def cell_seed(master_seed: int, cell: Cell) -> int:
    """64-bit seed depending only on the master seed and the cell identifiers."""
    ss = np.random.SeedSequence(
        master_seed,
        spawn_key=(cell.d, _family_id(cell.family, cell.param), cell.mu1_index, cell.cov_index),
    )
    return int(ss.generate_state(1, np.uint64)[0])


def cell_covariance(cfg: SweepConfig, d: int, cov_index: int) -> tuple[str, np.ndarray]:
    """Covariance of X's Gaussian core; shared by every family and mean shift."""
    kind = "Wishart" if cov_index % 2 == 0 else "ExpDecay"
    ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(d, 0xC0, cov_index))
    scale_seed, cov_seed = ss.spawn(2)
    # Random rescaling of the perturbation strength within (closeness/4, closeness].
    closeness = cfg.closeness * np.random.default_rng(scale_seed).uniform(0.25, 1.0)
    return kind, random_covariance(kind, d, closeness, cov_seed)


def cell_specs(cfg: SweepConfig, cell: Cell) -> tuple[DistributionSpec, DistributionSpec]:
    """``X ~ T_X(N(mu1 * 1, C))`` and ``Y ~ T_Y(N(0, I))``."""
    _, cov = cell_covariance(cfg, cell.d, cell.cov_index)
    mu1 = cfg.mu1_values[cell.mu1_index]
    spec_x = DistributionSpec(cell.family, np.full(cell.d, mu1), cov, cell.param)
    if cell.family == "SinhArcsinhSkew":
        spec_y = DistributionSpec("Gaussian", np.zeros(cell.d), np.eye(cell.d))
    else:
        spec_y = DistributionSpec(cell.family, np.zeros(cell.d), np.eye(cell.d), cell.param)
    return spec_x, spec_y


@dataclass(frozen=True)
class SweepRecord:
    d: int
    family: str
    param: float | None
    mu1: float
    mu1_index: int
    cov_kind: str
    cov_index: int
    seed: int
    estimate: EstimateWithError
    functionals: MomentFunctionals
    predicted: float = math.nan
    flags: tuple[str, ...] = ()

    @property
    def family_label(self) -> str:
        return family_label(self.family, self.param)

    @property
    def group(self) -> tuple[int, str, float | None]:
        return self.d, self.family, self.param

    @property
    def features(self) -> tuple[float, float]:
        return self.functionals.features

    @property
    def sort_key(self):
        return (self.d, self.family, -1.0 if self.param is None else self.param,
                self.mu1_index, self.cov_index)


def sweep_cells(cfg: SweepConfig) -> list[Cell]:
    return [
        Cell(d, fam, None if param is None else float(param), i, k)
        for d in cfg.dims
        for fam, param in cfg.families
        for i in range(len(cfg.mu1_values))
        for k in range(cfg.n_cov)
    ]


def run_cell(cfg: SweepConfig, cell: Cell) -> SweepRecord:
    spec_x, spec_y = cell_specs(cfg, cell)
    seed = cell_seed(cfg.master_seed, cell)
    x_seed, y_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2, np.uint64))
    x = sample(spec_x, cfg.n_samples, x_seed)
    y = sample(spec_y, cfg.n_samples, y_seed)
    est = energy_distance_sq(x, y, mode=cfg.mode)

    flags: tuple[str, ...] = ()
    if cell.family == "MultivariateT" and cell.param <= 2:
        md = moment_diff_from_samples(x, y)
        flags = (UNRELIABLE,)
    else:
        md = moment_diff_analytic(spec_x, spec_y, n_mc=cfg.moment_mc_samples)

    predicted = math.nan
    if cell.family == "Gaussian":
        lam = isotropic_scale(law_moments(spec_x).cov, law_moments(spec_y).cov)
        # The cell laws are not of the lam^2 I +/- Delta/2 form, so skip that check.
        predicted = gaussian_expansion(md.mu, md.Delta, lam, check_spd=False).total

    return SweepRecord(
        d=cell.d, family=cell.family, param=cell.param,
        mu1=float(cfg.mu1_values[cell.mu1_index]), mu1_index=cell.mu1_index,
        cov_kind=cell.cov_kind, cov_index=cell.cov_index, seed=seed,
        estimate=est, functionals=functionals(md), predicted=predicted, flags=flags,
    )


def run_sweep(cfg: SweepConfig, cells: Sequence[Cell] | None = None) -> list[SweepRecord]:
    """
    Run every cell of ``cfg`` (or the given subset) and return records sorted
    by cell identifiers.
    """
    cells = sweep_cells(cfg) if cells is None else list(cells)
    logger.info("running %d sweep cells with %d thread(s)", len(cells), cfg.threads)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(lambda c: run_cell(cfg, c), cells))
    else:
        records = [run_cell(cfg, c) for c in cells]
    return sorted(records, key=lambda r: r.sort_key)


def group_records(records: Iterable[SweepRecord]) -> dict[tuple, list[SweepRecord]]:
    groups: dict[tuple, list[SweepRecord]] = {}
    for rec in sorted(records, key=lambda r: r.sort_key):
        groups.setdefault(rec.group, []).append(rec)
    return groups


def fit_cell_group(records: Sequence[SweepRecord]) -> RegressionFit:
    """Two-term no-intercept regression of estimated D^2 on the two features."""
    if not records:
        raise ValueError("no records to fit")
    name = f"d={records[0].d} {records[0].family_label}"
    if len(records) < 3:
        raise DegenerateDesignError(f"group {name} has {len(records)} records; need >= 3")
    feats = np.array([r.features for r in records])
    targets = np.array([r.estimate.value for r in records])
    try:
        return fit_two_term(feats, targets)
    except DegenerateDesignError as exc:
        raise DegenerateDesignError(f"group {name}: {exc}") from None


@dataclass(frozen=True)
class GroupFit:
    d: int
    family: str
    param: float | None
    alpha1: float
    alpha2: float
    r_squared: float
    n_records: int
    status: str

    @property
    def family_label(self) -> str:
        return family_label(self.family, self.param)


def fit_groups(records: Iterable[SweepRecord]) -> list[GroupFit]:
    out = []
    for (d, fam, param), recs in group_records(records).items():
        if len(recs) < 3:
            out.append(GroupFit(d, fam, param, math.nan, math.nan, math.nan, len(recs), "skipped"))
            continue
        try:
            fit = fit_cell_group(recs)
        except DegenerateDesignError:
            out.append(GroupFit(d, fam, param, math.nan, math.nan, math.nan, len(recs), "degenerate"))
            continue
        status = UNRELIABLE if any(UNRELIABLE in r.flags for r in recs) else "ok"
        out.append(GroupFit(d, fam, param, fit.alpha1, fit.alpha2, fit.r_squared, len(recs), status))
    return out


@dataclass(frozen=True)
class DirectCheck:
    predicted: np.ndarray
    estimated: np.ndarray
    std_error: np.ndarray
    r_squared: float

    @property
    def relative_error(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.estimated - self.predicted) / np.abs(self.predicted)


def gaussian_direct_check(records: Sequence[SweepRecord]) -> DirectCheck:
    """Compare Gaussian-cell estimates to the closed-form prediction (no fitting)."""
    if not records:
        raise ValueError("no records given")
    bad = sorted({r.family_label for r in records if r.family != "Gaussian"})
    if bad:
        raise ValueError(f"direct check applies to Gaussian cells only, got {bad}")
    pred = np.array([r.predicted for r in records])
    est = np.array([r.estimate.value for r in records])
    se = np.array([r.estimate.std_error for r in records])
    return DirectCheck(pred, est, se, r_squared(pred, est))


@dataclass(frozen=True)
class MdepCheck:
    d: int
    simulated: EstimateWithError
    predicted: float
    predicted_banded: float
    scale: float = field(default=1.0)

    @property
    def scaled_simulated(self) -> float:
        """Simulated D^2 per sqrt(d), comparable to the marginal form."""
        return self.simulated.value * self.scale

    @property
    def scaled_predicted(self) -> float:
        return self.predicted * self.scale


def mdependent_check(d: int, M: int, delta_sq: float, rho_sq: float, mu1: float, lam: float,
                     n_samples: int, seed: int, mode: str = USTAT) -> MdepCheck:
    """
    Simulate a banded Gaussian pair and compare D^2 to the M-dependent formula.

    ``predicted`` is the large-d formula; ``predicted_banded`` evaluates the
    Gaussian expansion on the exact banded Delta (corner entries included).
    """
    b = BandedDelta(d, delta_sq, rho_sq, M)
    spec_x, spec_y = banded_gaussian_pair(b, mu1, lam)
    x_seed, y_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2, np.uint64))
    est = energy_distance_sq(sample(spec_x, n_samples, x_seed), sample(spec_y, n_samples, y_seed),
                             mode=mode)
    predicted = mdependent_expansion(mu1, delta_sq, lam, d, M, rho_sq)
    banded = gaussian_expansion(np.full(d, mu1), b.matrix(), lam).total
    return MdepCheck(d, est, predicted, banded, 1.0 / math.sqrt(d))
