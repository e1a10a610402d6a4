"""
Sample estimators of the energy score and the squared energy distance.

The pairwise O(N^2 d) work is done in row blocks. Per-row sums are kept so
that leave-one-out (jackknife) replicates cost O(N) once the sums exist.
One-dimensional data takes an O(N log N) path based on sorting.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import as_sample_matrix

USTAT = "ustat"
VSTAT = "vstat"
_BLOCK_ELEMENTS = 2 ** 21


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n_x: int
    n_y: int


def _mode(mode: str) -> str:
    m = str(mode).lower()
    if m not in (USTAT, VSTAT):
        raise ValueError(f"mode must be 'ustat' or 'vstat', got {mode!r}")
    return m


def _abs_row_sums_1d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i] = sum_j |a[i] - b[j]|`` via sorting and prefix sums."""
    bs = np.sort(b)
    prefix = np.concatenate(([0.0], np.cumsum(bs)))
    total = prefix[-1]
    k = np.searchsorted(bs, a, side="right")
    below = a * k - prefix[k]
    above = (total - prefix[k]) - a * (bs.shape[0] - k)
    return below + above


def _compensated_add(acc: np.ndarray, comp: np.ndarray, values: np.ndarray) -> None:
    # Neumaier summation, elementwise and in place.
    t = acc + values
    big = np.abs(acc) >= np.abs(values)
    comp += np.where(big, (acc - t) + values, (values - t) + acc)
    acc[...] = t


def pairwise_distance_sums(a: np.ndarray, b: np.ndarray, same: bool = False,
                           threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """
    Row and column sums of the Euclidean distance matrix between ``a`` and ``b``.

    Returns ``(rows, cols)`` with ``rows[i] = sum_j ||a_i - b_j||`` and
    ``cols[j] = sum_i ||a_i - b_j||``. With ``same=True`` the diagonal is
    forced to exactly zero. Results do not depend on ``threads``.
    """
    if a.shape[1] == 1:
        rows = _abs_row_sums_1d(a[:, 0], b[:, 0])
        cols = rows if same else _abs_row_sums_1d(b[:, 0], a[:, 0])
        return rows, cols

    # Augmented factors make one GEMM produce squared distances directly.
    a_sq = np.einsum("ij,ij->i", a, a)[:, None]
    b_sq = np.einsum("ij,ij->i", b, b)[:, None]
    left = np.hstack([-2.0 * a, a_sq, np.ones_like(a_sq)])
    right = np.hstack([b, np.ones_like(b_sq), b_sq])
    n_a, n_b = a.shape[0], b.shape[0]
    step = max(1, _BLOCK_ELEMENTS // max(1, n_b))
    starts = list(range(0, n_a, step))

    def block(start):
        stop = min(start + step, n_a)
        # For a symmetric matrix only columns >= start are needed.
        first = start if same else 0
        dist = left[start:stop] @ right[first:].T
        np.maximum(dist, 0.0, out=dist)
        np.sqrt(dist, out=dist)
        if same:
            idx = np.arange(stop - start)
            dist[idx, idx] = 0.0
            # Column sums of the diagonal sub-block duplicate row sums; skip them.
            return dist.sum(axis=1), dist[:, stop - start:].sum(axis=0)
        return dist.sum(axis=1), dist.sum(axis=0)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, starts))
    else:
        parts = [block(s) for s in starts]

    rows = np.concatenate([p[0] for p in parts])
    acc = np.zeros(n_b)
    comp = np.zeros(n_b)
    for start, (_, col) in zip(starts, parts):
        offset = min(start + step, n_a) if same else 0
        _compensated_add(acc[offset:], comp[offset:], col)
    cols = acc + comp
    if same:
        rows = rows + cols
        return rows, rows
    return rows, cols


def _pairwise_sums(a, b, same=False, threads=1):
    return pairwise_distance_sums(np.ascontiguousarray(a, dtype=float),
                                  np.ascontiguousarray(b, dtype=float), same, threads)


def energy_score(forecast, observation) -> float:
    """
    Sample energy score of an ensemble ``forecast`` (N x d) against one observation.

    ``mean_n ||x_n - y|| - sum_{n != m} ||x_n - x_m|| / (2 N (N-1))``
    """
    x = as_sample_matrix(forecast).data
    y = np.asarray(observation, dtype=float).reshape(1, -1)
    if y.shape[1] != x.shape[1]:
        raise ValueError(f"observation has d={y.shape[1]}, forecast has d={x.shape[1]}")
    n = x.shape[0]
    if n < 2:
        raise ValueError("energy score needs at least 2 forecast members")
    to_obs = np.linalg.norm(x - y, axis=1)
    within, _ = _pairwise_sums(x, x, same=True)
    return math.fsum(to_obs) / n - math.fsum(within) / (2.0 * n * (n - 1))


def averaged_energy_score(forecasts: Sequence, observations: Sequence) -> float:
    """Arithmetic mean of :func:`energy_score` over paired forecast times."""
    if len(forecasts) != len(observations):
        raise ValueError(
            f"got {len(forecasts)} forecasts but {len(observations)} observations"
        )
    if not forecasts:
        raise ValueError("need at least one forecast time")
    return math.fsum(energy_score(f, o) for f, o in zip(forecasts, observations)) / len(forecasts)


def _within_mean(total, n, mode):
    denom = n * (n - 1) if mode == USTAT else n * n
    return total / denom if denom > 0 else 0.0


def energy_distance_sq(x, y, mode: str = USTAT, max_pairs: int | None = None,
                       threads: int = 1) -> EstimateWithError:
    """
    Estimate ``D^2 = E||X-Y|| - E||X-X'||/2 - E||Y-Y'||/2`` from two samples.

    Parameters
    ----------
    x, y : SampleMatrix or array_like
        Samples of shape (N_x, d) and (N_y, d).
    mode : {"ustat", "vstat"}
        Whether the within-sample averages exclude (U) or include (V) the
        zero self-pairs.
    max_pairs : int, optional
        If given and ``N_x * N_y`` exceeds it, both samples are truncated to
        their leading rows so the cross term uses at most ``max_pairs`` pairs.
    threads : int
        Worker threads for the pairwise kernel.

    Returns
    -------
    EstimateWithError
        The point estimate with a delete-one jackknife standard error over
        the rows of both samples. The error is approximate, notably for the
        degenerate case X ~ Y.
    """
    mode = _mode(mode)
    x = as_sample_matrix(x).data
    y = as_sample_matrix(y).data
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: x has d={x.shape[1]}, y has d={y.shape[1]}")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError("each sample needs at least 2 rows")
    if max_pairs is not None and x.shape[0] * y.shape[0] > max_pairs:
        frac = math.sqrt(max_pairs / (x.shape[0] * y.shape[0]))
        x = x[: max(2, int(x.shape[0] * frac))]
        y = y[: max(2, int(y.shape[0] * frac))]

    # Translation invariance: center on a common point to keep the Gram trick accurate.
    shift = (x.sum(axis=0) + y.sum(axis=0)) / (x.shape[0] + y.shape[0])
    x = x - shift
    y = y - shift
    nx, ny = x.shape[0], y.shape[0]

    xx_rows, _ = _pairwise_sums(x, x, same=True, threads=threads)
    if x.shape == y.shape and np.array_equal(x, y):
        # Reuse the exact-zero diagonal so identical inputs give V-statistic 0 exactly.
        cross_rows = cross_cols = yy_rows = xx_rows
    else:
        cross_rows, cross_cols = _pairwise_sums(x, y, threads=threads)
        yy_rows, _ = _pairwise_sums(y, y, same=True, threads=threads)
    cross_total = math.fsum(cross_rows)
    xx_total = math.fsum(xx_rows)
    yy_total = math.fsum(yy_rows)

    cross = cross_total / (nx * ny)
    wx = _within_mean(xx_total, nx, mode)
    wy = _within_mean(yy_total, ny, mode)
    value = cross - 0.5 * wx - 0.5 * wy

    def jackknife_var(n_a, a_cross_rows, a_within_rows, a_within_total, n_b, other_within):
        if n_a < 3 and mode == USTAT:
            # Leave-one-out within term undefined; keep the full-sample one.
            within_loo = np.full(n_a, _within_mean(a_within_total, n_a, mode))
        else:
            within_loo = _within_mean(a_within_total - 2.0 * a_within_rows, n_a - 1, mode)
        cross_loo = (cross_total - a_cross_rows) / ((n_a - 1) * n_b)
        reps = cross_loo - 0.5 * within_loo - 0.5 * other_within
        dev = reps - reps.mean()
        return (n_a - 1) / n_a * float(dev @ dev)

    var = jackknife_var(nx, cross_rows, xx_rows, xx_total, ny, wy)
    var += jackknife_var(ny, cross_cols, yy_rows, yy_total, nx, wx)
    return EstimateWithError(float(value), math.sqrt(var), nx, ny)
