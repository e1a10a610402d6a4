"""
CSV and SVG output for sweep results.

Floats are written with ``repr`` so that re-reading the CSV reproduces every
value exactly. Plots are small hand-written SVG files: one circle per record,
a 45 degree reference line and the R^2 in the title.
"""
from __future__ import annotations

import csv
import math
import os
import re
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .harness import GroupFit, SweepRecord, fit_groups, gaussian_direct_check, group_records

SWEEP_COLUMNS = (
    "d", "family", "param", "mu1", "cov_kind", "cov_index", "seed", "estimate", "std_error",
    "f_mu2", "f_mu4", "f_frob2", "f_trace2", "f_beta_mu", "feature1", "feature2",
    "predicted", "flags",
)
FITS_COLUMNS = ("d", "family", "param", "alpha1", "alpha2", "r_squared", "n_records", "status")


def _num(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _opt_float(s: str):
    return None if s == "" else float(s)


def record_row(r: SweepRecord) -> list[str]:
    f = r.functionals
    f1, f2 = r.features
    return [
        str(r.d), r.family, _num(r.param), _num(r.mu1), r.cov_kind, str(r.cov_index), str(r.seed),
        _num(r.estimate.value), _num(r.estimate.std_error),
        _num(f.mu_norm_sq), _num(f.mu_norm_4), _num(f.delta_frob_sq), _num(f.trace_sq),
        _num(f.beta_dot_mu), _num(f1), _num(f2), _num(r.predicted), ";".join(r.flags),
    ]


def write_sweep_csv(records: Sequence[SweepRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in sorted(records, key=lambda r: r.sort_key):
            w.writerow(record_row(r))


def read_sweep_csv(path) -> list[dict]:
    """Parse ``sweep.csv`` back into dictionaries of typed values."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {
                "d": int(row["d"]), "family": row["family"], "param": _opt_float(row["param"]),
                "cov_kind": row["cov_kind"], "cov_index": int(row["cov_index"]),
                "seed": int(row["seed"]),
                "flags": tuple(f for f in row["flags"].split(";") if f),
            }
            for key in SWEEP_COLUMNS:
                if key not in parsed:
                    parsed[key] = float(row[key])
            out.append(parsed)
    return out


def write_fits_csv(fits: Sequence[GroupFit], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FITS_COLUMNS)
        for g in fits:
            w.writerow([str(g.d), g.family, _num(g.param), _num(g.alpha1), _num(g.alpha2),
                        _num(g.r_squared), str(g.n_records), g.status])


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")


def scatter_svg(estimated, predicted, title: str, size: int = 420) -> str:
    """Estimated (y) versus predicted (x) scatter with a 45 degree line."""
    est = np.asarray(estimated, dtype=float)
    pred = np.asarray(predicted, dtype=float)
    finite = np.isfinite(est) & np.isfinite(pred)
    vals = np.concatenate([est[finite], pred[finite]]) if finite.any() else np.array([0.0, 1.0])
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo <= 0:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    margin = 50
    span = size - 2 * margin

    def px(v):
        return margin + (v - lo) / (hi - lo) * span

    def py(v):
        return size - margin - (v - lo) / (hi - lo) * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<text x="{size / 2:.1f}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="black"/>',
        f'<line class="reference" x1="{px(lo):.2f}" y1="{py(lo):.2f}" x2="{px(hi):.2f}" '
        f'y2="{py(hi):.2f}" stroke="gray" stroke-dasharray="4,3"/>',
        f'<text x="{size / 2:.1f}" y="{size - 12}" text-anchor="middle" font-size="11">predicted D^2</text>',
        f'<text x="14" y="{size / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {size / 2:.1f})">estimated D^2</text>',
        f'<text x="{margin}" y="{size - margin + 14}" font-size="9">{lo:.3g}</text>',
        f'<text x="{size - margin}" y="{size - margin + 14}" font-size="9" text-anchor="end">{hi:.3g}</text>',
    ]
    for e, p in zip(est, pred):
        if np.isfinite(e) and np.isfinite(p):
            parts.append(f'<circle class="marker" cx="{px(p):.2f}" cy="{py(e):.2f}" r="3" '
                         f'fill="steelblue" fill-opacity="0.7"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _group_plot(records: Sequence[SweepRecord], fit: GroupFit | None):
    label = f"d={records[0].d} {records[0].family_label}"
    est = [r.estimate.value for r in records]
    if records[0].family == "Gaussian":
        check = gaussian_direct_check(records)
        return est, list(check.predicted), f"{label}: closed form, R^2={check.r_squared:.4f}"
    if fit is None or fit.status in ("skipped", "degenerate"):
        return est, [math.nan] * len(records), f"{label}: no fit"
    pred = [fit.alpha1 * r.features[0] + fit.alpha2 * r.features[1] for r in records]
    return est, pred, f"{label}: regression, R^2={fit.r_squared:.4f}"


def emit_report(records: Sequence[SweepRecord], fits: Sequence[GroupFit] | None, out_dir) -> list[Path]:
    """
    Write ``sweep.csv``, ``fits.csv`` and one SVG scatter per group into ``out_dir``.

    Returns the written paths.
    """
    if not records:
        raise ValueError("no records to report")
    if fits is None:
        fits = fit_groups(records)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    written = [out / "sweep.csv", out / "fits.csv"]
    write_sweep_csv(records, written[0])
    write_fits_csv(fits, written[1])
    by_group = {(g.d, g.family, g.param): g for g in fits}
    for key, recs in group_records(records).items():
        est, pred, title = _group_plot(recs, by_group.get(key))
        path = out / f"scatter_d{key[0]}_{_slug(recs[0].family_label)}.svg"
        path.write_text(scatter_svg(est, pred, title))
        written.append(path)
    return written

