"""
Command-line entry point: ``energy-lab <subcommand> [options]``.

Standard output is machine-readable CSV; anything meant for humans goes to
standard error. Exit codes: 0 success, 1 check failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .distributions import isotropic_scale
from .estimators import energy_distance_sq
from .expansion import (
    GAUSSIAN_PROFILE,
    SIMILARITY_CASES,
    asymptotic_expansion,
    cosine_similarity_gamma,
    gaussian_expansion,
    similarity_regime,
    spherical_expansion,
)
from .harness import fit_groups, gaussian_direct_check, group_records, mdependent_check, run_sweep
from .moments import MomentDiff, functionals, moment_diff_from_samples
from .numerics import lemma_sphere_check
from .report import emit_report

logger = logging.getLogger("energy_lab")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


def _fmt(v) -> str:
    return repr(float(v))


def _emit(rows) -> None:
    w = csv.writer(sys.stdout, lineterminator="\n")
    for row in rows:
        w.writerow(row)


def read_matrix_csv(path, what: str = "matrix") -> np.ndarray:
    """
    Read a numeric CSV (one sample per row). A leading non-numeric header
    row is skipped; any other malformed cell raises :class:`InputError`
    naming the row and column.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {what} file {path}: {exc.strerror}") from None
    rows = []
    width = None
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                if not rows and lineno == 1 and not any(_is_number(c) for c in row):
                    continue
                col = next(i for i, c in enumerate(row, start=1) if not _is_number(c))
                raise InputError(
                    f"{path}: row {lineno}, column {col}: not a number: {row[col - 1]!r}"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InputError(f"{path}: row {lineno}: expected {width} columns, got {len(values)}")
            bad = [i for i, v in enumerate(values, start=1) if not math.isfinite(v)]
            if bad:
                raise InputError(f"{path}: row {lineno}, column {bad[0]}: non-finite value")
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _threads(args, default: int | None = 1) -> int | None:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("ENERGY_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"ENERGY_LAB_THREADS must be an integer, got {env!r}") from None
    return default


def cmd_estimate(args) -> int:
    x = read_matrix_csv(args.x_file, "x")
    y = read_matrix_csv(args.y_file, "y")
    if x.shape[1] != y.shape[1]:
        raise InputError(f"dimension mismatch: {args.x_file} has d={x.shape[1]}, "
                         f"{args.y_file} has d={y.shape[1]}")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise InputError("each sample file needs at least 2 rows")
    est = energy_distance_sq(x, y, mode=args.mode, threads=_threads(args))
    _emit([[_fmt(est.value), _fmt(est.std_error), est.n_x, est.n_y]])
    return EXIT_OK


def cmd_predict(args) -> int:
    if args.x_file and args.y_file:
        x = read_matrix_csv(args.x_file, "x")
        y = read_matrix_csv(args.y_file, "y")
        if x.shape[1] != y.shape[1]:
            raise InputError("dimension mismatch between sample files")
        if x.shape[0] < 3 or y.shape[0] < 3:
            raise InputError("each sample file needs at least 3 rows")
        md = moment_diff_from_samples(x, y)
        lam = args.lam
        if lam is None:
            lam = isotropic_scale(np.atleast_2d(np.cov(x, rowvar=False)),
                                  np.atleast_2d(np.cov(y, rowvar=False)))
    elif args.mu_file and args.delta_file:
        mu = read_matrix_csv(args.mu_file, "mu").reshape(-1)
        delta = read_matrix_csv(args.delta_file, "delta")
        beta = np.zeros_like(mu) if not args.beta_file else read_matrix_csv(args.beta_file, "beta").reshape(-1)
        if delta.shape != (mu.size, mu.size) or beta.shape != mu.shape:
            raise InputError("mu, delta and beta files have inconsistent dimensions")
        if not np.allclose(delta, delta.T):
            raise InputError(f"{args.delta_file}: matrix is not symmetric")
        md = MomentDiff(mu, delta, beta)
        if args.lam is None:
            raise InputError("--lambda is required with --mu-file/--delta-file")
        lam = args.lam
    else:
        raise InputError("give either --x-file and --y-file, or --mu-file and --delta-file")
    if not lam > 0:
        raise InputError("--lambda must be positive")
    d = md.d
    if d < 2:
        raise InputError("predictions need d >= 2")
    if args.form == "gaussian":
        res = gaussian_expansion(md.mu, md.Delta, lam)
    else:
        f = functionals(md)
        fn = spherical_expansion if args.form == "spherical" else asymptotic_expansion
        res = fn(f, lam, d, GAUSSIAN_PROFILE)
    _emit([["first_order", "third_order", "total", "lambda"],
           [_fmt(res.first_order), _fmt(res.third_order), _fmt(res.total), _fmt(lam)]])
    return EXIT_OK


def cmd_sweep(args) -> int:
    overrides = {"master_seed": args.seed, "threads": _threads(args, default=None),
                 "mode": args.mode, "n_samples": args.n_samples}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        raise InputError(str(exc)) from None
    records = run_sweep(cfg)
    fits = fit_groups(records)
    out_dir = args.out_dir or "sweep_out"
    try:
        emit_report(records, fits, out_dir)
    except OSError as exc:
        print(f"error: cannot write report to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    direct = {}
    for key, recs in group_records(records).items():
        if key[1] == "Gaussian":
            direct[key] = gaussian_direct_check(recs).r_squared
    rows = [["d", "family", "param", "r_squared", "direct_r_squared", "n_records", "status"]]
    for g in fits:
        dr = direct.get((g.d, g.family, g.param))
        rows.append([g.d, g.family, "" if g.param is None else _fmt(g.param), _fmt(g.r_squared),
                     "" if dr is None else _fmt(dr), g.n_records, g.status])
    _emit(rows)
    print(f"wrote {len(records)} records and {len(fits)} fits to {out_dir}", file=sys.stderr)
    return EXIT_OK


def cmd_sphere_check(args) -> int:
    if args.d < 2:
        raise InputError("--d must be >= 2")
    rows = lemma_sphere_check(args.d, args.n_mc, seed=args.seed if args.seed is not None else 0)
    out = [["integral", "closed_form", "monte_carlo", "std_error", "rel_error", "z_score"]]
    failed = False
    for r in rows:
        out.append([r.name, _fmt(r.closed_form), _fmt(r.monte_carlo), _fmt(r.std_error),
                    _fmt(r.rel_error), _fmt(r.z_score)])
        failed |= abs(r.z_score) > 5
    _emit(out)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_similarity(args) -> int:
    if args.table:
        if args.d is None or args.M is None:
            raise InputError("--table needs --d and --M")
        rows = [["case", "similarity"]]
        for case in SIMILARITY_CASES:
            rows.append([case, _fmt(similarity_regime(case, args.d, args.M))])
        _emit(rows)
        return EXIT_OK
    if (args.gamma_sq is None) == (args.delta_file is None):
        raise InputError("give exactly one of --gamma-sq or --delta-file")
    if args.delta_file is not None:
        delta = read_matrix_csv(args.delta_file, "delta")
        if delta.shape[0] != delta.shape[1] or not np.allclose(delta, delta.T):
            raise InputError(f"{args.delta_file}: expected a symmetric square matrix")
        frob = float(np.sum(delta * delta))
        if frob == 0.0:
            raise InputError("similarity is undefined for Delta = 0")
        d = delta.shape[0]
        if args.d is not None and args.d != d:
            raise InputError(f"--d {args.d} does not match matrix size {d}")
        gamma_sq = float(np.trace(delta)) ** 2 / frob
    else:
        if args.d is None:
            raise InputError("--gamma-sq needs --d")
        d, gamma_sq = args.d, args.gamma_sq
        if not 0.0 <= gamma_sq <= d:
            raise InputError(f"gamma_sq must lie in [0, {d}], got {gamma_sq}")
    s = cosine_similarity_gamma(gamma_sq, d)
    _emit([["similarity", "gamma_sq"], [_fmt(s), _fmt(gamma_sq)]])
    return EXIT_OK


def cmd_mdep_check(args) -> int:
    try:
        res = mdependent_check(args.d, args.M, args.delta_sq, args.rho_sq, args.mu1, args.lam,
                               args.n_samples or 2 ** 14, args.seed if args.seed is not None else 0,
                               mode=args.mode)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit([["d", "estimate", "std_error", "predicted", "predicted_banded",
            "scaled_estimate", "scaled_predicted"],
           [res.d, _fmt(res.simulated.value), _fmt(res.simulated.std_error), _fmt(res.predicted),
            _fmt(res.predicted_banded), _fmt(res.scaled_simulated), _fmt(res.scaled_predicted)]])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sweep config file (key = value with sections)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker threads (env ENERGY_LAB_THREADS)")
    common.add_argument("--out-dir", help="directory for report files")
    common.add_argument("--mode", choices=("ustat", "vstat"), default=None)
    common.add_argument("--n-samples", type=int, help="samples per distribution")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="energy-lab", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", parents=[common], help="energy distance between two CSV samples")
    p.add_argument("x_file")
    p.add_argument("y_file")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("predict", parents=[common], help="moment-expansion prediction of D^2")
    p.add_argument("--x-file")
    p.add_argument("--y-file")
    p.add_argument("--mu-file")
    p.add_argument("--delta-file")
    p.add_argument("--beta-file")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--form", choices=("gaussian", "spherical", "asymptotic"), default="gaussian")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("sweep", parents=[common], help="run a verification sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sphere-check", parents=[common], help="closed-form vs Monte-Carlo sphere integrals")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-mc", type=int, default=10 ** 6)
    p.set_defaults(func=cmd_sphere_check)

    p = sub.add_parser("similarity", parents=[common], help="gradient cosine similarity")
    p.add_argument("--gamma-sq", type=float)
    p.add_argument("--delta-file")
    p.add_argument("--d", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--rho", type=float, help="global correlation fraction (informational)")
    p.add_argument("--table", action="store_true", help="print the four asymptotic regimes")
    p.set_defaults(func=cmd_similarity)

    p = sub.add_parser("mdep-check", parents=[common], help="banded Gaussian simulation vs prediction")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--delta-sq", type=float, default=0.0)
    p.add_argument("--rho-sq", type=float, default=0.0)
    p.add_argument("--mu1", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_mdep_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.mode is None:
        args.mode = "ustat" if args.command != "sweep" else None
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
