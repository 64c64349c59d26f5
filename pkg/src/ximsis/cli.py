"""Command-line entry point: ``ximsis {screen,simulate,impute,xi}``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config
from .experiment import aggregate, run_outcomes, variant_label
from .impute import knn_impute
from .io import (
    fmt,
    load_survival_csv,
    load_vector,
    write_reports_csv,
    write_reports_json,
    write_screening_csv,
    write_table_csv,
)
from .rank_core import xi_nm
from .screening import MRule, ScreeningConfig, Threshold, TopD, default_model_sizes, screen
from .simgen import calibrated_bound

logger = logging.getLogger("ximsis")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _m_rule(text):
    try:
        return MRule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ximsis", allow_abbrev=False, description="Rank-correlation feature screening for censored survival data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("screen", help="rank features of a survival table")
    p.add_argument("--data", required=True, help="delimited file with a header row")
    p.add_argument("--time", required=True, help="name of the observed-time column")
    p.add_argument("--status", required=True, help="name of the event indicator column (1 = event)")
    p.add_argument("--m-rule", type=_m_rule, default=MRule("auto", 1.0), help="auto:C or fixed:M (default auto:1)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--top", type=_positive_int, help="keep the D best features (default ceil(n/ln n))")
    group.add_argument("--threshold", type=float, help="keep features with omega >= G")
    p.add_argument("--seed", type=int, default=0, help="tie-breaking seed")
    p.add_argument("--workers", type=_positive_int, default=None)
    p.add_argument("--out", help="output CSV (default: standard output)")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("simulate", help="run a simulation scenario")
    p.add_argument("--config", required=True, help="YAML scenario file")
    p.add_argument("--quick", action="store_true", help="apply the quick overrides (fewer replications, smaller p)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--workers", type=_positive_int, default=None, help="replication worker processes")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("impute", help="fill missing feature cells by weighted KNN")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=_positive_int, default=15)
    p.add_argument("--out", required=True)
    p.add_argument("--time", help="time column, passed through unchanged")
    p.add_argument("--status", help="status column, passed through unchanged")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; imputation is deterministic")
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("xi", help="print xi_{n,M}(u, v)")
    p.add_argument("--u", required=True, help="file with one value per line")
    p.add_argument("--v", required=True)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=0, help="tie-breaking seed")
    p.set_defaults(func=cmd_xi)
    return parser


def cmd_screen(args) -> None:
    table = load_survival_csv(args.data, args.time, args.status)
    if table.n_missing:
        raise ValueError(f"{table.n_missing} missing feature cells; run 'ximsis impute' first")
    resp = table.response()
    if args.threshold is not None:
        selection = Threshold(args.threshold)
    else:
        selection = TopD(args.top if args.top is not None else default_model_sizes(resp.n)[0])
    cfg = ScreeningConfig(args.m_rule, selection, args.seed, args.workers)
    result = screen(table.features, resp, cfg)
    write_screening_csv(args.out or sys.stdout, result, table.feature_names)
    logger.info("screened %d features with M=%d; kept %d", len(result.omega), result.M_used, len(result.selected))


def cmd_simulate(args) -> None:
    spec = load_config(args.config, quick=args.quick)
    if args.seed is not None:
        spec = replace(spec, scenario=replace(spec.scenario, seed=args.seed))
    if args.workers is not None:
        spec = replace(spec, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    c_upper = calibrated_bound(spec.scenario)
    logger.info("%s: censoring bound c = %s", spec.scenario.name, fmt(c_upper))
    outcomes = run_outcomes(spec)
    reports = aggregate(spec, outcomes)
    stem = spec.scenario.name or "scenario"
    write_reports_csv(out / f"{stem}.csv", reports)
    scenario = asdict(spec.scenario)
    metadata = {
        "scenario": scenario,
        "n_reps": spec.n_reps,
        "m_variants": [variant_label(v) for v in spec.m_variants],
        "m_rules": [str(v) for v in spec.m_variants],
        "M": [v.resolve(spec.scenario.n) for v in spec.m_variants],
        "model_sizes": list(spec.model_sizes),
        "censoring_bound": c_upper,
        "active_set": [a + 1 for a in spec.scenario.active_set],
        "quick": bool(args.quick),
        "version": __version__,
    }
    write_reports_json(out / f"{stem}.json", reports, metadata)
    orders = np.stack([[rec.omega_order for rec in o.records] for o in outcomes], axis=1)
    np.savez_compressed(
        out / f"{stem}_records.npz",
        omega_order=orders,
        active_set=np.asarray(spec.scenario.active_set),
        realized_cr=np.array([o.realized_cr for o in outcomes]),
    )
    for r in reports:
        print(f"{r.variant}\td={r.d}\tmedian={fmt(r.median)}\tIQR={fmt(r.iqr)}\tP_a={r.p_a:.3f}")


def cmd_impute(args) -> None:
    table = load_survival_csv(args.data, args.time, args.status)
    filled = knn_impute(table.features, args.k)
    header = list(table.feature_names)
    columns = [filled[:, j] for j in range(filled.shape[1])]
    for name, col in ((table.time_col, table.time), (table.status_col, table.status)):
        if name is not None:
            header.append(name)
            columns.append(col)
    write_table_csv(args.out, header, columns)
    logger.info("imputed %d cells with K=%d (inverse-distance weights)", table.n_missing, args.k)


def cmd_xi(args) -> None:
    u = load_vector(args.u)
    v = load_vector(args.v)
    print(f"{xi_nm(u, v, args.m, tie_seed=args.seed):.17g}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        print(f"error: UsageError: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except Exception as exc:  # noqa: BLE001
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
