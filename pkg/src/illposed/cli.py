"""Command-line interface.

Subcommands: ``run`` (noise sweep, error/bound rows), ``sweep`` (run plus
fitted convergence slopes), ``validate-filter`` (certify a filter scheme
against its norm-bound and deviation-order contracts), ``m0`` (a-priori
contraction index).  Exit codes: 0 success, 1 usage/config error,
2 validation failure, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .filters import (
    filter_by_name,
    filter_bound_check,
    filter_error_check,
    gamma_property_check,
)
from .harness import ConfigError, convergence_study, emit_report, load_config, run_all
from .propagators import family_by_name
from .solver import PicardConvergenceError, contraction_index

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="illposed",
        description="Filter regularization experiments for ill-posed evolution equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured noise sweep")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--out", required=True, help="output path (.csv or .json)")
    run.add_argument("--format", choices=("csv", "json"), default=None)
    run.add_argument("--seed", type=int, default=None, help="override the config seed")

    sweep = sub.add_parser("sweep", help="full convergence study with fitted slopes")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--format", choices=("csv", "json"), default=None)
    sweep.add_argument("--seed", type=int, default=None)

    validate = sub.add_parser(
        "validate-filter", help="certify a filter scheme's bounded-operator contract")
    validate.add_argument("--family", required=True)
    validate.add_argument("--filter", required=True, dest="filter_kind")
    validate.add_argument("--beta", required=True, type=float)
    validate.add_argument("--T", required=True, type=float, dest="horizon")

    m0 = sub.add_parser("m0", help="smallest m with (M2*L*gammaT*T)**m/m! < 1")
    m0.add_argument("--M2", required=True, type=float, dest="m2")
    m0.add_argument("--L", required=True, type=float, dest="lipschitz")
    m0.add_argument("--gammaT", required=True, type=float, dest="gamma_horizon")
    m0.add_argument("--T", required=True, type=float, dest="horizon")

    return parser


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    if path.endswith(".json"):
        return "json"
    if path.endswith(".csv"):
        return "csv"
    raise ConfigError(f"cannot infer output format from {path!r}; pass --format")


def _cmd_run(args, study: bool) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    fmt = _infer_format(args.out, args.format)
    report = convergence_study(cfg) if study else run_all(cfg)
    emit_report(report, fmt, args.out)
    for notice in report.notices:
        print(f"notice: {notice}")
    if study:
        for row in report.slopes:
            print(
                f"t={row['t']:.6g}  slope={row['slope']:+.4f}  "
                f"predicted={row['theoretical_exponent']:+.4f}  "
                f"({row['points']} noise levels)"
            )
    print(f"wrote {len(report.rows)} rows to {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    family = family_by_name(args.family)
    scheme = filter_by_name(args.filter_kind, family, args.beta, args.horizon)

    gamma_report = gamma_property_check(scheme.gamma)
    bound = filter_bound_check(scheme)
    error = filter_error_check(scheme)

    print(f"filter {scheme.kind} on {family.name}, beta={scheme.beta:g}, T={scheme.horizon:g}")
    print(
        f"  amplification profile axioms: identity {gamma_report.identity_max_error:.2e}, "
        f"product {gamma_report.product_max_rel_error:.2e}, "
        f"quotient {gamma_report.quotient_max_rel_error:.2e}, "
        f"divergence {'ok' if gamma_report.divergence_ok else 'FAIL'}"
        f" -> {'pass' if gamma_report.passed else 'FAIL'}"
    )
    print(
        f"  norm bound: sup|Q_f|/gamma = {bound.sup_ratio_q:.6f} (<= {bound.m1:g}), "
        f"sup|S_f|/gamma = {bound.sup_ratio_s:.6f} (<= {bound.m2:g})"
        f" -> {'pass' if bound.passed else 'FAIL'}"
    )
    print(
        f"  deviation order: sup weighted Q error * gamma(T-t) = {error.sup_weighted_q:.6f}, "
        f"S analogue = {error.sup_weighted_s:.6f} (<= 1)"
        f" -> {'pass' if error.passed else 'FAIL'}"
    )
    passed = gamma_report.passed and bound.passed and error.passed
    print("verdict:", "pass" if passed else "FAIL")
    return EXIT_OK if passed else EXIT_VALIDATION


def _cmd_m0(args) -> int:
    index = contraction_index(args.m2, args.lipschitz, args.gamma_horizon, args.horizon)
    print(index)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, study=False)
        if args.command == "sweep":
            return _cmd_run(args, study=True)
        if args.command == "validate-filter":
            return _cmd_validate(args)
        if args.command == "m0":
            return _cmd_m0(args)
        parser.error(f"unknown command {args.command!r}")
    except PicardConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        history = err.residual_history
        tail = ", ".join(f"{r:.3e}" for r in history[-5:])
        print(f"residual history tail: {tail}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
