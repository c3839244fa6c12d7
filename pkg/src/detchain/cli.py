"""Command-line interface.

Subcommands: sweep, thresholds, gap, profile, validate, fit-peak,
rescale.  Exit codes: 0 success, 1 validation/analysis failure, 2 usage
or config error.  Report paths write delimited data and, with --plot,
a rendered figure next to it.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, SweepConfig, load_config, log_grid
from .diagnostics import gap_vs_gamma, most_conducting_state
from .harness import (
    RESCALE_CHOICES,
    HarnessError,
    PeakFitError,
    detect_det_window,
    fit_peak,
    rescale_curves,
    run_sweep,
)
from .model import ChainParams, ModelError
from .output import (
    format_float,
    json_text,
    read_sweep_csv,
    realizations_csv_text,
    summary_dict,
    sweep_csv_text,
    table_csv_text,
    write_text,
)
from .theory import TheoryError, gamma_critical, predict_thresholds
from .validate import run_validation

USAGE_ERROR = 2
FAILURE = 1


def _alpha_arg(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detchain",
        description="Steady-state transport through disordered chains with power-law hopping",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a disorder sweep from a config file")
    p_sweep.add_argument("--config", required=True, help="flat key=value config file")
    p_sweep.add_argument("--csv", help="override output CSV path")
    p_sweep.add_argument("--json", dest="json_path", help="override summary JSON path")
    p_sweep.add_argument("--workers", type=int, help="override worker count")
    p_sweep.add_argument("--plot", action="store_true", help="render the curve next to the CSV")

    p_thr = sub.add_parser("thresholds", help="print closed-form predictors")
    p_thr.add_argument("--n", type=int, required=True)
    p_thr.add_argument("--alpha", type=_alpha_arg, required=True)
    p_thr.add_argument("--gamma", type=float, default=1.0)
    p_thr.add_argument("--omega", type=float, default=0.0, help="nearest-neighbor amplitude")
    p_thr.add_argument("--w", type=float, default=1.0, help="disorder strength for gamma_cr and xi")
    p_thr.add_argument("--json", dest="as_json", action="store_true")

    p_gap = sub.add_parser("gap", help="numerical vs closed-form gap scan over gamma")
    p_gap.add_argument("--n", type=int, required=True)
    p_gap.add_argument("--alpha", type=_alpha_arg, required=True)
    p_gap.add_argument("--w", type=float, required=True)
    p_gap.add_argument("--gamma-min", type=float, required=True)
    p_gap.add_argument("--gamma-max", type=float, required=True)
    p_gap.add_argument("--points", type=int, default=12)
    p_gap.add_argument("--realizations", type=int, default=40)
    p_gap.add_argument("--seed", type=int, default=0)
    p_gap.add_argument("--csv", help="write the scan table here")
    p_gap.add_argument("--plot", action="store_true")

    p_prof = sub.add_parser("profile", help="site profile of the most conducting state")
    p_prof.add_argument("--n", type=int, required=True)
    p_prof.add_argument("--alpha", type=_alpha_arg, required=True)
    p_prof.add_argument("--w", type=float, action="append", required=True,
                        help="disorder strength (repeatable)")
    p_prof.add_argument("--gamma", type=float, default=1.0)
    p_prof.add_argument("--realizations", type=int, default=20)
    p_prof.add_argument("--seed", type=int, default=0)
    p_prof.add_argument("--csv", help="write site probabilities here")
    p_prof.add_argument("--plot", action="store_true")

    p_val = sub.add_parser("validate", help="run the oracle and identity suite")
    p_val.add_argument("--quick", action="store_true", help="small-chain oracle triangle only")
    p_val.add_argument("--seed", type=int, default=20260809)

    p_fit = sub.add_parser("fit-peak", help="parabolic fit of the current maximum in a sweep CSV")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--method", default="full")

    p_res = sub.add_parser("rescale", help="overlay sweeps on a rescaled disorder axis")
    p_res.add_argument("summaries", nargs="+", help="summary JSON files from previous sweeps")
    p_res.add_argument("--scale", choices=RESCALE_CHOICES, required=True)
    p_res.add_argument("--method", default="full")
    p_res.add_argument("-o", "--output", help="write the overlay table here")
    p_res.add_argument("--plot", action="store_true")

    return parser


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.csv:
        overrides["output_csv"] = args.csv
    if args.json_path:
        overrides["output_json"] = args.json_path
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = replace(config, **overrides)
    result = run_sweep(config)

    window = None
    fit = None
    try:
        window = detect_det_window(result, method=config.methods[0])
        if window is not None:
            fit = fit_peak(result, method=config.methods[0])
    except (HarnessError, PeakFitError):
        pass
    thresholds = predict_thresholds(config.chain, w_for_gamma_cr=1.0)

    csv_path = config.output_csv or "sweep.csv"
    write_text(csv_path, sweep_csv_text(result))
    print(f"wrote {csv_path}")
    json_path = config.output_json or str(Path(csv_path).with_suffix(".json"))
    write_text(json_path, json_text(summary_dict(result, thresholds, window, fit)))
    print(f"wrote {json_path}")
    if config.output_realizations:
        write_text(config.output_realizations, realizations_csv_text(result))
        print(f"wrote {config.output_realizations}")
    if args.plot:
        from .plots import plot_sweep

        fig_path = plot_sweep(result, Path(csv_path).with_suffix(".png"), window)
        print(f"wrote {fig_path}")
    if window is not None:
        print(
            f"DET window: minimum near W={format_float(window.w_min_loc)}, "
            f"maximum near W={format_float(window.w_max_loc)} "
            f"(ratio {window.ratio:.3g})"
        )
    else:
        print("DET window: none detected")
    return 0


def _cmd_thresholds(args) -> int:
    params = ChainParams(
        n_sites=args.n, alpha=args.alpha, gamma=args.gamma, omega_nn=args.omega
    )
    thresholds = predict_thresholds(params, w_for_gamma_cr=args.w)
    values = thresholds.as_dict()
    if args.as_json:
        print(json_text(values), end="")
        return 0
    width = max(len(k) for k in values)
    for key, value in values.items():
        text = "n/a" if value is None else format_float(value)
        print(f"{key:<{width}}  {text}")
    return 0


def _cmd_gap(args) -> int:
    gammas = log_grid(args.gamma_min, args.gamma_max, args.points)
    rows = gap_vs_gamma(
        args.n, args.alpha, args.w, gammas, n_realizations=args.realizations, seed=args.seed
    )
    try:
        g_cr = gamma_critical(args.w, args.n, args.alpha)
    except TheoryError:
        g_cr = None
    text = table_csv_text(rows, ("gamma", "gap_numeric", "gap_theory"))
    if args.csv:
        write_text(args.csv, text)
        print(f"wrote {args.csv}")
    else:
        print(text, end="")
    if g_cr is not None:
        print(f"gamma_cr = {format_float(g_cr)}")
    if args.plot:
        from .plots import plot_gap

        base = Path(args.csv) if args.csv else Path("gap_scan.csv")
        fig_path = plot_gap(rows, base.with_suffix(".png"), g_cr, args.w / args.n)
        print(f"wrote {fig_path}")
    return 0


def _cmd_profile(args) -> int:
    params = ChainParams(n_sites=args.n, alpha=args.alpha, gamma=args.gamma,
                         gamma_pump=args.gamma, gamma_drain=args.gamma)
    profiles = []
    for w in args.w:
        profiles.append(
            most_conducting_state(params, w, args.seed, n_realizations=args.realizations)
        )
    rows = []
    for prof in profiles:
        for site, prob in enumerate(prof.probabilities, start=1):
            rows.append({"w": prof.width, "site": site, "probability": float(prob)})
    if args.csv:
        write_text(args.csv, table_csv_text(rows, ("w", "site", "probability")))
        print(f"wrote {args.csv}")
    for prof in profiles:
        tau = "inf (divergent)" if prof.divergent else format_float(prof.tau_contrib)
        print(
            f"W={prof.width:g}: state {prof.state_index}, PR={prof.pr:.4g}, "
            f"peak site {prof.peak_site + 1}, tau_k={tau}"
        )
    if args.plot:
        from .plots import plot_profiles

        base = Path(args.csv) if args.csv else Path("profiles.csv")
        fig_path = plot_profiles(profiles, base.with_suffix(".png"))
        print(f"wrote {fig_path}")
    return 0


def _cmd_validate(args) -> int:
    outcomes = run_validation(quick=args.quick, seed=args.seed)
    failed = 0
    for check in outcomes:
        status = "PASS" if check.passed else "FAIL"
        failed += not check.passed
        print(f"[{status}] {check.name}: {check.detail}")
    print(f"{len(outcomes) - failed}/{len(outcomes)} checks passed")
    return 0 if failed == 0 else FAILURE


def _cmd_fit_peak(args) -> int:
    from .harness import sweep_result_from_rows

    rows = read_sweep_csv(args.csv)
    if not any(r.method == args.method for r in rows):
        print(f"error: no rows for method {args.method!r} in {args.csv}", file=sys.stderr)
        return USAGE_ERROR
    result = sweep_result_from_rows(rows)
    window = detect_det_window(result, method=args.method)
    if window is None:
        print("no DET window: the current decays monotonically", file=sys.stderr)
        return FAILURE
    try:
        fit = fit_peak(result, method=args.method)
    except PeakFitError as exc:
        print(f"peak fit failed: {exc}", file=sys.stderr)
        return FAILURE
    print(f"w_fit = {format_float(fit.w_fit)} +- {format_float(fit.errorbar)}")
    print(f"curvature = {format_float(fit.curvature)}")
    return 0


def _cmd_rescale(args) -> int:
    from .harness import sweep_result_from_rows

    results = []
    for summary_path in args.summaries:
        summary = json.loads(Path(summary_path).read_text())
        cfg = summary["config"]
        chain = ChainParams(
            n_sites=cfg["n_sites"],
            alpha=math.inf if cfg["alpha"] == "inf" else float(cfg["alpha"]),
            gamma=cfg["gamma"],
            omega_nn=cfg["omega_nn"],
            gamma_pump=cfg["gamma_pump"],
            gamma_drain=cfg["gamma_drain"],
            hbar=cfg["hbar"],
        )
        csv_path = cfg.get("output_csv")
        if not csv_path:
            print(f"error: {summary_path} does not reference its CSV", file=sys.stderr)
            return USAGE_ERROR
        csv_file = Path(csv_path)
        if not csv_file.is_absolute():
            csv_file = Path(summary_path).parent / csv_file
        results.append(sweep_result_from_rows(read_sweep_csv(csv_file), chain=chain))
    table = rescale_curves(results, args.scale, method=args.method)
    text = table_csv_text(
        table, ("curve", "method", "w", "w_scaled", "i_typ", "i_typ_scaled")
    )
    if args.output:
        write_text(args.output, text)
        print(f"wrote {args.output}")
    else:
        print(text, end="")
    if args.plot:
        from .plots import plot_rescaled

        base = Path(args.output) if args.output else Path("rescaled.csv")
        fig_path = plot_rescaled(table, base.with_suffix(".png"), args.scale)
        print(f"wrote {fig_path}")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "thresholds": _cmd_thresholds,
    "gap": _cmd_gap,
    "profile": _cmd_profile,
    "validate": _cmd_validate,
    "fit-peak": _cmd_fit_peak,
    "rescale": _cmd_rescale,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (HarnessError, TheoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
