"""Command-line front end.

Subcommands: simulate, estimate, curve, design, reproduce-nv.  Exit
codes are a stable contract: 0 success, 1 reproduction check failed,
2 parse error, 3 invalid data, 4 ill-conditioned design.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import design as design_mod
from . import fileio, nv
from .core import (
    DimensionMismatchError,
    InvalidStateError,
    NonHermitianError,
    ParameterError,
)
from .estimator import (
    EstimationResult,
    ExperimentRecord,
    IllConditionedDesignError,
    InsufficientDataError,
    build_system,
    error_stats,
    solve,
)
from .protocol import OMEGA_LABELS, ProtocolRun, run_protocol

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_INVALID_DATA = 3
EXIT_ILL_CONDITIONED = 4

TWO_PI = 2.0 * math.pi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakspin",
        description="Two-qubit weak-measurement simulator and coupling-tensor estimator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="forward-simulate configured runs into records")
    sim.add_argument("--config", required=True, help="scenario config (JSON)")
    sim.add_argument("--out", default="-", help="output record file, '-' for stdout")
    sim.add_argument("--seed", type=int, default=None, help="override config seed")
    sim.add_argument("--noise", type=float, default=None, help="override config noise spread")
    sim.add_argument("--dt-scale", type=float, default=1.0, help="multiply every dt")
    sim.add_argument("--two-pi", action="store_true", help="treat MHz values as 2*pi rad/us")

    est = sub.add_parser("estimate", help="invert a record file into a coupling tensor")
    est.add_argument("--records", required=True, help="record file from simulate")
    est.add_argument("--config", default=None, help="config supplying the true tensor")
    est.add_argument("--out", default="-", help="output report file, '-' for stdout")
    est.add_argument("--kappa-max", type=float, default=None, help="condition-number cap")
    est.add_argument("--two-pi", action="store_true", help="treat MHz values as 2*pi rad/us")

    cur = sub.add_parser("curve", help="emit the model-error curve of one run as CSV")
    cur.add_argument("--config", required=True)
    cur.add_argument("--run-index", type=int, required=True, help="0-based run index")
    cur.add_argument("--grid", default=None, help="MIN:MAX:STEP in us")
    cur.add_argument("--threshold", type=float, default=None, help="dent threshold")
    cur.add_argument("--out", default="-", help="output CSV, '-' for stdout")
    cur.add_argument("--two-pi", action="store_true")

    des = sub.add_parser("design", help="sample and score candidate parameter sets")
    des.add_argument("--config", required=True, help="config supplying the prior tensor")
    des.add_argument("--count", type=int, default=50, help="number of candidates")
    des.add_argument("--seed", type=int, default=None)
    des.add_argument("--threshold", type=float, default=None)
    des.add_argument("--grid", default=None, help="MIN:MAX:STEP in us")
    des.add_argument("--out", default="-")
    des.add_argument("--two-pi", action="store_true")

    rep = sub.add_parser("reproduce-nv", help="run the bundled NV validation scenario")
    rep.add_argument("--noise", type=float, default=0.0)
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--dt-scale", type=float, default=1.0)
    rep.add_argument("--two-pi", action="store_true")
    return parser


def _angular_scale(args) -> float:
    return TWO_PI if getattr(args, "two_pi", False) else 1.0


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_simulate(args) -> int:
    config = fileio.load_config(args.config)
    seed = config.options.seed if args.seed is None else args.seed
    noise = config.options.noise if args.noise is None else args.noise
    if noise < 0.0:
        raise ParameterError(f"noise spread must be >= 0, got {noise}")
    if not args.dt_scale > 0.0:
        raise ParameterError(f"dt scale must be positive, got {args.dt_scale}")
    scale = _angular_scale(args)
    g_sim = config.coupling.scaled(scale)
    rng = np.random.default_rng(seed)
    records = []
    for run in config.runs:
        run = run if args.dt_scale == 1.0 else _rescaled(run, args.dt_scale)
        outcome = run_protocol(run, g_sim, config.locals_)
        r_f, exp_val = outcome.r_f, outcome.expectation
        if noise > 0.0:
            r_f = r_f + rng.normal(scale=noise, size=3)
            exp_val = float(np.clip(exp_val + rng.normal(scale=noise), -1.0, 1.0))
        records.append(
            ExperimentRecord(
                r_i=run.r_i, r_f=r_f, p=run.p, q=outcome.q,
                dt=run.dt, expectation=exp_val,
            )
        )
    meta = {
        "config_sha256": fileio.sha256_of_file(args.config),
        "seed": seed,
        "noise": noise,
        "dt_scale": args.dt_scale,
        "angular_scale": scale,
        "tool_version": fileio.TOOL_VERSION,
    }
    _write_text(args.out, fileio.dump_json(fileio.records_to_doc(records, meta)))
    return EXIT_OK


def _rescaled(run: ProtocolRun, factor: float) -> ProtocolRun:
    return ProtocolRun(r_i=run.r_i, p=run.p, q_tilde=run.q_tilde, dt=run.dt * factor)


def cmd_estimate(args) -> int:
    records = fileio.load_records(args.records)
    scale = _angular_scale(args)
    g_true = None
    kappa_max = None
    if args.config is not None:
        config = fileio.load_config(args.config)
        g_true = config.coupling
        kappa_max = config.options.kappa_max
    if args.kappa_max is not None:
        kappa_max = args.kappa_max
    kwargs = {} if kappa_max is None else {"kappa_max": kappa_max}
    a, zeta = build_system(records)
    raw = solve(a, zeta, **kwargs)
    g_est = raw.g_est.scaled(1.0 / scale)
    per_record = (a @ raw.g_est.values - zeta).tolist()
    stats = error_stats(g_true, g_est) if g_true is not None else None
    provenance = {
        "records_sha256": fileio.sha256_of_file(args.records),
        "angular_scale": scale,
        "tool_version": fileio.TOOL_VERSION,
    }
    records_meta = fileio.load_records_meta(args.records)
    if records_meta:
        provenance["records_meta"] = records_meta
    if args.config is not None:
        provenance["config_sha256"] = fileio.sha256_of_file(args.config)
    report = fileio.report_doc(
        EstimationResult(
            g_est=g_est,
            condition_number=raw.condition_number,
            residual_norm=raw.residual_norm,
            error_stats=stats,
        ),
        per_record_residuals=per_record,
        provenance=provenance,
    )
    _write_text(args.out, fileio.dump_json(report))
    summary = "estimated coupling (MHz): " + ", ".join(
        f"{k}={v:+.4f}" for k, v in zip(OMEGA_LABELS, g_est.values)
    )
    if stats is not None:
        summary += f"; error {stats[0]:+.4f} +/- {stats[1]:.4f} MHz"
    print(summary)
    return EXIT_OK


def cmd_curve(args) -> int:
    config = fileio.load_config(args.config)
    if not 0 <= args.run_index < len(config.runs):
        raise InvalidStateError(
            f"run index {args.run_index} out of range 0..{len(config.runs) - 1}"
        )
    grid_spec = args.grid if args.grid is not None else config.options.grid
    times = fileio.grid_times(fileio.parse_grid_spec(grid_spec))
    threshold = (
        config.options.dent_threshold if args.threshold is None else args.threshold
    )
    scale = _angular_scale(args)
    run = config.runs[args.run_index]
    curve = design_mod.correction_curve(
        run.r_i, run.p, run.q_tilde, config.coupling.scaled(scale),
        config.locals_, times,
    )
    dents = set(design_mod.find_dents(curve, threshold))
    flags = [t in dents for t in curve.times]
    lines = fileio.curve_csv_lines(curve.times, curve.values, flags)
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_design(args) -> int:
    config = fileio.load_config(args.config)
    seed = config.options.seed if args.seed is None else args.seed
    threshold = (
        config.options.dent_threshold if args.threshold is None else args.threshold
    )
    grid_spec = args.grid if args.grid is not None else config.options.grid
    times = fileio.grid_times(fileio.parse_grid_spec(grid_spec))
    scale = _angular_scale(args)
    candidates = design_mod.sample_designs(
        seed,
        config.coupling.scaled(scale),
        args.count,
        times=times,
        threshold=threshold,
        locals_=config.locals_,
    )
    doc = {
        "candidates": [
            {
                "condition_number": c.condition_number,
                "max_correction": c.max_correction,
                "runs": [
                    {
                        "r_i": r.r_i.tolist(),
                        "p": r.p.tolist(),
                        "q": r.q_tilde.tolist(),
                        "dt": r.dt,
                    }
                    for r in c.runs
                ],
            }
            for c in candidates
        ],
        "seed": seed,
        "count": args.count,
    }
    _write_text(args.out, fileio.dump_json(doc))
    best = candidates[0]
    print(
        f"best of {args.count}: condition number {best.condition_number:.3f},"
        f" max model error {best.max_correction:.3e}"
    )
    return EXIT_OK


def cmd_reproduce_nv(args) -> int:
    if not args.dt_scale > 0.0:
        raise ParameterError(f"dt scale must be positive, got {args.dt_scale}")
    if args.noise < 0.0:
        raise ParameterError(f"noise spread must be >= 0, got {args.noise}")
    outcome = nv.reproduce(
        dt_scale=args.dt_scale,
        noise=args.noise,
        seed=args.seed,
        angular_scale=_angular_scale(args),
    )
    np.set_printoptions(precision=4, suppress=True)
    print("true coupling (MHz):")
    print(outcome.g_true.matrix)
    print("estimated coupling (MHz):")
    print(outcome.g_est.matrix)
    print("published reference estimate (MHz):")
    print(outcome.reference)
    print(
        f"error: {outcome.error_mean:+.4f} +/- {outcome.error_std:.4f} MHz"
        f"  (reference {nv.NV_REFERENCE_ERROR_MHZ[0]:+.3f} +/-"
        f" {nv.NV_REFERENCE_ERROR_MHZ[1]:.3f});"
        f" max component error {outcome.max_component_error:.4f} MHz;"
        f" condition number {outcome.condition_number:.2f}"
    )
    if outcome.passed:
        print("PASS")
        return EXIT_OK
    print("FAIL component-wise differences (MHz):")
    diff = outcome.g_est.matrix - outcome.g_true.matrix
    for label, value in zip(OMEGA_LABELS, outcome.g_est.values - outcome.g_true.values):
        print(f"  {label}: {value:+.4f}")
    print(diff)
    return EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags, which matches the parse-error code
        return int(exc.code) if exc.code else EXIT_OK
    handlers = {
        "simulate": cmd_simulate,
        "estimate": cmd_estimate,
        "curve": cmd_curve,
        "design": cmd_design,
        "reproduce-nv": cmd_reproduce_nv,
    }
    try:
        return handlers[args.command](args)
    except json.JSONDecodeError as exc:
        print(
            f"error: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return EXIT_PARSE_ERROR
    except fileio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except IllConditionedDesignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ILL_CONDITIONED
    except (
        InvalidStateError,
        InsufficientDataError,
        DimensionMismatchError,
        NonHermitianError,
        ParameterError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_DATA


if __name__ == "__main__":
    raise SystemExit(main())
