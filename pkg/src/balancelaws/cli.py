"""Command-line entry point.

Exit codes are frozen for CI use: 0 success, 1 configuration error,
2 numerical abort (phase box / CFL / solver failure), 3 property or
threshold failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import checks, config as cfg, studies, systems
from .generalized import evaluate_generalized, solve_generalized
from .riemann import NoSolution, sample_fan
from .scheme import run
from .systems import OutOfPhaseBox

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_PROPERTY = 3


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def cmd_run(args) -> int:
    try:
        setup = cfg.load_run_config(args.config)
    except cfg.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.output_dir) if args.output_dir else setup.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg.write_manifest(out_dir / "manifest.json", cfg.manifest_for(setup))

    result = run(setup.system, setup.config, setup.u0,
                 snapshot_times=setup.snapshots)
    for i, snapshot in enumerate(result.snapshots):
        cfg.write_snapshot_csv(out_dir / cfg.snapshot_filename(i), snapshot)
    cfg.write_diagnostics_ndjson(out_dir / "diagnostics.ndjson",
                                 result.diagnostics)
    if not result.ok:
        (out_dir / "failure.json").write_text(
            __import__("json").dumps(result.failure, indent=2) + "\n")
        print(f"run aborted at level {result.failure['level']}: "
              f"{result.failure['kind']}: {result.failure['message']}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"run complete: {result.final_level.k} steps, "
          f"{len(result.snapshots)} snapshots -> {out_dir}")
    return EXIT_OK


def _riemann_system(args):
    spec = {"name": args.system}
    if args.gamma is not None:
        spec["gamma"] = args.gamma
    if args.kappa is not None:
        spec["kappa"] = args.kappa
    if args.source is not None:
        spec["source"] = {"kind": args.source, "amplitude": args.amplitude}
    if args.duct is not None:
        spec["duct"] = {"kind": args.duct, "amplitude": args.duct_amplitude,
                        "width": args.duct_width}
        if args.duct == "linear":
            spec["duct"] = {"kind": "linear", "slope": args.duct_amplitude}
    return cfg.build_system(spec)


def cmd_riemann(args) -> int:
    try:
        system = _riemann_system(args)
        left = _parse_vector(args.left)
        right = _parse_vector(args.right)
        if args.primitive:
            left = system.from_primitive(*left)
            right = system.from_primitive(*right)
        gfan = solve_generalized(system, args.t0, args.x0, left, right,
                                 jump_factor=args.jump_factor)
    except (cfg.ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoSolution, OutOfPhaseBox) as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    fan = gfan.fan
    print(f"system: {system.name}   anchor: t0={args.t0:g} x0={args.x0:g}")
    for w in fan.waves:
        speeds = (f"speed={w.lower_speed:.10g}" if w.lower_speed == w.upper_speed
                  else f"speeds=({w.lower_speed:.10g}, {w.upper_speed:.10g})")
        print(f"wave {w.family}: kind={w.kind.value} "
              f"strength={w.strength:.10g} {speeds}")
    for i, state in enumerate(fan.states):
        print(f"state {i}: " + " ".join(f"{v:.10g}" for v in state))
    if hasattr(system, "primitive") and len(fan.states) == 4:
        _, v_star, p_star = system.primitive(fan.states[1])
        print(f"star pressure = {p_star:.10g}")
        print(f"star velocity = {v_star:.10g}")
    if args.generalized and args.at:
        t, x = (float(v) for v in args.at.split(","))
        value = evaluate_generalized(gfan, t, x)
        print(f"W({t:g}, {x:g}) = " + " ".join(f"{v:.10g}" for v in value))
    if args.sample:
        rays = [float(v) for v in args.sample.split(",")]
        rows = [(xi, sample_fan(fan, xi)) for xi in rays]
        for xi, u in rows:
            print(f"xi={xi:.10g}: " + " ".join(f"{v:.10g}" for v in u))
        if args.output_dir:
            out_dir = Path(args.output_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            header = "xi," + ",".join(f"u{i + 1}" for i in range(system.p))
            lines = [header] + [
                ",".join([cfg.FLOAT_FMT % xi]
                         + [cfg.FLOAT_FMT % v for v in u]) for xi, u in rows]
            (out_dir / "samples.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_convergence(args) -> int:
    study_fn = studies.STUDIES.get(args.study)
    if study_fn is None:
        print(f"unknown study {args.study!r}; options: "
              f"{', '.join(sorted(studies.STUDIES))}", file=sys.stderr)
        return EXIT_CONFIG
    result = study_fn()
    out_dir = Path(args.output_dir or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"convergence_{result.name}.csv"
    cfg.write_study_csv(path, result.header, result.rows, result.slope)
    print(f"{result.name}: {result.summary} -> {path}")
    if result.aborted:
        return EXIT_NUMERICAL
    return EXIT_OK if result.passed else EXIT_PROPERTY


def cmd_check(args) -> int:
    suite_fn = checks.SUITES.get(args.suite)
    if suite_fn is None:
        print(f"unknown suite {args.suite!r}; options: "
              f"{', '.join(sorted(checks.SUITES))}", file=sys.stderr)
        return EXIT_CONFIG
    result = suite_fn()
    out_dir = Path(args.output_dir or "out")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"check_{result.name}.csv"
    lines = [",".join(result.header)]
    for row in result.rows:
        lines.append(",".join(
            v if isinstance(v, str) else cfg.FLOAT_FMT % v for v in row))
    path.write_text("\n".join(lines) + "\n")
    print(f"{result.name}: {result.summary} -> {path}")
    if result.aborted:
        return EXIT_NUMERICAL
    if not result.passed:
        failing = [row for row in result.rows if row and row[-1] in (0, "0")]
        if failing:
            print(f"failing record: {failing[0]}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balancelaws",
        description="Random-choice solver for 1-D hyperbolic balance laws")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(fn=cmd_run)

    p_rp = sub.add_parser("riemann", help="solve one Riemann problem")
    p_rp.add_argument("--system", default="burgers",
                      choices=["burgers", "scalar", "ode", "p_system",
                               "euler", "euler_duct"])
    p_rp.add_argument("--left", required=True)
    p_rp.add_argument("--right", required=True)
    p_rp.add_argument("--primitive", action="store_true",
                      help="interpret states as (rho, v, p)")
    p_rp.add_argument("--t0", type=float, default=0.0)
    p_rp.add_argument("--x0", type=float, default=0.0)
    p_rp.add_argument("--gamma", type=float, default=None)
    p_rp.add_argument("--kappa", type=float, default=None)
    p_rp.add_argument("--source", default=None,
                      choices=["zero", "constant", "exp_decay", "cos"])
    p_rp.add_argument("--amplitude", type=float, default=1.0)
    p_rp.add_argument("--duct", default=None,
                      choices=["constant", "linear", "gaussian_bump",
                               "cosine_bump"])
    p_rp.add_argument("--duct-amplitude", type=float, default=0.1)
    p_rp.add_argument("--duct-width", type=float, default=1.0)
    p_rp.add_argument("--jump-factor", type=float, default=1.0,
                      help="small-jump radius in phase-box half-widths")
    p_rp.add_argument("--sample", default=None,
                      help="comma-separated rays xi to sample")
    p_rp.add_argument("--generalized", action="store_true")
    p_rp.add_argument("--at", default=None, help="t,x for --generalized")
    p_rp.add_argument("--output-dir", default=None)
    p_rp.set_defaults(fn=cmd_riemann)

    p_cv = sub.add_parser("convergence", help="run a registered study ladder")
    p_cv.add_argument("study")
    p_cv.add_argument("--output-dir", default=None)
    p_cv.set_defaults(fn=cmd_convergence)

    p_ck = sub.add_parser("check", help="run a property-check suite")
    p_ck.add_argument("suite")
    p_ck.add_argument("--output-dir", default=None)
    p_ck.set_defaults(fn=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
