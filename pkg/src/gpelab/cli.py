"""Command-line entry point: run / preset / sweep / analyze / validate.

Failures print one line ``error[<category>]: <message>`` to stderr and exit
with a category-specific status.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import AnalysisError, analyze_density
from .integrator import ConvergenceError, PropagationError
from .pipeline import (PRESETS, amplitude_variant, parabolic_cn_demo, preset,
                       run_experiment, wavenumber_variant)
from .plan_io import (PlanError, emit_outputs, emit_plan, grid_from_x,
                      load_plan_dict, parse_plan, plan_from_dict, read_snapshot,
                      set_path)

EXIT_CODES = {"usage": 2, "plan": 3, "propagation": 4, "io": 5, "analysis": 6}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _execute(plan, out_dir) -> dict:
    traj = run_experiment(plan)
    report = analyze_density(np.abs(traj.final.amplitudes) ** 2, traj.final.grid)
    manifest = emit_outputs(traj, report, out_dir)
    (Path(out_dir) / "plan.yaml").write_text(emit_plan(plan))
    return {"label": plan.label, "max_height": report.max_height,
            "n_peaks": len(report.peaks), "visibility": report.visibility,
            "manifest": manifest}


def cmd_run(args):
    plan = parse_plan(_read_text(args.plan))
    stepper = plan.stepper
    if args.dt is not None:
        stepper = replace(stepper, dt=args.dt)
    if args.method is not None:
        stepper = replace(stepper, method=args.method)
    plan = replace(plan, stepper=stepper)
    summary = _execute(plan, args.out)
    print(f"{plan.label}: max_height={summary['max_height']:.6g} "
          f"peaks={summary['n_peaks']} -> {args.out}")


def cmd_preset(args):
    try:
        plan = preset(args.name)
    except KeyError as e:
        raise CliError("usage", str(e.args[0])) from None
    if args.parabolic_demo:
        plan = parabolic_cn_demo(plan)
    if args.k is not None:
        plan = wavenumber_variant(plan, args.k)
    if args.amplitude_factor is not None:
        plan = amplitude_variant(plan, args.amplitude_factor)
    summary = _execute(plan, args.out)
    print(f"{plan.label}: max_height={summary['max_height']:.6g} "
          f"peaks={summary['n_peaks']} -> {args.out}")


def _sweep_value(text: str):
    text = text.strip()
    if re.fullmatch(r"[-+]?\d+", text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def _sweep_one(job):
    index, plan_dict, out_dir = job
    plan = plan_from_dict(plan_dict)
    summary = _execute(plan, out_dir)
    summary.pop("manifest")
    summary["dir"] = Path(out_dir).name
    return summary


def cmd_sweep(args):
    text = _read_text(args.plan)
    base = load_plan_dict(text)
    plan_from_dict(base)
    values = [v for v in args.values.split(",") if v.strip()]
    if not values:
        raise CliError("usage", "--values is empty")
    out = Path(args.out)
    jobs = []
    for i, raw in enumerate(values):
        data = set_path(load_plan_dict(text), args.param, _sweep_value(raw))
        # validate up front so a bad value fails before any run starts
        plan_from_dict(data)
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", raw.strip())
        jobs.append((i, data, str(out / f"run_{i:03d}_{safe}")))
    n_jobs = args.jobs if args.jobs is not None else int(os.environ.get("GPELAB_JOBS", "1"))
    if n_jobs < 1:
        raise CliError("usage", "--jobs must be >= 1")
    if n_jobs == 1:
        results = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_sweep_one, jobs))
    sweep = {"param": args.param, "values": values, "runs": results}
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(sweep, indent=2) + "\n")
    for r in results:
        print(f"{r['dir']}: max_height={r['max_height']:.6g} peaks={r['n_peaks']}")


def cmd_analyze(args):
    folder = Path(args.snapshots)
    files = sorted(folder.glob("snap_*.csv"))
    if not files:
        raise CliError("io", f"no snap_*.csv files in {folder}")
    x, _, n = read_snapshot(files[-1])
    report = analyze_density(n, grid_from_x(x), args.rel_threshold, args.min_sep)
    out = {"snapshot": files[-1].name, **report.to_dict()}
    print(json.dumps(out, indent=2))


def cmd_validate(args):
    plan = parse_plan(_read_text(args.plan))
    print(f"ok: {plan.label} ({len(plan.stages)} stages, "
          f"total duration {plan.total_duration:.6g})")


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError("io", f"cannot read {path}: {e.strerror}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gpelab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a plan file")
    r.add_argument("--plan", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--dt", type=float)
    r.add_argument("--method", choices=["rk4", "splitstep"])
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("preset", help="run a named figure preset")
    s.add_argument("--name", required=True, help=", ".join(PRESETS))
    s.add_argument("--out", required=True)
    s.add_argument("--amplitude-factor", type=float)
    s.add_argument("--k", type=float, help="override the modulation wavenumber")
    s.add_argument("--parabolic-demo", action="store_true",
                   help="replace the interaction stage by a steep parabolic Cn (demo only)")
    s.set_defaults(func=cmd_preset)

    w = sub.add_parser("sweep", help="run a plan over values of one field")
    w.add_argument("--plan", required=True)
    w.add_argument("--param", required=True, help="dotted path, e.g. stages.1.duration")
    w.add_argument("--values", required=True, help="comma-separated; durations accept 0.3pi")
    w.add_argument("--out", required=True)
    w.add_argument("--jobs", type=int, help="parallel runs (default $GPELAB_JOBS or 1)")
    w.set_defaults(func=cmd_sweep)

    a = sub.add_parser("analyze", help="peak/visibility report for the last snapshot in a dir")
    a.add_argument("--snapshots", required=True)
    a.add_argument("--rel-threshold", type=float, default=0.25)
    a.add_argument("--min-sep", type=float, default=1.0)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("validate", help="parse and check a plan file")
    v.add_argument("--plan", required=True)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CliError as e:
        category, msg = e.category, str(e)
    except PlanError as e:
        category, msg = "plan", str(e)
    except (PropagationError, ConvergenceError) as e:
        category, msg = "propagation", str(e)
    except AnalysisError as e:
        category, msg = "analysis", str(e)
    except OSError as e:
        category, msg = "io", f"{e.filename or ''}: {e.strerror or e}"
    except ValueError as e:
        category, msg = "usage", str(e)
    else:
        return 0
    print(f"error[{category}]: {' '.join(msg.split())}", file=sys.stderr)
    return EXIT_CODES[category]


if __name__ == "__main__":
    sys.exit(main())
