"""Batch command-line interface.

Exit codes: 0 success, 2 configuration/validation error, 1 internal error.
Diagnostics go to stderr; data files contain only data.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import traceback
from pathlib import Path

from . import __version__
from .analysis import (
    ConditionViolated,
    OutOfRange,
    concentration_bound,
    isr_lower_bound,
    lemma5_floor,
    regret_lower_bound,
)
from .config import ConfigError, paper_setup, parse_config
from .env import AdversarialMargin, PowerMargin, TwoPoint, Uniform, NotCertifiable, margin_params
from .report import (
    render_boxplot,
    render_curves,
    write_aggregate_csv,
    write_manifest,
    write_per_replication_csv,
    write_plotdata_csv,
)
from .schedule import build_schedule, thresholds
from .sim import run_experiment


def _default_workers() -> int:
    env = os.environ.get("COVBAND_WORKERS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def _run_and_write(config_text: str, out_dir: Path, workers: int, logy: bool = False) -> None:
    config = parse_config(config_text)
    start = time.monotonic()
    result = run_experiment(config, workers=workers)
    wall = time.monotonic() - start
    agg = result.aggregate()

    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []

    def emit(name, writer):
        path = out_dir / name
        writer(path)
        outputs.append(name)

    emit("effective_config.json", lambda p: Path(p).write_text(config_text))
    emit("per_replication.csv", lambda p: write_per_replication_csv(p, result))
    emit("aggregate.csv", lambda p: write_aggregate_csv(p, agg))
    emit("plotdata_regret.csv", lambda p: write_plotdata_csv(p, agg, "regret"))
    emit("plotdata_isr.csv", lambda p: write_plotdata_csv(p, agg, "isr"))
    emit("regret.png", lambda p: render_curves(p, agg, "regret", logy=logy))
    emit("isr.png", lambda p: render_curves(p, agg, "isr", logy=logy))
    if 2000 in result.horizons:
        emit("boxplot_regret_n2000.png", lambda p: render_boxplot(p, result, "regret", 2000))
        emit("boxplot_isr_n2000.png", lambda p: render_boxplot(p, result, "isr", 2000))
    write_manifest(
        out_dir / "manifest.json", config_text, config.master_seed, outputs, wall
    )
    print(f"wrote {len(outputs) + 1} files to {out_dir}", file=sys.stderr)


def _cmd_run(args) -> int:
    text = Path(args.config).read_text()
    out = Path(args.out) if args.out else Path(Path(args.config).stem + "_out")
    _run_and_write(text, out, args.workers)
    return 0


def _cmd_replicate_paper(args) -> int:
    doc = json.loads(paper_setup(args.setup))
    if args.reps is not None:
        doc["replications"] = args.reps
    if args.seed is not None:
        doc["seed"] = args.seed
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    out = Path(args.out) if args.out else Path(f"replicate_{args.setup}_out")
    # setup (ii)'s regret spans orders of magnitude; log axis matches its report
    _run_and_write(text, out, args.workers, logy=args.setup == "ii")
    return 0


def _cmd_schedule(args) -> int:
    sched = build_schedule(args.q, args.horizon)
    nu, _ = thresholds(args.q)
    print("index,time,count,count_upper_bound,count_lower_bound")
    for i, tau in enumerate(sched.times, start=1):
        upper = math.log(tau + 1.0) / args.q
        lower = math.log(tau / (nu + 1.0)) / args.q - 1.0 if tau > nu else ""
        lower_s = f"{lower:.17g}" if lower != "" else ""
        print(f"{i},{tau},{sched.count(tau)},{upper:.17g},{lower_s}")
    return 0


def _parse_grid(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v != ""]


def _cmd_bounds(args) -> int:
    for alpha in _parse_grid(args.alpha):
        for n in _parse_grid(args.n):
            rec = {
                "alpha": alpha,
                "c_star": args.c_star,
                "sigma": args.sigma,
                "x0": args.x0,
                "n": n,
            }
            try:
                rec["isr_lower_bound"] = isr_lower_bound(alpha, args.c_star, args.sigma, n)
                rec["lemma5_floor_at_isr_bound"] = (
                    lemma5_floor(rec["isr_lower_bound"], n, alpha, args.c_star, args.x0)
                    if args.x0 is not None
                    else None
                )
            except OutOfRange:
                rec["isr_lower_bound"] = None
                rec["lemma5_floor_at_isr_bound"] = None
            try:
                rec["regret_lower_bound"] = (
                    regret_lower_bound(alpha, args.c_star, args.sigma, args.x0, n)
                    if args.x0 is not None
                    else None
                )
            except OutOfRange:
                rec["regret_lower_bound"] = None
            if args.tail_x is not None and args.tail_tau is not None:
                rec["concentration_bound"] = concentration_bound(
                    args.tail_x, args.tail_tau, args.sigma
                )
            print(json.dumps(rec, sort_keys=True))
    return 0


def _cmd_margin(args) -> int:
    if args.family == "uniform":
        dist = Uniform(args.lo, args.hi)
    elif args.family == "two_point":
        dist = TwoPoint(args.x_minus, args.x_plus, args.prob_plus)
    elif args.family == "power_margin":
        dist = PowerMargin(args.alpha, args.center, args.half_width)
    elif args.family == "adversarial_margin":
        dist = AdversarialMargin(
            alpha=args.alpha,
            c_star=args.c_star,
            x0=args.x0,
            delta=args.delta,
            atom_left=-(args.x0 + 1.0),
            atom_right=args.delta + args.x0 + 1.0,
        )
    else:  # pragma: no cover - argparse choices guard this
        raise ValueError(args.family)
    cert = margin_params(dist, args.theta)
    print(
        json.dumps(
            {
                "family": args.family,
                "theta": args.theta,
                "alpha": None if math.isinf(cert.alpha) else cert.alpha,
                "alpha_is_infinite": math.isinf(cert.alpha),
                "c_star": cert.c_star,
                "x0": cert.x0,
                "p": cert.p,
                "p1": cert.p1,
                "mu": cert.mu,
            },
            sort_keys=True,
        )
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covband",
        description="Covariate one-armed bandit simulator and bound calculator.",
    )
    parser.add_argument("--version", action="version", version=f"covband {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (default: <config stem>_out)")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("replicate-paper", help="rerun a shipped reference setup end to end")
    p.add_argument("setup", choices=["i", "ii"])
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.set_defaults(func=_cmd_replicate_paper)

    p = sub.add_parser("schedule", help="print the forced-sampling time table as CSV")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("bounds", help="print lower-bound records for a parameter grid")
    p.add_argument("--alpha", required=True, help="comma-separated values")
    p.add_argument("--c-star", dest="c_star", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--n", required=True, help="comma-separated values")
    p.add_argument("--tail-x", dest="tail_x", type=float, default=None)
    p.add_argument("--tail-tau", dest="tail_tau", type=float, default=None)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("margin", help="print the margin certificate for a distribution")
    p.add_argument("--family", required=True,
                   choices=["uniform", "two_point", "power_margin", "adversarial_margin"])
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--lo", type=float, default=-1.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--x-minus", dest="x_minus", type=float, default=-1.0)
    p.add_argument("--x-plus", dest="x_plus", type=float, default=1.0)
    p.add_argument("--prob-plus", dest="prob_plus", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--half-width", dest="half_width", type=float, default=1.0)
    p.add_argument("--c-star", dest="c_star", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.25)
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(func=_cmd_margin)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NotCertifiable, ConditionViolated, OutOfRange, FileNotFoundError) as exc:
        print(f"covband: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"covband: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
