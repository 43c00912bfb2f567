"""Command-line entry point: ``trustgame {run,sweep,regions,equilibria}``."""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .config import MODES, SweepConfig, load_config
from .equilibrium import (
    analyze_mixed,
    verify_nash,
    zero_equilibrium,
    zero_equilibrium_exists,
    zero_equilibrium_slack,
)
from .errors import ConfigError, DegenerateGame
from .ibr import OutcomeKind, ibr_run
from .sweep import fmt_float, write_regions, write_sweep

EXIT_OK = 0
EXIT_TRIVIAL_INIT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_CONFIG = 64
EXIT_DEGENERATE = 65


def _vec_str(v) -> str:
    return "(" + ", ".join("%.10g" % x for x in np.atleast_1d(v)) + ")"


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _load(args) -> SweepConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        seed=args.seed, mode=args.mode, max_iter=args.max_iter, alpha_tol=args.alpha_tol,
        workers=getattr(args, "workers", None), backend=getattr(args, "backend", None),
    )


def cmd_run(args) -> int:
    cfg = _load(args)
    p = cfg.params()
    y0 = cfg.y_bar_0
    if args.y_bar_0 is not None:
        y0 = np.asarray(args.y_bar_0, dtype=np.float64)
    if y0 is None:
        raise ConfigError("run needs y_bar_0 (config key or --y-bar-0)")
    if y0.size != p.k:
        raise ConfigError(f"y_bar_0 has {y0.size} entries, expected {p.k}")
    trace = ibr_run(p, y0, cfg.ibr)
    out = trace.outcome
    with _output(args.out) as fh:
        if args.json:
            json.dump({
                "steps": [
                    {"i": i, "alpha": a, "y_bar": yb.tolist(), "region": reg.value}
                    for i, (a, yb, reg) in enumerate(trace.steps, start=1)
                ],
                "outcome": out.kind.label,
                "iterations": out.iterations,
                "alpha_star": out.alpha_star,
                "y_bar_star": None if out.y_bar_star is None else out.y_bar_star.tolist(),
                "contraction": out.contraction,
            }, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(f"{'i':>4}  {'alpha':>22}  {'region':<14} y_bar\n")
            for i, (a, yb, reg) in enumerate(trace.steps, start=1):
                fh.write(f"{i:>4}  {fmt_float(a):>22}  {reg.value:<14} {_vec_str(yb)}\n")
            line = f"outcome: {out.kind.label} after {out.iterations} iterations"
            if out.converged:
                line += f", alpha*={fmt_float(out.alpha_star)}, y_bar*={_vec_str(out.y_bar_star)}"
            elif out.contraction is not None:
                line += f", last step ratio {fmt_float(out.contraction)}"
            fh.write(line + "\n")
    if out.converged:
        return EXIT_OK
    if out.kind is OutcomeKind.TRIVIAL_INIT:
        return EXIT_TRIVIAL_INIT
    return EXIT_NO_CONVERGENCE


def cmd_sweep(args) -> int:
    cfg = _load(args)
    with _output(args.out) as fh:
        summary = write_sweep(cfg, fh)
    print(
        f"{summary.rows} rows: OK={summary.ok} NecessaryViolated={summary.necessary_violated} "
        f"SufficientViolated={summary.sufficient_violated}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_regions(args) -> int:
    cfg = _load(args)
    if args.radii is not None:
        cfg = cfg.with_overrides(zeta_radii=tuple(args.radii))
    with _output(args.out) as fh:
        write_regions(cfg, fh)
    return EXIT_OK


def cmd_equilibria(args) -> int:
    cfg = _load(args)
    p = cfg.params()
    report: dict = {
        "zero_equilibrium_exists": zero_equilibrium_exists(p),
        "zero_equilibrium_slack": zero_equilibrium_slack(p),
    }
    if report["zero_equilibrium_exists"]:
        report["zero_equilibrium_nash"] = verify_nash(zero_equilibrium(p), p, seed=cfg.seed)
    try:
        mixed = analyze_mixed(p, cfg.ibr.tau_one)
    except DegenerateGame as exc:
        print(f"degenerate game: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    report["coefficients"] = list(mixed.coefficients)
    report["discriminant"] = mixed.discriminant
    report["roots"] = list(mixed.roots)
    report["candidates"] = [
        {"r": c.r, "alpha": c.alpha, "y_bar": c.y_bar.tolist(), "valid": c.valid, "reason": c.reason}
        for c in mixed.candidates
    ]
    report["equilibria"] = [
        {"alpha_star": e.alpha_star, "y_bar_star": e.y_bar_star.tolist(), "r": e.r,
         "nash": verify_nash(e, p, seed=cfg.seed)}
        for e in mixed.equilibria
    ]
    with _output(args.out) as fh:
        if args.json:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        else:
            fh.write(f"zero_equilibrium_exists: {report['zero_equilibrium_exists']} "
                     f"(slack {fmt_float(report['zero_equilibrium_slack'])})\n")
            if "zero_equilibrium_nash" in report:
                fh.write(f"zero_equilibrium_nash: {report['zero_equilibrium_nash']}\n")
            a, b, c = mixed.coefficients
            fh.write(f"quadratic: {fmt_float(a)} r^2 + {fmt_float(b)} r + {fmt_float(c)}\n")
            fh.write(f"discriminant: {fmt_float(mixed.discriminant)}\n")
            fh.write("roots: " + (", ".join(fmt_float(r) for r in mixed.roots) or "none") + "\n")
            for cand in mixed.candidates:
                status = "valid" if cand.valid else f"rejected ({cand.reason})"
                fh.write(f"  r={fmt_float(cand.r)} alpha={fmt_float(cand.alpha)} "
                         f"y_bar={_vec_str(cand.y_bar)} {status}\n")
            fh.write(f"mixed equilibria: {len(report['equilibria'])}\n")
            for e in report["equilibria"]:
                fh.write(f"  alpha*={fmt_float(e['alpha_star'])} y_bar*={_vec_str(e['y_bar_star'])} "
                         f"nash={e['nash']}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trustgame", description="Sensor/attacker fusion game tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--mode", choices=MODES)
        sp.add_argument("--max-iter", type=int, dest="max_iter")
        sp.add_argument("--alpha-tol", type=float, dest="alpha_tol")

    sp = sub.add_parser("run", help="trace one IBR run")
    common(sp)
    sp.add_argument("--y-bar-0", type=float, nargs="+", dest="y_bar_0")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_run)

    for name, fn, help_ in (("sweep", cmd_sweep, "grid sweep with predicate cross-check"),
                            ("regions", cmd_regions, "union/intersection regions over sampled means")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--backend", choices=("numba", "numpy", "python"))
        if name == "regions":
            sp.add_argument("--radii", type=float, nargs="+")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("equilibria", help="closed-form equilibria with a brute-force Nash check")
    common(sp)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_equilibria)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would collide with the trivial-init code
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateGame as exc:
        print(f"degenerate game: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
