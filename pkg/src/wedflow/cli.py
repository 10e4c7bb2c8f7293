"""Command-line front end.

Subcommands: minimize, reference, causal-sweep, lambda-sweep,
verify-assumptions, chain-check, compare.  Exit codes: 0 success,
2 configuration error, 3 numerical failure (diagnostics file written).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments, plots, reports
from .config import (
    build_instance,
    build_opt_config,
    build_wed_config,
    load_manifest,
    sweep_epsilons,
    sweep_lambdas,
)
from .errors import ConfigurationError, EvaluationError, NumericalError
from .functional import WedConfig, chain_rule_check
from .optimize import minimize
from .problem import Trajectory
from .reference import StepperConfig, solve_flow


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wedflow",
        description="Variational space-time solver for semilinear gradient "
                    "flows with state-dependent dissipation")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--instance", required=True, help="config file path")
        sp.add_argument("--output-dir", default="out")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
        sp.add_argument("--epsilon", type=float, default=None)
        sp.add_argument("--lambda", dest="lam", type=float, default=None)
        sp.add_argument("--M", type=int, default=None)
        sp.add_argument("--g-tol", type=float, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--no-figures", action="store_true",
                        help="skip matplotlib figure rendering")

    for name in ("minimize", "reference", "causal-sweep", "lambda-sweep",
                 "chain-check", "compare"):
        common(sub.add_parser(name))
    sp = sub.add_parser("verify-assumptions")
    common(sp)
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=1000)
    return p


def _overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    # numeric flags override the config file
    if args.epsilon is not None:
        out["wed.epsilon"] = str(args.epsilon)
    if args.lam is not None:
        out["wed.lambda"] = str(args.lam)
    if args.M is not None:
        out["wed.M"] = str(args.M)
    if getattr(args, "g_tol", None) is not None:
        out["opt.g_tol"] = str(args.g_tol)
    if args.seed is not None:
        out["opt.seed"] = str(args.seed)
    return out


def run(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    outdir = Path(args.output_dir)
    try:
        manifest = load_manifest(args.instance, _overrides(args))
        inst = build_instance(manifest)
        outdir.mkdir(parents=True, exist_ok=True)
        return _dispatch(args, manifest, inst, outdir)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, EvaluationError) as exc:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "diagnostics.txt").write_text(
            f"command = {args.command}\nerror = {exc}\n")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _dispatch(args, manifest, inst, outdir: Path) -> int:
    cfg = build_wed_config(manifest)
    opt = build_opt_config(manifest)
    figures = not args.no_figures
    timings: dict[str, float] = {}

    if args.command == "minimize":
        t0 = time.perf_counter()
        rep = minimize(inst, cfg, opt)
        timings["minimize"] = time.perf_counter() - t0
        (outdir / "minimizer.csv").write_text(
            reports.trajectory_csv(rep.minimizer, inst.grid))
        (outdir / "solve_report.txt").write_text(
            reports.solve_report_text(rep, inst, cfg))
        (outdir / "el_residual.csv").write_text(
            reports.el_residual_csv(rep.el, rep.minimizer.tau))
        if figures:
            plots.plot_trajectory(rep.minimizer, inst,
                                  outdir / "minimizer.png", "minimizer")
            plots.plot_residual_profile(rep.el.node_norms, rep.el.xi_norms,
                                        rep.minimizer.tau,
                                        outdir / "el_residual.png")
        print(f"minimize: converged={rep.converged} "
              f"iterations={rep.iterations} value={rep.value.total:.12g}")

    elif args.command == "reference":
        scfg = StepperConfig(
            M=int(manifest.get("ref.M", manifest.get("wed.M", "64"))),
            newton_tol=float(manifest.get("ref.newton_tol", "1e-10")),
            g_evaluation=manifest.get("ref.g_evaluation", "lagged"))
        t0 = time.perf_counter()
        traj = solve_flow(inst, scfg)
        timings["reference"] = time.perf_counter() - t0
        (outdir / "reference.csv").write_text(
            reports.trajectory_csv(traj, inst.grid))
        if figures:
            plots.plot_trajectory(traj, inst, outdir / "reference.png",
                                  "causal reference")
        print(f"reference: {scfg.M} steps done")

    elif args.command == "causal-sweep":
        t0 = time.perf_counter()
        table = experiments.causal_sweep(
            inst, sweep_epsilons(manifest), cfg.lam, opt, cfg.M,
            workers=args.workers)
        timings["causal_sweep"] = time.perf_counter() - t0
        _write_sweep(table, inst, outdir, figures, "epsilon")
        print(f"causal-sweep: {len(table.rows)} rows")

    elif args.command == "lambda-sweep":
        t0 = time.perf_counter()
        table = experiments.lambda_sweep(
            inst, cfg.epsilon, sweep_lambdas(manifest), opt, cfg.M)
        timings["lambda_sweep"] = time.perf_counter() - t0
        _write_sweep(table, inst, outdir, figures, "lambda")
        print(f"lambda-sweep: {len(table.rows)} rows")

    elif args.command == "verify-assumptions":
        report = experiments.verify_assumptions(
            inst, R=args.R, samples=args.samples,
            seed=int(manifest.get("opt.seed", "0")))
        (outdir / "assumptions.txt").write_text(
            reports.assumption_report_text(report))
        print(reports.assumption_report_text(report), end="")
        if not report.all_passed:
            return 3

    elif args.command == "chain-check":
        defects = []
        for M in (cfg.M, 2 * cfg.M):
            traj = _smooth_sample_trajectory(inst, M)
            c = WedConfig(epsilon=cfg.epsilon, lam=cfg.lam, M=M)
            defects.append(chain_rule_check(traj, inst, c))
        ratio = defects[0] / defects[1] if defects[1] > 0 else float("inf")
        (outdir / "chain_check.txt").write_text(
            f"M = {cfg.M}\ndefect_M = {reports.fmt(defects[0])}\n"
            f"defect_2M = {reports.fmt(defects[1])}\n"
            f"refinement_ratio = {reports.fmt(ratio)}\n")
        print(f"chain-check: defect(M)={defects[0]:.6e} "
              f"defect(2M)={defects[1]:.6e} ratio={ratio:.3f}")

    elif args.command == "compare":
        scfg = StepperConfig(M=cfg.M,
                             g_evaluation=manifest.get("ref.g_evaluation",
                                                       "lagged"))
        t0 = time.perf_counter()
        ref = solve_flow(inst, scfg)
        rep = minimize(inst, cfg, opt)
        timings["compare"] = time.perf_counter() - t0
        (outdir / "minimizer.csv").write_text(
            reports.trajectory_csv(rep.minimizer, inst.grid))
        (outdir / "reference.csv").write_text(
            reports.trajectory_csv(ref, inst.grid))
        err = experiments.traj_l2h_distance(rep.minimizer, ref, inst.grid.h)
        (outdir / "compare.txt").write_text(
            f"err_L2H = {reports.fmt(err)}\n")
        if figures:
            plots.plot_comparison(rep.minimizer, ref, inst,
                                  outdir / "compare.png")
        print(f"err_L2H = {reports.fmt(err)}")

    reports.write_metadata(outdir / "metadata.txt", timings)
    return 0


def _write_sweep(table, inst, outdir: Path, figures: bool, x_field: str):
    (outdir / "sweep.csv").write_text(reports.sweep_csv(table))
    wall = {f"row_{i}": r.wall_time for i, r in enumerate(table.rows)}
    reports.write_metadata(outdir / "metadata.txt", wall)
    if figures:
        plots.plot_sweep(table, outdir / "sweep.png", x_field)


def _smooth_sample_trajectory(inst, M: int) -> Trajectory:
    """Separable smooth trajectory e^{-t} u0 used by the chain-rule check."""
    t = (inst.T / M) * np.arange(M + 1)
    states = np.exp(-t)[:, None] * inst.u0[None, :]
    return Trajectory(states, inst.T)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
