"""Delimited output and structured report files.

All floats are written with 17 significant digits so values round-trip
exactly.  CSV bodies are deterministic for a fixed manifest and seed;
wall-clock timings and timestamps go to a separate metadata file.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from .experiments import AssumptionReport, SweepTable
from .functional import ElResidual, WedConfig
from .optimize import SolveReport
from .problem import ProblemInstance, SpatialGrid, Trajectory


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_csv(traj: Trajectory, grid: SpatialGrid) -> str:
    """One row per time node, one column per interior node; x header row."""
    lines = ["t," + ",".join(fmt(x) for x in grid.x)]
    times = traj.times
    for m in range(traj.M + 1):
        lines.append(fmt(times[m]) + "," +
                     ",".join(fmt(v) for v in traj.states[m]))
    return "\n".join(lines) + "\n"


def read_trajectory_csv(path: str | Path, T: float | None = None) -> Trajectory:
    rows = Path(path).read_text().strip().splitlines()
    data = np.array([[float(v) for v in line.split(",")] for line in rows[1:]])
    times, states = data[:, 0], data[:, 1:]
    return Trajectory(states, float(T if T is not None else times[-1]))


def el_residual_csv(el: ElResidual, tau: float) -> str:
    """Per-node residual norms: m, t, residual_H_norm, xi_H_norm."""
    lines = ["m,t,residual_H_norm,xi_H_norm"]
    M = el.xi.shape[0]
    for m in range(1, M + 1):
        res = el.node_norms[m - 2] if m >= 2 else float("nan")
        lines.append(",".join([str(m), fmt(m * tau), fmt(res),
                               fmt(el.xi_norms[m - 1])]))
    return "\n".join(lines) + "\n"


def sweep_csv(table: SweepTable) -> str:
    """Sweep table; the timing column is zeroed to keep bodies deterministic
    (real timings live in the run metadata file)."""
    lines = [SweepTable.CSV_HEADER]
    for r in table.rows:
        lines.append(",".join([
            fmt(r.epsilon), fmt(r.lam), fmt(r.err_L2H), fmt(r.err_final),
            fmt(r.el_residual), fmt(r.terminal_xi), fmt(r.energy_slack),
            str(r.iterations), fmt(0.0)]))
    return "\n".join(lines) + "\n"


def solve_report_text(rep: SolveReport, inst: ProblemInstance,
                      cfg: WedConfig) -> str:
    lines = [
        f"instance = {inst.name}",
        f"epsilon = {fmt(cfg.epsilon)}",
        f"lambda = {fmt(cfg.lam)}",
        f"M = {cfg.M}",
        f"label = {rep.label}",
        f"converged = {rep.converged}",
        f"iterations = {rep.iterations}",
        f"value_total = {fmt(rep.value.total)}",
        f"value_dissipation = {fmt(rep.value.dissipation_part)}",
        f"value_phi1 = {fmt(rep.value.phi1_part)}",
        f"value_phi2 = {fmt(rep.value.phi2_part)}",
        f"grad_norm = {fmt(rep.grad_norm)}",
        f"grad_norm_raw = {fmt(rep.raw_grad_norm)}",
        f"grad_norm_stationarity = {fmt(rep.stationarity_norm)}",
        f"el_residual_l2h = {fmt(rep.el.l2h_norm)}",
        f"el_residual_max = {fmt(rep.el.max_norm)}",
        f"terminal_xi_norm = {fmt(rep.el.terminal_xi_norm)}",
        "# norms: H-norms carry the grid weight h; L2H norms carry tau",
    ]
    return "\n".join(lines) + "\n"


def assumption_report_text(report: AssumptionReport) -> str:
    lines = [f"R = {fmt(report.R)}",
             f"all_passed = {report.all_passed}",
             "name | samples | constant | worst_ratio | pass"]
    for r in report.records:
        lines.append(" | ".join([
            r.name, str(r.sample_count), fmt(r.constant_used),
            fmt(r.worst_ratio), str(r.passed)]))
        if r.witness is not None:
            lines.append(f"  witness: {r.witness}")
    return "\n".join(lines) + "\n"


def write_metadata(path: Path, wall_times: dict[str, float] | None = None) -> None:
    lines = [f"written_at = {time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    for key, val in (wall_times or {}).items():
        lines.append(f"wall_time_s.{key} = {fmt(val)}")
    path.write_text("\n".join(lines) + "\n")
