"""Trajectory-space minimization of the discrete functional.

Admissibility is encoded structurally: node 0 is excluded from the variable
vector, so every iterate starts from the initial datum bit-for-bit.  The
quadrature weights decay like ``exp(-t/eps)``, which makes the raw problem
badly scaled in time; both methods therefore work in weight-normalized
coordinates (equivalent to diagonal preconditioning by the node weights)
while the reported value and gradients refer to the original variables.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EvaluationError, NumericalError
from .functional import (
    ElResidual,
    WedBreakdown,
    WedConfig,
    el_residual,
    wed_gradient,
    wed_value,
)
from .problem import ProblemInstance, Trajectory, constant_trajectory

_ARMIJO_MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class OptimizeConfig:
    method: str = "limited-memory-quasi-newton"
    g_tol: float = 1e-8
    max_iters: int = 5000
    armijo_c: float = 1e-4
    armijo_backtrack: float = 0.5
    memory: int = 20
    seed: int = 0
    # "gradient": stop on the H-norm of the raw gradient;
    # "stationarity": stop on the weight-normalized gradient, which controls
    # late-time nodes even when the quadrature weights are tiny.
    stop_norm: str = "gradient"

    def __post_init__(self):
        if self.method not in ("gradient-descent-armijo",
                               "limited-memory-quasi-newton"):
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.g_tol <= 0 or self.max_iters < 1:
            raise ConfigurationError("need g_tol > 0 and max_iters >= 1")
        if not 0 < self.armijo_c < 1 or not 0 < self.armijo_backtrack < 1:
            raise ConfigurationError("Armijo parameters must lie in (0,1)")
        if self.stop_norm not in ("gradient", "stationarity"):
            raise ConfigurationError(f"unknown stop_norm {self.stop_norm!r}")


@dataclass
class SolveReport:
    minimizer: Trajectory
    value: WedBreakdown
    grad_norm: float
    raw_grad_norm: float
    stationarity_norm: float
    iterations: int
    converged: bool
    el: ElResidual
    wall_time: float
    label: str = "stationary point; global minimizer candidate"
    history: list = field(default_factory=list, repr=False)


def _is_certified_convex(inst: ProblemInstance) -> bool:
    return inst.dissipation.name == "one" and inst.potential.name in (
        "zero",) or (inst.dissipation.name == "one"
                     and inst.potential.name.startswith("linear("))


def minimize(inst: ProblemInstance, cfg: WedConfig, opt: OptimizeConfig,
             init: Trajectory | str = "constant-u0") -> SolveReport:
    """Minimize the discrete functional over admissible trajectories."""
    t0 = time.perf_counter()
    if isinstance(init, str):
        if init != "constant-u0":
            raise ConfigurationError(f"unknown initialization {init!r}")
        traj = constant_trajectory(inst, cfg.M)
    else:
        init.check_admissible(inst)
        if init.M != cfg.M:
            raise ConfigurationError("initial trajectory has wrong step count")
        traj = Trajectory(init.states.copy(), init.T)

    grid = inst.grid
    M, N = cfg.M, grid.N
    w = cfg.weights(inst.T)            # node weights, m = 1..M
    tau = inst.T / M
    # z = scale * u per node diagonalizes the weight profile
    scale = np.sqrt(grid.h * w)[:, None]

    u0_row = inst.u0.copy()

    def to_traj(z: np.ndarray) -> Trajectory:
        states = np.empty((M + 1, N))
        states[0] = u0_row
        states[1:] = (z.reshape(M, N)) / scale
        return Trajectory(states, inst.T)

    def value_and_grad(z: np.ndarray):
        t = to_traj(z)
        val = wed_value(t, inst, cfg)
        g = wed_gradient(t, inst, cfg)           # H-representers, (M, N)
        gz = (grid.h * g) / scale                # gradient in z coordinates
        raw = float(np.sqrt(np.sum(grid.h * g**2)))
        stat = float(np.sqrt(tau * np.sum(grid.h * (g / w[:, None])**2)))
        return val, g, gz.ravel(), raw, stat

    def stop_value(raw: float, stat: float) -> float:
        return stat if opt.stop_norm == "stationarity" else raw

    z = (scale * traj.states[1:]).ravel()
    val, g, gz, raw, stat = value_and_grad(z)
    history = [val.total]
    converged = stop_value(raw, stat) <= opt.g_tol
    iterations = 0

    mem_s: list[np.ndarray] = []
    mem_y: list[np.ndarray] = []
    gd_step = 1.0

    while not converged and iterations < opt.max_iters:
        if opt.method == "limited-memory-quasi-newton" and mem_s:
            d = _two_loop(gz, mem_s, mem_y)
            if np.dot(d, gz) >= 0:       # not a descent direction: reset
                mem_s.clear()
                mem_y.clear()
                d = -gz
            step0 = 1.0
        elif opt.method == "limited-memory-quasi-newton":
            d = -gz
            step0 = 1.0 / max(np.linalg.norm(gz), 1e-30)
        else:
            d = -gz
            step0 = gd_step

        slope = float(np.dot(gz, d))
        step = step0
        accepted = False
        for _ in range(_ARMIJO_MAX_BACKTRACKS):
            z_new = z + step * d
            try:
                val_new, g_new, gz_new, raw_new, stat_new = value_and_grad(z_new)
            except (FloatingPointError, EvaluationError):
                step *= opt.armijo_backtrack
                continue
            # Decreases at late time nodes can fall below the rounding noise
            # of the M-term quadrature sum; a small summation-noise floor
            # keeps the search from stalling on sub-ulp progress.
            noise = (64.0 * M * np.finfo(float).eps
                     * (abs(val.total) + abs(val_new.total)))
            if val_new.total <= val.total + opt.armijo_c * step * slope + noise:
                accepted = True
                break
            step *= opt.armijo_backtrack
        if not accepted:
            raise NumericalError(
                f"stalled line search after {_ARMIJO_MAX_BACKTRACKS} backtracks "
                f"at iteration {iterations} (grad norm {stop_value(raw, stat):.3e})")

        s_vec = z_new - z
        y_vec = gz_new - gz
        sy = float(np.dot(s_vec, y_vec))
        if opt.method == "limited-memory-quasi-newton":
            if sy > 1e-12 * np.linalg.norm(s_vec) * np.linalg.norm(y_vec):
                mem_s.append(s_vec)
                mem_y.append(y_vec)
                if len(mem_s) > opt.memory:
                    mem_s.pop(0)
                    mem_y.pop(0)
        else:
            # Barzilai-Borwein estimate for the next initial step
            if sy > 0:
                gd_step = float(np.dot(s_vec, s_vec) / sy)

        z, val, g, gz, raw, stat = z_new, val_new, g_new, gz_new, raw_new, stat_new
        history.append(val.total)
        iterations += 1
        converged = stop_value(raw, stat) <= opt.g_tol

    final = to_traj(z)
    final.states[0] = u0_row  # bit-for-bit admissibility
    el = el_residual(final, inst, cfg)
    label = ("global minimizer (convex problem)" if _is_certified_convex(inst)
             else "stationary point; global minimizer candidate")
    return SolveReport(
        minimizer=final, value=val, grad_norm=stop_value(raw, stat),
        raw_grad_norm=raw, stationarity_norm=stat,
        iterations=iterations, converged=converged, el=el,
        wall_time=time.perf_counter() - t0, label=label, history=history)


def _two_loop(g: np.ndarray, mem_s: list, mem_y: list) -> np.ndarray:
    """Standard limited-memory inverse-Hessian application."""
    q = g.copy()
    alphas = []
    rhos = [1.0 / np.dot(y, s) for s, y in zip(mem_s, mem_y)]
    for s, y, rho in zip(reversed(mem_s), reversed(mem_y), reversed(rhos)):
        a = rho * np.dot(s, q)
        alphas.append(a)
        q -= a * y
    s, y = mem_s[-1], mem_y[-1]
    q *= np.dot(s, y) / np.dot(y, y)
    for (s, y, rho), a in zip(zip(mem_s, mem_y, rhos), reversed(alphas)):
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def continuation_minimize(inst: ProblemInstance, cfgs: list[WedConfig],
                          opt: OptimizeConfig,
                          init: Trajectory | str = "constant-u0"
                          ) -> list[SolveReport]:
    """Solve a configuration list in order, warm-starting each solve."""
    if not cfgs:
        raise ConfigurationError("configuration list is empty")
    reports = []
    current = init
    for cfg in cfgs:
        rep = minimize(inst, cfg, opt, current)
        reports.append(rep)
        current = rep.minimizer
    return reports
