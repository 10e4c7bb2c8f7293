"""Parameter sweeps and sampled verification of the structural inequalities.

The causal sweep drives the relaxation time toward zero and measures the
distance between the variational minimizers and the causal time-stepping
solution; the lambda sweep does the same for the proximal regularization
level.  The assumption verifier draws norm-bounded state clouds and checks
the dissipation-potential inequalities with their closed-form constants.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .functional import WedConfig, el_residual
from .optimize import OptimizeConfig, SolveReport, minimize
from .problem import (
    ProblemInstance,
    Trajectory,
    d1_psi,
    d2_psi,
    d21_psi_apply,
    d22_psi_apply,
    psi,
)
from .reference import StepperConfig, solve_flow
from .regularize import phi1_lambda, phi2_lambda


@dataclass
class SweepRow:
    epsilon: float
    lam: float
    err_L2H: float
    err_final: float
    el_residual: float
    terminal_xi: float
    energy_slack: float
    iterations: int
    wall_time: float
    failed: bool = False


@dataclass
class SweepTable:
    rows: list[SweepRow] = field(default_factory=list)
    reports: list[SolveReport] = field(default_factory=list, repr=False)

    CSV_HEADER = ("epsilon,lambda,err_L2H,err_final,el_residual,"
                  "terminal_xi,energy_slack,iterations,wall_time_s")


def traj_l2h_distance(a: Trajectory, b: Trajectory, h: float) -> float:
    """Discrete L2(0,T;H) distance, nodes m = 1..M."""
    d = a.states[1:] - b.states[1:]
    return float(np.sqrt(a.tau * np.sum(h * d**2)))


def energy_slack(rep: SolveReport, inst: ProblemInstance,
                 cfg: WedConfig) -> float:
    """LHS minus RHS of the discrete dissipation estimate.

    Negative or tiny values mean the estimate
    ``sum tau (xi, rate) + phi_lam(u(T)) <= phi_lam(u0)`` holds.
    """
    traj = rep.minimizer
    rates = traj.rates()
    diss = float(traj.tau * np.sum(inst.grid.h * rep.el.xi * rates))
    lam = cfg.lam
    lhs = (diss + phi1_lambda(traj.states[-1], lam, inst)
           + phi2_lambda(traj.states[-1], lam, inst))
    rhs = (phi1_lambda(inst.u0, lam, inst) + phi2_lambda(inst.u0, lam, inst))
    return float(lhs - rhs)


def _sweep_row(eps: float, lam: float, rep: SolveReport,
               inst: ProblemInstance, cfg: WedConfig,
               reference: Trajectory, wall: float) -> SweepRow:
    h = inst.grid.h
    err = traj_l2h_distance(rep.minimizer, reference, h)
    err_fin = inst.grid.norm(rep.minimizer.states[-1] - reference.states[-1])
    return SweepRow(
        epsilon=eps, lam=lam, err_L2H=err, err_final=err_fin,
        el_residual=rep.el.l2h_norm, terminal_xi=rep.el.terminal_xi_norm,
        energy_slack=energy_slack(rep, inst, cfg),
        iterations=rep.iterations, wall_time=wall)


def causal_sweep(inst: ProblemInstance, epsilons: list[float], lam: float,
                 opt: OptimizeConfig, M: int,
                 stepper: StepperConfig | None = None,
                 workers: int = 1) -> SweepTable:
    """Shrink the relaxation time and compare against the causal solution.

    Solves are warm-started in input order (epsilons descending); the
    reference trajectory is computed once and shared by all rows.
    """
    if not epsilons:
        raise ConfigurationError("epsilon list is empty")
    if any(e <= 0 for e in epsilons) or list(epsilons) != sorted(
            epsilons, reverse=True):
        raise ConfigurationError("epsilons must be positive and descending")
    stepper = stepper or StepperConfig(M=M)
    if stepper.M != M:
        raise ConfigurationError("stepper and sweep must share the time grid")
    reference = solve_flow(inst, stepper)

    table = SweepTable()
    if workers > 1:
        # independent cold-started rows; warm continuation needs workers = 1
        def run(eps):
            cfg = WedConfig(epsilon=eps, lam=lam, M=M)
            t0 = time.perf_counter()
            try:
                rep = minimize(inst, cfg, opt)
            except Exception:
                return None, eps, time.perf_counter() - t0
            return rep, eps, time.perf_counter() - t0

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, epsilons))
        for rep, eps, wall in results:
            cfg = WedConfig(epsilon=eps, lam=lam, M=M)
            if rep is None:
                table.rows.append(SweepRow(
                    epsilon=eps, lam=lam, err_L2H=np.inf, err_final=np.inf,
                    el_residual=np.inf, terminal_xi=np.inf,
                    energy_slack=np.inf, iterations=0, wall_time=wall,
                    failed=True))
            else:
                table.reports.append(rep)
                table.rows.append(_sweep_row(eps, lam, rep, inst, cfg,
                                             reference, wall))
        return table

    init: Trajectory | str = "constant-u0"
    for eps in epsilons:
        cfg = WedConfig(epsilon=eps, lam=lam, M=M)
        t0 = time.perf_counter()
        try:
            rep = minimize(inst, cfg, opt, init)
        except Exception:
            table.rows.append(SweepRow(
                epsilon=eps, lam=lam, err_L2H=np.inf, err_final=np.inf,
                el_residual=np.inf, terminal_xi=np.inf, energy_slack=np.inf,
                iterations=0, wall_time=time.perf_counter() - t0, failed=True))
            continue
        init = rep.minimizer
        table.reports.append(rep)
        table.rows.append(_sweep_row(eps, lam, rep, inst, cfg, reference,
                                     time.perf_counter() - t0))
    return table


def lambda_sweep(inst: ProblemInstance, epsilon: float, lambdas: list[float],
                 opt: OptimizeConfig, M: int) -> SweepTable:
    """Shrink the proximal level at fixed relaxation time.

    With a smooth potential, errors are measured against the lambda = 0
    minimizer; otherwise between successive minimizers (Cauchy-style).
    """
    if not lambdas:
        raise ConfigurationError("lambda list is empty")
    if any(l < 0 for l in lambdas) or list(lambdas) != sorted(
            lambdas, reverse=True):
        raise ConfigurationError("lambdas must be nonnegative and descending")

    baseline: Trajectory | None = None
    if inst.potential.smooth:
        base_rep = minimize(inst, WedConfig(epsilon=epsilon, lam=0.0, M=M), opt)
        baseline = base_rep.minimizer

    table = SweepTable()
    init: Trajectory | str = "constant-u0"
    prev: Trajectory | None = None
    h = inst.grid.h
    for lam in lambdas:
        cfg = WedConfig(epsilon=epsilon, lam=lam, M=M)
        t0 = time.perf_counter()
        rep = minimize(inst, cfg, opt, init)
        wall = time.perf_counter() - t0
        init = rep.minimizer
        if baseline is not None:
            err = traj_l2h_distance(rep.minimizer, baseline, h)
            err_fin = inst.grid.norm(
                rep.minimizer.states[-1] - baseline.states[-1])
        elif prev is not None:
            err = traj_l2h_distance(rep.minimizer, prev, h)
            err_fin = inst.grid.norm(rep.minimizer.states[-1] - prev.states[-1])
        else:
            err, err_fin = 0.0, 0.0
        prev = rep.minimizer
        table.reports.append(rep)
        table.rows.append(SweepRow(
            epsilon=epsilon, lam=lam, err_L2H=err, err_final=err_fin,
            el_residual=rep.el.l2h_norm, terminal_xi=rep.el.terminal_xi_norm,
            energy_slack=energy_slack(rep, inst, cfg),
            iterations=rep.iterations, wall_time=wall))
    return table


# ---------------------------------------------------------------------------
# assumption verification


@dataclass
class InequalityRecord:
    name: str
    sample_count: int
    worst_ratio: float
    constant_used: float
    passed: bool
    witness: dict | None = None


@dataclass
class AssumptionReport:
    R: float
    records: list[InequalityRecord] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.records)


def _sample_cloud(rng: np.random.Generator, grid, R: float,
                  count: int) -> np.ndarray:
    """Random states with H-norm uniformly in (0, R]."""
    vals = rng.uniform(-1.0, 1.0, size=(count, grid.N))
    norms = np.sqrt(grid.h * np.sum(vals**2, axis=1))
    targets = R * rng.uniform(0.0, 1.0, size=count)
    return vals * (targets / np.maximum(norms, 1e-300))[:, None]


def verify_assumptions(inst: ProblemInstance, R: float, samples: int,
                       seed: int = 0) -> AssumptionReport:
    """Check the dissipation inequalities with closed-form constants.

    Constants are assembled from the mobility bounds on the reachable
    convolution range (sup of |g|, |g'|, |g''| over |rho| <= |k| R, with the
    doubled range for the Lipschitz constants) and the kernel L2 norm.
    A single counterexample sets passed = False and stores the witness.
    """
    if R <= 0:
        raise ConfigurationError("R must be positive")
    if samples < 100:
        raise ConfigurationError("need at least 100 samples")
    rng = np.random.default_rng(seed)
    grid = inst.grid
    dis = inst.dissipation
    kl2 = dis.kernel_l2(grid.h)
    rho = np.linspace(-kl2 * R, kl2 * R, 20001)
    rho2 = np.linspace(-2 * kl2 * R, 2 * kl2 * R, 20001)
    sup_g = float(np.max(np.abs(dis.g(rho))))
    sup_gp = float(np.max(np.abs(dis.g_prime(rho))))
    sup_gp2 = float(np.max(np.abs(dis.g_prime(rho2))))
    sup_gpp2 = float(np.max(np.abs(dis.g_second(rho2))))

    alpha = dis.alpha
    c4 = 2.0 / alpha
    c5 = 0.5 * kl2 * sup_gp
    c6 = 0.5 * sup_gpp2 * kl2**2
    c7 = sup_g**2
    c8 = sup_gp2 * kl2
    c9 = sup_gp * kl2
    c10 = alpha
    c11 = (c7 + 1.0) / 2.0
    c12 = c10 / 2.0
    c13 = c8**2 / (2.0 * c10)

    u = _sample_cloud(rng, grid, R, samples)
    u1 = _sample_cloud(rng, grid, R, samples)
    u2 = _sample_cloud(rng, grid, R, samples)
    v = _sample_cloud(rng, grid, 2.0 * R, samples)
    v2 = _sample_cloud(rng, grid, 2.0 * R, samples)
    w = _sample_cloud(rng, grid, 2.0 * R, samples)

    def hnorm(x):
        return float(np.sqrt(grid.h * np.sum(x**2)))

    report = AssumptionReport(R=R)

    def record(name, const, lhs_rhs_pairs):
        worst = 0.0
        witness = None
        for i, (lhs, rhs) in enumerate(lhs_rhs_pairs):
            if rhs <= 0.0:
                ratio = 0.0 if lhs <= 1e-14 else np.inf
            else:
                ratio = lhs / rhs
            if ratio > worst:
                worst = ratio
                if ratio > 1.0 + 1e-9:
                    witness = {"sample": i, "lhs": lhs, "rhs": rhs}
        report.records.append(InequalityRecord(
            name=name, sample_count=samples, worst_ratio=worst,
            constant_used=const, passed=worst <= 1.0 + 1e-9,
            witness=witness))

    record("coercivity |v|^2 <= c4 psi(u,v)", c4,
           [(hnorm(v[i])**2, c4 * psi(u[i], v[i], inst))
            for i in range(samples)])
    record("d1 bound |d1psi| <= c5 (1+|v|^2)", c5,
           [(hnorm(d1_psi(u[i], v[i], inst)),
             c5 * (1.0 + hnorm(v[i])**2)) for i in range(samples)])
    record("d1 Lipschitz in u with c6", c6,
           [(hnorm(d1_psi(u1[i], v[i], inst) - d1_psi(u2[i], v[i], inst)),
             c6 * hnorm(u1[i] - u2[i]) * hnorm(v[i])**2)
            for i in range(samples)])
    record("d2 bound |d2psi|^2 <= c7 (1+|v|^2)", c7,
           [(hnorm(d2_psi(u[i], v[i], inst))**2,
             c7 * (1.0 + hnorm(v[i])**2)) for i in range(samples)])
    record("d2 Lipschitz in u with c8", c8,
           [(hnorm(d2_psi(u1[i], v[i], inst) - d2_psi(u2[i], v[i], inst)),
             c8 * hnorm(u1[i] - u2[i]) * hnorm(v[i]))
            for i in range(samples)])
    record("d21 bound with c9", c9,
           [(hnorm(d21_psi_apply(u[i], v[i], w[i], inst)),
             c9 * hnorm(v[i]) * hnorm(w[i])) for i in range(samples)])
    record("d22 ellipticity with c10", c10,
           [(c10 * hnorm(w[i])**2,
             grid.inner(d22_psi_apply(u[i], v[i], w[i], inst), w[i]))
            for i in range(samples)])
    record("chain: psi <= (d2psi, v)", 1.0,
           [(psi(u[i], v[i], inst),
             grid.inner(d2_psi(u[i], v[i], inst), v[i]))
            for i in range(samples)])
    record("chain: (d2psi, v) <= c11 (1+|v|^2)", c11,
           [(grid.inner(d2_psi(u[i], v[i], inst), v[i]),
             c11 * (1.0 + hnorm(v[i])**2)) for i in range(samples)])
    record("strong monotonicity with c12, c13", c12,
           [(c12 * hnorm(v[i] - v2[i])**2,
             grid.inner(d2_psi(u1[i], v[i], inst) - d2_psi(u2[i], v2[i], inst),
                        v[i] - v2[i])
             + c13 * hnorm(u1[i] - u2[i])**2 * hnorm(v2[i])**2)
            for i in range(samples)])
    return report
