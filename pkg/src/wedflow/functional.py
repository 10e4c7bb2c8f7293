"""Discrete weighted energy-dissipation functional over trajectories.

Node weight ``tau * exp(-t_m / eps)`` with backward-difference rates; the
dissipation summand uses the right endpoint ``psi(J u_m, rate_m)`` while the
driving energies are taken at the left endpoint ``phi(u_{m-1})``.  With this
placement the final state enters only through its rate term, so stationarity
at the last node forces ``xi_M = -tau J gamma_M``, and the terminal Neumann
condition ``eps xi(T) = 0`` emerges from minimization instead of being lost
to an O(tau/eps) quadrature floor.  The exact gradient of the discrete value
is a consistent discretization of the stationarity system

    -eps * d/dt(xi) + xi + eps * J* gamma + eta1 + eta2 = 0,
    eps * xi(T) = 0,

with xi, gamma the rate- and state-slot derivatives of the dissipation,
eta1 the (regularized) Laplacian term and eta2 the (regularized) pointwise
convex term.  Node 0 is pinned to the initial datum and carries no gradient
entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .problem import ProblemInstance, Trajectory, apply_A, conv_states
from .regularize import (
    d_phi2_lambda,
    phi1_lambda,
    phi2_lambda,
    resolve_A_states,
    resolve_phi2,
)


@dataclass(frozen=True)
class WedConfig:
    """Relaxation time, regularization level, and time discretization."""

    epsilon: float
    lam: float = 0.0
    M: int = 64

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigurationError("epsilon must be positive")
        if self.lam < 0:
            raise ConfigurationError("lambda must be nonnegative")
        if self.M < 2:
            raise ConfigurationError("need at least M = 2 time steps")

    def weights(self, T: float) -> np.ndarray:
        """Quadrature weights ``tau * exp(-t_m/eps)`` for nodes m = 1..M."""
        tau = T / self.M
        t = tau * np.arange(1, self.M + 1)
        return tau * np.exp(-t / self.epsilon)

    def left_weights(self, T: float) -> np.ndarray:
        """Left-rectangle weights ``tau * exp(-t_m/eps)`` for m = 0..M-1."""
        tau = T / self.M
        t = tau * np.arange(self.M)
        return tau * np.exp(-t / self.epsilon)


@dataclass
class WedBreakdown:
    total: float
    dissipation_part: float
    phi1_part: float
    phi2_part: float


@dataclass
class ElResidual:
    """Stationarity-system fields along a trajectory (nodes m = 1..M).

    ``residual`` holds the combined defect for m = 2..M (the time
    derivative of xi uses backward differences).
    """

    xi: np.ndarray
    gamma: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    residual: np.ndarray
    node_norms: np.ndarray
    xi_norms: np.ndarray
    max_norm: float
    l2h_norm: float
    terminal_xi_norm: float


def _node_fields(traj: Trajectory, inst: ProblemInstance, cfg: WedConfig):
    """Per-node resolvents, rates, and mobility coefficients."""
    states = traj.states[1:]
    rates = traj.rates()
    ju = resolve_A_states(states, cfg.lam, inst)
    gk = inst.dissipation.g(conv_states(inst, ju))
    return states, rates, ju, gk


def wed_value(traj: Trajectory, inst: ProblemInstance,
              cfg: WedConfig) -> WedBreakdown:
    """Evaluate the discrete functional; parts are reported separately."""
    traj.check_admissible(inst)
    h = inst.grid.h
    states, rates, ju, gk = _node_fields(traj, inst, cfg)
    w = cfg.weights(traj.T)

    psi_nodes = 0.5 * h * np.sum(gk * rates**2, axis=1)
    left = traj.states[:-1]  # phi summands at the left endpoint
    p1_nodes = np.array([phi1_lambda(u, cfg.lam, inst) for u in left])
    p2_nodes = np.array([phi2_lambda(u, cfg.lam, inst) for u in left])

    for name, nodes in (("dissipation", psi_nodes), ("phi1", p1_nodes),
                        ("phi2", p2_nodes)):
        bad = np.flatnonzero(~np.isfinite(nodes))
        if bad.size:
            raise EvaluationError(
                f"non-finite {name} summand at time node {bad[0] + 1}")

    wl = cfg.left_weights(traj.T)
    dis = float(cfg.epsilon * np.dot(w, psi_nodes))
    p1 = float(np.dot(wl, p1_nodes))
    p2 = float(np.dot(wl, p2_nodes))
    return WedBreakdown(total=dis + p1 + p2, dissipation_part=dis,
                        phi1_part=p1, phi2_part=p2)


def _el_fields(traj: Trajectory, inst: ProblemInstance, cfg: WedConfig):
    """xi, gamma, eta1, eta2 at nodes m = 1..M."""
    h = inst.grid.h
    states, rates, ju, gk = _node_fields(traj, inst, cfg)
    xi = gk * rates
    q = 0.5 * inst.dissipation.g_prime(conv_states(inst, ju)) * rates**2
    gamma = h * (q @ inst.conv_matrix)
    if cfg.lam == 0.0:
        eta1 = np.array([apply_A(u, inst.grid) for u in states])
        eta2 = np.array([d_phi2_lambda(u, 0.0, inst) for u in states])
    else:
        eta1 = (states - ju) / cfg.lam
        eta2 = (states - np.array([resolve_phi2(u, cfg.lam, inst)
                                   for u in states])) / cfg.lam
    return states, rates, xi, gamma, eta1, eta2


def wed_gradient(traj: Trajectory, inst: ProblemInstance,
                 cfg: WedConfig) -> np.ndarray:
    """Exact gradient of the discrete value, one H-representer per node m = 1..M."""
    traj.check_admissible(inst)
    eps, tau = cfg.epsilon, traj.tau
    w = cfg.weights(traj.T)
    states, rates, xi, gamma, eta1, eta2 = _el_fields(traj, inst, cfg)
    jgamma = resolve_A_states(gamma, cfg.lam, inst)

    # node m: rate terms from psi_m and psi_{m+1}, state term from psi_m,
    # and the phi summand at u_m, whose left-rectangle weight is
    # tau*exp(-t_m/eps) = w_m; the final node carries no phi contribution,
    # which is what produces the discrete terminal condition.
    grad = w[:, None] * (eps / tau * xi + eps * jgamma)
    grad[:-1] += (w[:-1, None] * (eta1[:-1] + eta2[:-1])
                  - w[1:, None] * (eps / tau) * xi[1:])
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad).all(axis=1))[0]) + 1
        raise EvaluationError(f"non-finite gradient at time node {bad}")
    return grad


def el_residual(traj: Trajectory, inst: ProblemInstance,
                cfg: WedConfig) -> ElResidual:
    """Stationarity-system defect along a trajectory."""
    traj.check_admissible(inst)
    grid = inst.grid
    eps, tau = cfg.epsilon, traj.tau
    states, rates, xi, gamma, eta1, eta2 = _el_fields(traj, inst, cfg)
    jgamma = resolve_A_states(gamma, cfg.lam, inst)

    xi_dot = np.diff(xi, axis=0) / tau  # nodes m = 2..M
    residual = (-eps * xi_dot + xi[1:] + eps * jgamma[1:]
                + eta1[1:] + eta2[1:])
    node_norms = np.sqrt(grid.h * np.sum(residual**2, axis=1))
    xi_norms = np.sqrt(grid.h * np.sum(xi**2, axis=1))
    return ElResidual(
        xi=xi, gamma=gamma, eta1=eta1, eta2=eta2, residual=residual,
        node_norms=node_norms, xi_norms=xi_norms,
        max_norm=float(node_norms.max(initial=0.0)),
        l2h_norm=float(np.sqrt(tau * np.sum(node_norms**2))),
        terminal_xi_norm=float(xi_norms[-1]),
    )


def wed_penalized_value(traj: Trajectory, anchor: Trajectory,
                        inst: ProblemInstance, cfg: WedConfig) -> float:
    """Value plus the weighted squared distance to an anchor trajectory."""
    if anchor.states.shape != traj.states.shape:
        raise ConfigurationError("anchor and trajectory shapes differ")
    anchor.check_admissible(inst)
    base = wed_value(traj, inst, cfg).total
    w = cfg.weights(traj.T)
    diff = traj.states[1:] - anchor.states[1:]
    penalty = 0.5 * inst.grid.h * np.sum(w[:, None] * diff**2)
    return float(base + penalty)


def chain_rule_check(traj: Trajectory, inst: ProblemInstance,
                     cfg: WedConfig) -> float:
    """Maximum defect of the discrete chain rule for the dissipation.

    Compares the backward difference of ``m -> psi(J u_m, rate_m)`` with
    ``(xi_m, second difference of u) + (gamma_m, J rate_m)`` over interior
    time nodes; vanishes at first order in tau for smooth trajectories.
    """
    traj.check_admissible(inst)
    if traj.M < 3:
        raise ConfigurationError("chain-rule check needs at least M = 3")
    h, tau = inst.grid.h, traj.tau
    states, rates, ju, gk = _node_fields(traj, inst, cfg)
    _, _, xi, gamma, _, _ = _el_fields(traj, inst, cfg)
    jrates = resolve_A_states(rates, cfg.lam, inst)

    psi_nodes = 0.5 * h * np.sum(gk * rates**2, axis=1)
    left = np.diff(psi_nodes) / tau
    accel = np.diff(rates, axis=0) / tau
    right = (h * np.sum(xi[1:] * accel, axis=1)
             + h * np.sum(gamma[1:] * jrates[1:], axis=1))
    return float(np.max(np.abs(left - right)))
