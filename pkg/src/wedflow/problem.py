"""Discrete problem data and pointwise operators.

One-dimensional interval with homogeneous Dirichlet boundary, uniform grid
of ``N`` interior nodes.  The state space carries the h-weighted inner
product ``(u, v) = h * sum(u_i v_i)`` so that discrete quantities
approximate their integrals.  The dissipation density is
``g(k * u) |v|^2 / 2`` where ``k * u`` is a discrete convolution with zero
extension outside the interval; the driving energy splits into the
Dirichlet part ``phi1(u) = (A u, u)/2`` with ``A`` the 3-point Laplacian
stencil and a pointwise convex part ``phi2(u) = h * sum(beta_hat(u_i))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import toeplitz

from .errors import ConfigurationError


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform interior grid of an interval with Dirichlet ends.

    Boundary values are implicitly zero and never stored; ``x`` are the
    interior node coordinates ``h, 2h, ..., N*h``.
    """

    N: int
    h: float

    def __post_init__(self):
        if self.N < 2:
            raise ConfigurationError(f"grid needs N >= 2 interior nodes, got {self.N}")
        if self.h <= 0:
            raise ConfigurationError(f"grid spacing must be positive, got {self.h}")

    @property
    def domain_length(self) -> float:
        return (self.N + 1) * self.h

    @property
    def x(self) -> np.ndarray:
        return self.h * np.arange(1, self.N + 1)

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """h-weighted inner product."""
        return float(self.h * np.dot(u, v))

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(self.h) * np.linalg.norm(u))


@dataclass
class DissipationModel:
    """State-dependent mobility coefficient ``g`` and convolution kernel.

    ``g`` must satisfy ``g >= alpha > 0``; ``kernel`` holds lattice samples
    for offsets ``-(N-1) .. (N-1)`` (length ``2N - 1``).
    """

    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Callable[[np.ndarray], np.ndarray]
    g_second: Callable[[np.ndarray], np.ndarray]
    alpha: float
    kernel: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        self.kernel = np.asarray(self.kernel, dtype=float)
        if self.alpha <= 0:
            raise ConfigurationError("alpha must be positive")

    def check_lower_bound(self, samples: np.ndarray) -> None:
        vals = np.asarray(self.g(np.asarray(samples, dtype=float)), dtype=float)
        if np.any(vals < self.alpha - 1e-12):
            raise ConfigurationError(
                f"g violates lower bound alpha={self.alpha} on the sample set"
            )

    def kernel_l2(self, h: float) -> float:
        """Discrete L2 norm of the kernel samples."""
        return float(np.sqrt(h * np.sum(self.kernel**2)))


@dataclass
class ConvexPotential:
    """Convex density ``beta_hat`` with monotone derivative ``beta``.

    ``beta`` is a single-valued selection; for graphs with a jump the
    selection takes the midpoint value at the jump point and ``smooth`` is
    False, routing evaluations through the proximal regularization layer.
    """

    beta_hat: Callable[[np.ndarray], np.ndarray]
    beta: Callable[[np.ndarray], np.ndarray]
    beta_prime: Callable[[np.ndarray], np.ndarray] | None = None
    growth_c: float = 1.0
    smooth: bool = True
    name: str = "custom"


@dataclass
class ProblemInstance:
    grid: SpatialGrid
    dissipation: DissipationModel
    potential: ConvexPotential
    u0: np.ndarray
    T: float
    name: str = "instance"
    _conv_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.u0 = np.asarray(self.u0, dtype=float)
        if self.u0.shape != (self.grid.N,):
            raise ConfigurationError(
                f"u0 has length {self.u0.shape}, grid expects {self.grid.N}"
            )
        if self.T <= 0:
            raise ConfigurationError("time horizon T must be positive")
        expected = 2 * self.grid.N - 1
        if self.dissipation.kernel.shape != (expected,):
            raise ConfigurationError(
                f"kernel must cover offsets -(N-1)..(N-1), "
                f"expected length {expected}, got {self.dissipation.kernel.shape[0]}"
            )
        if not (np.isfinite(phi1(self.u0, self)) and np.isfinite(phi2(self.u0, self))):
            raise ConfigurationError("u0 has non-finite energy")

    @property
    def conv_matrix(self) -> np.ndarray:
        """Dense convolution matrix T with (k*u) = h * T @ u."""
        if self._conv_matrix is None:
            k = self.dissipation.kernel
            N = self.grid.N
            self._conv_matrix = toeplitz(k[N - 1:], k[N - 1::-1])
        return self._conv_matrix


@dataclass
class Trajectory:
    """Time-discrete trajectory; ``states[0]`` is pinned to the initial datum."""

    states: np.ndarray  # (M+1, N)
    T: float

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2 or self.states.shape[0] < 2:
            raise ConfigurationError("trajectory needs at least two time nodes")

    @property
    def M(self) -> int:
        return self.states.shape[0] - 1

    @property
    def tau(self) -> float:
        return self.T / self.M

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.M + 1)

    def rates(self) -> np.ndarray:
        """Backward-difference rates, one row per node m = 1..M."""
        return np.diff(self.states, axis=0) / self.tau

    def check_admissible(self, inst: ProblemInstance) -> None:
        if self.states.shape[1] != inst.grid.N:
            raise ConfigurationError("trajectory grid does not match instance")
        if not np.array_equal(self.states[0], inst.u0):
            raise ConfigurationError("trajectory does not start from the initial datum")


def constant_trajectory(inst: ProblemInstance, M: int) -> Trajectory:
    """Constant-in-time admissible trajectory ``u_m == u0``."""
    return Trajectory(np.tile(inst.u0, (M + 1, 1)), inst.T)


# ---------------------------------------------------------------------------
# pointwise operators


def convolve(kernel: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    """Discrete convolution ``w_i = h * sum_j kernel[i-j] u_j``.

    ``kernel`` holds offsets -(N-1)..(N-1); values outside the interior
    are extended by zero (Dirichlet trivial extension).
    """
    u = np.asarray(u, dtype=float)
    N = u.shape[0]
    if kernel.shape[0] != 2 * N - 1:
        raise ConfigurationError(
            f"kernel length {kernel.shape[0]} does not match 2N-1 = {2 * N - 1}"
        )
    mat = toeplitz(kernel[N - 1:], kernel[N - 1::-1])
    return h * (mat @ u)


def reflect_kernel(kernel: np.ndarray) -> np.ndarray:
    return kernel[::-1]


def conv_states(inst: ProblemInstance, states: np.ndarray) -> np.ndarray:
    """k * u for a batch of states (rows)."""
    return inst.grid.h * (states @ inst.conv_matrix.T)


def psi(u: np.ndarray, v: np.ndarray, inst: ProblemInstance) -> float:
    """Dissipation potential ``h * sum g((k*u)_i) v_i^2 / 2``."""
    ku = inst.grid.h * (inst.conv_matrix @ u)
    return float(0.5 * inst.grid.h * np.sum(inst.dissipation.g(ku) * v**2))


def d2_psi(u: np.ndarray, v: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """H-representer of the rate-slot derivative: ``g(k*u) v`` componentwise."""
    ku = inst.grid.h * (inst.conv_matrix @ u)
    return inst.dissipation.g(ku) * v


def d1_psi(u: np.ndarray, v: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """H-representer of the state-slot derivative.

    Adjoint of the convolution (under the h-weighted product) applied to
    ``g'(k*u) v^2 / 2``.
    """
    h = inst.grid.h
    ku = h * (inst.conv_matrix @ u)
    q = 0.5 * inst.dissipation.g_prime(ku) * v**2
    return h * (inst.conv_matrix.T @ q)


def d21_psi_apply(u: np.ndarray, v: np.ndarray, w: np.ndarray,
                  inst: ProblemInstance) -> np.ndarray:
    """Mixed second derivative applied to ``w``: ``g'(k*u) (k*w) v``."""
    h = inst.grid.h
    ku = h * (inst.conv_matrix @ u)
    kw = h * (inst.conv_matrix @ w)
    return inst.dissipation.g_prime(ku) * kw * v


def d22_psi_apply(u: np.ndarray, v: np.ndarray, w: np.ndarray,
                  inst: ProblemInstance) -> np.ndarray:
    """Second rate-slot derivative applied to ``w``: ``g(k*u) w``."""
    ku = inst.grid.h * (inst.conv_matrix @ u)
    return inst.dissipation.g(ku) * w


def apply_A(u: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """3-point Dirichlet Laplacian stencil ``(-u_{i-1} + 2 u_i - u_{i+1}) / h^2``."""
    out = 2.0 * u.copy()
    out[:-1] -= u[1:]
    out[1:] -= u[:-1]
    return out / grid.h**2


def phi1(u: np.ndarray, inst: ProblemInstance) -> float:
    """Dirichlet energy ``(A u, u)_H / 2``."""
    return 0.5 * inst.grid.inner(apply_A(u, inst.grid), u)


def phi2(u: np.ndarray, inst: ProblemInstance) -> float:
    """Pointwise convex energy ``h * sum beta_hat(u_i)``."""
    return float(inst.grid.h * np.sum(inst.potential.beta_hat(u)))


def eval_beta(u: np.ndarray, inst: ProblemInstance) -> np.ndarray:
    """Componentwise selection ``beta(u_i)``."""
    return np.asarray(inst.potential.beta(np.asarray(u, dtype=float)), dtype=float)


def stencil_eigenvalue(mode: int, grid: SpatialGrid) -> float:
    """Eigenvalue of the discrete Laplacian for the ``mode``-th sine mode."""
    theta = mode * np.pi * grid.h / grid.domain_length
    return float((2.0 - 2.0 * np.cos(theta)) / grid.h**2)


def sine_mode(mode: int, grid: SpatialGrid) -> np.ndarray:
    """Interior samples of ``sin(mode * pi * x / L)``; stencil eigenvector."""
    return np.sin(mode * np.pi * grid.x / grid.domain_length)
