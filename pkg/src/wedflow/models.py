"""Built-in mobility models, kernels, convex potentials, and initial data."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .problem import (
    ConvexPotential,
    DissipationModel,
    ProblemInstance,
    SpatialGrid,
    sine_mode,
)


def delta_kernel(grid: SpatialGrid) -> np.ndarray:
    """Discrete delta: 1/h at offset zero, so k*u == u."""
    k = np.zeros(2 * grid.N - 1)
    k[grid.N - 1] = 1.0 / grid.h
    return k


def gaussian_kernel(grid: SpatialGrid, sigma: float) -> np.ndarray:
    """Gaussian density sampled on lattice offsets -(N-1)h .. (N-1)h."""
    if sigma <= 0:
        raise ConfigurationError("gaussian kernel needs sigma > 0")
    y = grid.h * np.arange(-(grid.N - 1), grid.N)
    return np.exp(-y**2 / (2 * sigma**2)) / (sigma * np.sqrt(2 * np.pi))


def make_kernel(name: str, grid: SpatialGrid) -> np.ndarray:
    if name == "delta":
        return delta_kernel(grid)
    if name.startswith("gaussian(") and name.endswith(")"):
        return gaussian_kernel(grid, float(name[len("gaussian("):-1]))
    raise ConfigurationError(
        f"unknown kernel {name!r}; expected 'delta' or 'gaussian(sigma)'"
    )


def make_dissipation(name: str, kernel: np.ndarray,
                     alpha: float = 1.0) -> DissipationModel:
    """Built-in mobility coefficients.

    ``one``: g == 1; ``one_plus_square``: g(s) = 1 + s^2;
    ``alpha_plus_lorentz``: g(s) = alpha + 1/(1 + s^2).
    """
    if name == "one":
        return DissipationModel(
            g=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            g_prime=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            g_second=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
            alpha=1.0, kernel=kernel, name=name)
    if name == "one_plus_square":
        return DissipationModel(
            g=lambda s: 1.0 + s**2,
            g_prime=lambda s: 2.0 * s,
            g_second=lambda s: 2.0 * np.ones_like(np.asarray(s, dtype=float)),
            alpha=1.0, kernel=kernel, name=name)
    if name == "alpha_plus_lorentz":
        if alpha <= 0:
            raise ConfigurationError("alpha_plus_lorentz needs alpha > 0")
        return DissipationModel(
            g=lambda s: alpha + 1.0 / (1.0 + s**2),
            g_prime=lambda s: -2.0 * s / (1.0 + s**2) ** 2,
            g_second=lambda s: (6.0 * s**2 - 2.0) / (1.0 + s**2) ** 3,
            alpha=alpha, kernel=kernel, name=name)
    raise ConfigurationError(f"unknown mobility model {name!r}")


def make_potential(name: str) -> ConvexPotential:
    """Built-in convex potentials.

    ``zero``: beta == 0; ``linear(a)``: beta(r) = a r;
    ``linear_plus_sign(a,b)``: beta(r) = a r + b sign(r), midpoint selection
    at the jump.
    """
    if name == "zero":
        return ConvexPotential(
            beta_hat=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            beta=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            beta_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            growth_c=1.0, smooth=True, name=name)
    if name.startswith("linear(") and name.endswith(")"):
        a = float(name[len("linear("):-1])
        if a < 0:
            raise ConfigurationError("linear potential needs a >= 0")
        return ConvexPotential(
            beta_hat=lambda r: 0.5 * a * r**2,
            beta=lambda r: a * r,
            beta_prime=lambda r: a * np.ones_like(np.asarray(r, dtype=float)),
            growth_c=max(a, 1.0), smooth=True, name=name)
    if name.startswith("linear_plus_sign(") and name.endswith(")"):
        parts = name[len("linear_plus_sign("):-1].split(",")
        if len(parts) != 2:
            raise ConfigurationError("linear_plus_sign needs two parameters (a,b)")
        a, b = float(parts[0]), float(parts[1])
        if a < 0 or b < 0:
            raise ConfigurationError("linear_plus_sign needs a, b >= 0")
        return ConvexPotential(
            beta_hat=lambda r: 0.5 * a * r**2 + b * np.abs(r),
            beta=lambda r: a * r + b * np.sign(r),
            beta_prime=lambda r: a * np.ones_like(np.asarray(r, dtype=float)),
            growth_c=max(a, b, 1.0), smooth=(b == 0.0), name=name)
    raise ConfigurationError(f"unknown potential {name!r}")


def bump_profile(x: np.ndarray, center: float = 0.5, width: float = 0.4) -> np.ndarray:
    """Compactly supported smooth bump, zero outside |x - center| < width."""
    s = (x - center) / width
    out = np.zeros_like(x)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def make_u0(name: str, grid: SpatialGrid) -> np.ndarray:
    if name.startswith("sine(") and name.endswith(")"):
        return sine_mode(int(name[len("sine("):-1]), grid)
    if name == "bump":
        return bump_profile(grid.x / grid.domain_length)
    raise ConfigurationError(f"unknown initial datum {name!r}")


def heat_instance(N: int = 32, T: float = 1.0) -> ProblemInstance:
    """Linear heat flow: g == 1, beta == 0, delta kernel, first sine mode."""
    grid = SpatialGrid(N=N, h=1.0 / (N + 1))
    kernel = delta_kernel(grid)
    return ProblemInstance(
        grid=grid,
        dissipation=make_dissipation("one", kernel),
        potential=make_potential("zero"),
        u0=sine_mode(1, grid),
        T=T,
        name="heat",
    )


def kirchhoff_instance(N: int = 32, T: float = 1.0,
                       sigma: float = 0.1) -> ProblemInstance:
    """Nonlocal mobility g(s) = 1 + s^2 with gaussian kernel, beta(r) = r."""
    grid = SpatialGrid(N=N, h=1.0 / (N + 1))
    kernel = gaussian_kernel(grid, sigma)
    return ProblemInstance(
        grid=grid,
        dissipation=make_dissipation("one_plus_square", kernel),
        potential=make_potential("linear(1.0)"),
        u0=sine_mode(1, grid),
        T=T,
        name="kirchhoff",
    )
