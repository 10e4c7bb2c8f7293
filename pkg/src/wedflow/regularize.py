"""Resolvents and proximal regularization of the driving energies.

For the stencil Laplacian the resolvent solves the SPD tridiagonal system
``(I + lambda A) w = u`` directly; for the pointwise convex part the scalar
resolvent ``r + lambda * beta(r) = s`` is found by safeguarded Newton with a
bisection fallback, which also covers monotone graphs with a jump.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConfigurationError, NumericalError
from .problem import ProblemInstance, apply_A, eval_beta, phi1, phi2

_NEWTON_TOL = 1e-12
_NEWTON_MAX = 60
_BRACKET_MAX = 100


def resolve_A(u: np.ndarray, lam: float, inst: ProblemInstance) -> np.ndarray:
    """Resolvent of the stencil Laplacian: solve ``(I + lam A) w = u``."""
    if lam < 0:
        raise ConfigurationError("regularization level must be nonnegative")
    if lam == 0.0:
        return np.array(u, dtype=float)
    grid = inst.grid
    c = lam / grid.h**2
    ab = np.empty((2, grid.N))
    ab[0, :] = -c          # superdiagonal (ab[0, 0] unused)
    ab[1, :] = 1.0 + 2 * c
    w = solveh_banded(ab, np.asarray(u, dtype=float))
    res = w + lam * apply_A(w, grid) - u
    if grid.norm(res) > 1e-10 * (1.0 + grid.norm(u)):
        raise NumericalError("tridiagonal resolvent solve lost accuracy")
    return w


def resolve_A_states(states: np.ndarray, lam: float,
                     inst: ProblemInstance) -> np.ndarray:
    """Resolvent applied to a batch of states (rows)."""
    if lam == 0.0:
        return np.array(states, dtype=float)
    grid = inst.grid
    c = lam / grid.h**2
    ab = np.empty((2, grid.N))
    ab[0, :] = -c
    ab[1, :] = 1.0 + 2 * c
    return solveh_banded(ab, np.asarray(states, dtype=float).T).T


def yosida_A(u: np.ndarray, lam: float, inst: ProblemInstance) -> np.ndarray:
    """Yosida approximation ``(u - J_lam u) / lam``; needs lam > 0."""
    if lam <= 0:
        raise ConfigurationError("Yosida approximation needs lambda > 0; "
                                 "use apply_A for lambda = 0")
    return (u - resolve_A(u, lam, inst)) / lam


def resolve_beta(s: float, lam: float, inst: ProblemInstance) -> float:
    """Unique root of ``r + lam * beta(r) = s`` for monotone beta."""
    if lam < 0:
        raise ConfigurationError("regularization level must be nonnegative")
    if lam == 0.0:
        return float(s)
    pot = inst.potential
    beta = pot.beta

    def f(r: float) -> float:
        return r + lam * float(beta(np.float64(r))) - s

    # bracket the root around s
    fs = f(s)
    if fs == 0.0:
        return float(s)
    step = max(1.0, abs(s))
    lo, hi = (s - step, s) if fs > 0 else (s, s + step)
    grow = 0
    while (f(lo) > 0 if fs > 0 else f(hi) < 0):
        step *= 2.0
        if fs > 0:
            lo -= step
        else:
            hi += step
        grow += 1
        if grow > _BRACKET_MAX:
            raise NumericalError(
                "resolvent bracket failure: beta appears non-monotone")

    r = 0.5 * (lo + hi)
    for _ in range(_NEWTON_MAX):
        fr = f(r)
        if abs(fr) <= _NEWTON_TOL:
            return float(r)
        if fr > 0:
            hi = r
        else:
            lo = r
        if pot.beta_prime is not None:
            slope = 1.0 + lam * float(pot.beta_prime(np.float64(r)))
            r_new = r - fr / slope if slope > 0 else lo - 1.0
        else:
            r_new = lo - 1.0  # force bisection
        if not (lo < r_new < hi):
            r_new = 0.5 * (lo + hi)
        r = r_new
        if hi - lo <= _NEWTON_TOL:
            return float(0.5 * (lo + hi))
    return float(r)


def resolve_phi2(u: np.ndarray, lam: float, inst: ProblemInstance) -> np.ndarray:
    """Componentwise resolvent of the pointwise convex part."""
    if lam == 0.0:
        return np.array(u, dtype=float)
    return np.array([resolve_beta(s, lam, inst) for s in np.asarray(u, dtype=float)])


def phi1_lambda(u: np.ndarray, lam: float, inst: ProblemInstance) -> float:
    """Proximal regularization of the Dirichlet energy."""
    if lam == 0.0:
        return phi1(u, inst)
    j = resolve_A(u, lam, inst)
    return 0.5 / lam * inst.grid.norm(u - j) ** 2 + phi1(j, inst)


def phi2_lambda(u: np.ndarray, lam: float, inst: ProblemInstance) -> float:
    """Proximal regularization of the pointwise convex energy."""
    if lam == 0.0:
        return phi2(u, inst)
    i = resolve_phi2(u, lam, inst)
    return 0.5 / lam * inst.grid.norm(u - i) ** 2 + phi2(i, inst)


def d_phi2_lambda(u: np.ndarray, lam: float, inst: ProblemInstance) -> np.ndarray:
    """Gradient of ``phi2_lambda``: ``(u - I_lam u) / lam``; beta(u) at lam = 0."""
    if lam == 0.0:
        return eval_beta(u, inst)
    return (u - resolve_phi2(u, lam, inst)) / lam
