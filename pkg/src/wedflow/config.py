"""Flat key-value configuration files with dotted sections.

Format: one ``key = value`` pair per line, ``#`` comments, keys grouped by
dotted prefixes (``instance.*``, ``wed.*``, ``opt.*``, ``sweep.*``).  The
``instance.`` prefix may be omitted in files that only describe a problem
instance.  Unknown keys are rejected with the nearest valid name.
"""

from __future__ import annotations

import difflib
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .functional import WedConfig
from .optimize import OptimizeConfig
from .problem import ProblemInstance, SpatialGrid
from .models import make_dissipation, make_kernel, make_potential, make_u0

KNOWN_KEYS = {
    "instance.N", "instance.T", "instance.alpha",
    "instance.g.name", "instance.g.table",
    "instance.kernel.name", "instance.kernel.samples",
    "instance.beta.name", "instance.u0.name", "instance.u0.table",
    "instance.name",
    "wed.epsilon", "wed.lambda", "wed.M",
    "opt.method", "opt.g_tol", "opt.max_iters", "opt.memory", "opt.seed",
    "opt.armijo_c", "opt.armijo_backtrack", "opt.stop_norm",
    "sweep.epsilons", "sweep.lambdas",
    "ref.M", "ref.newton_tol", "ref.g_evaluation",
}


def parse_config(text: str) -> dict[str, str]:
    """Parse flat key-value text into a string dictionary."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _canonical(key: str) -> str:
    if key in KNOWN_KEYS:
        return key
    prefixed = f"instance.{key}"
    if prefixed in KNOWN_KEYS:
        return prefixed
    near = difflib.get_close_matches(key, sorted(KNOWN_KEYS), n=1)
    hint = f"; nearest valid name: {near[0]}" if near else ""
    raise ConfigurationError(f"unknown configuration key {key!r}{hint}")


def load_manifest(path: str | Path,
                  overrides: dict[str, str] | None = None) -> dict[str, str]:
    """Load a config file and apply flag overrides (flags win)."""
    entries = parse_config(Path(path).read_text())
    cfg = {_canonical(k): v for k, v in entries.items()}
    for k, v in (overrides or {}).items():
        cfg[_canonical(k)] = str(v)
    return cfg


def _floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def build_instance(cfg: dict[str, str]) -> ProblemInstance:
    try:
        N = int(cfg.get("instance.N", "32"))
        T = float(cfg.get("instance.T", "1.0"))
        alpha = float(cfg.get("instance.alpha", "1.0"))
    except ValueError as exc:
        raise ConfigurationError(f"bad numeric instance value: {exc}") from exc
    grid = SpatialGrid(N=N, h=1.0 / (N + 1))

    if "instance.kernel.samples" in cfg:
        kernel = np.array(_floats(cfg["instance.kernel.samples"]))
        if kernel.shape[0] != 2 * N - 1:
            raise ConfigurationError(
                f"kernel.samples needs {2 * N - 1} values, got {kernel.shape[0]}")
    else:
        kernel = make_kernel(cfg.get("instance.kernel.name", "delta"), grid)

    if "instance.g.table" in cfg:
        dissipation = _table_dissipation(cfg["instance.g.table"], kernel, alpha)
    else:
        dissipation = make_dissipation(cfg.get("instance.g.name", "one"),
                                       kernel, alpha=alpha)

    potential = make_potential(cfg.get("instance.beta.name", "zero"))

    if "instance.u0.table" in cfg:
        u0 = np.array(_floats(cfg["instance.u0.table"]))
        if u0.shape[0] != N:
            raise ConfigurationError(
                f"u0.table needs {N} values, got {u0.shape[0]}")
    else:
        u0 = make_u0(cfg.get("instance.u0.name", "sine(1)"), grid)

    return ProblemInstance(grid=grid, dissipation=dissipation,
                           potential=potential, u0=u0, T=T,
                           name=cfg.get("instance.name", "instance"))


def _table_dissipation(table: str, kernel: np.ndarray, alpha: float):
    """Mobility from sampled pairs 's:g(s)', interpolated by a cubic spline."""
    from scipy.interpolate import CubicSpline

    pairs = []
    for item in table.split(","):
        if ":" not in item:
            raise ConfigurationError("g.table entries must look like 's:value'")
        s, val = item.split(":", 1)
        pairs.append((float(s), float(val)))
    pairs.sort()
    if len(pairs) < 4:
        raise ConfigurationError("g.table needs at least 4 sample pairs")
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    spline = CubicSpline(xs, ys, bc_type="natural", extrapolate=True)
    from .problem import DissipationModel
    return DissipationModel(
        g=lambda s: np.asarray(spline(s), dtype=float),
        g_prime=lambda s: np.asarray(spline(s, 1), dtype=float),
        g_second=lambda s: np.asarray(spline(s, 2), dtype=float),
        alpha=alpha, kernel=kernel, name="table")


def build_wed_config(cfg: dict[str, str]) -> WedConfig:
    return WedConfig(
        epsilon=float(cfg.get("wed.epsilon", "0.25")),
        lam=float(cfg.get("wed.lambda", "0.0")),
        M=int(cfg.get("wed.M", "64")),
    )


def build_opt_config(cfg: dict[str, str]) -> OptimizeConfig:
    return OptimizeConfig(
        method=cfg.get("opt.method", "limited-memory-quasi-newton"),
        g_tol=float(cfg.get("opt.g_tol", "1e-8")),
        max_iters=int(cfg.get("opt.max_iters", "5000")),
        armijo_c=float(cfg.get("opt.armijo_c", "1e-4")),
        armijo_backtrack=float(cfg.get("opt.armijo_backtrack", "0.5")),
        memory=int(cfg.get("opt.memory", "20")),
        seed=int(cfg.get("opt.seed", "0")),
        stop_norm=cfg.get("opt.stop_norm", "gradient"),
    )


def sweep_epsilons(cfg: dict[str, str]) -> list[float]:
    return _floats(cfg.get("sweep.epsilons", "0.5,0.25,0.125,0.0625"))


def sweep_lambdas(cfg: dict[str, str]) -> list[float]:
    return _floats(cfg.get("sweep.lambdas", "0.1,0.01,0.0"))
