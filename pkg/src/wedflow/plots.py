"""Figure rendering for the CLI report path (matplotlib, file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiments import SweepTable  # noqa: E402
from .problem import ProblemInstance, Trajectory  # noqa: E402
from .problem import phi1, phi2  # noqa: E402


def plot_trajectory(traj: Trajectory, inst: ProblemInstance,
                    path: Path, title: str = "trajectory") -> None:
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    im = ax0.imshow(traj.states, aspect="auto", origin="lower",
                    extent=[inst.grid.x[0], inst.grid.x[-1], 0.0, traj.T],
                    cmap="viridis")
    ax0.set_xlabel("x")
    ax0.set_ylabel("t")
    ax0.set_title(title)
    fig.colorbar(im, ax=ax0)

    energies = [phi1(u, inst) + phi2(u, inst) for u in traj.states]
    ax1.plot(traj.times, energies, "-")
    ax1.set_xlabel("t")
    ax1.set_ylabel("phi1 + phi2")
    ax1.set_title("energy along the trajectory")
    ax1.set_yscale("log" if min(energies) > 0 else "linear")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_residual_profile(node_norms: np.ndarray, xi_norms: np.ndarray,
                          tau: float, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    m_res = np.arange(2, node_norms.shape[0] + 2)
    m_xi = np.arange(1, xi_norms.shape[0] + 1)
    ax.semilogy(m_res * tau, np.maximum(node_norms, 1e-300), label="residual")
    ax.semilogy(m_xi * tau, np.maximum(xi_norms, 1e-300), label="|xi|_H")
    ax.set_xlabel("t")
    ax.set_ylabel("H-norm")
    ax.set_title("stationarity-system defect")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(table: SweepTable, path: Path, x_field: str = "epsilon") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [getattr(r, "epsilon" if x_field == "epsilon" else "lam")
          for r in table.rows]
    errs = [r.err_L2H for r in table.rows]
    finite = [(x, e) for x, e in zip(xs, errs)
              if np.isfinite(e) and x > 0 and e > 0]
    if finite:
        fx, fe = zip(*finite)
        ax.loglog(fx, fe, "o-")
        if len(finite) >= 2:
            slope = np.polyfit(np.log(fx), np.log(fe), 1)[0]
            ax.set_title(f"error vs {x_field} (empirical slope {slope:.2f})")
    ax.set_xlabel(x_field)
    ax.set_ylabel("err_L2H")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_comparison(wed: Trajectory, ref: Trajectory, inst: ProblemInstance,
                    path: Path) -> None:
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    x = inst.grid.x
    for frac, color in ((0.0, "C0"), (0.25, "C1"), (0.5, "C2"), (1.0, "C3")):
        m = int(round(frac * wed.M))
        ax0.plot(x, wed.states[m], color=color, label=f"t={m * wed.tau:.3g}")
        ax0.plot(x, ref.states[m], color=color, linestyle="--")
    ax0.set_xlabel("x")
    ax0.set_title("variational (solid) vs causal (dashed)")
    ax0.legend(fontsize=8)

    h = inst.grid.h
    diffs = np.sqrt(h * np.sum((wed.states - ref.states) ** 2, axis=1))
    ax1.semilogy(wed.times, np.maximum(diffs, 1e-300))
    ax1.set_xlabel("t")
    ax1.set_ylabel("|difference|_H")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
