"""Figure rendering for the command-line report paths.

All functions write a file and return its path; they import matplotlib
lazily with the Agg backend so headless runs and library users that never
plot pay nothing.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def save_trajectory_figure(trajectories, path: str | Path, max_paths: int = 50) -> Path:
    """Realized paths: x-y traces in 2-D, position against step otherwise."""
    plt = _plt()
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 5))
    shown = trajectories[:max_paths]
    for tr in shown:
        r = tr.realized
        if r.shape[1] == 2:
            ax.plot(r[:, 0], r[:, 1], lw=0.8, alpha=0.7)
        else:
            ax.plot(np.arange(len(r)), r[:, 0], lw=0.8, alpha=0.7)
    if shown and shown[0].realized.shape[1] == 2:
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_aspect("equal", adjustable="datalim")
    else:
        ax.set_xlabel("step")
        ax.set_ylabel("position")
    ax.set_title(f"{len(shown)} of {len(trajectories)} paths")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_cf_figure(comparison, path: str | Path) -> Path:
    """Analytic and empirical characteristic function moduli plus deviation."""
    plt = _plt()
    path = Path(path)
    idx = np.arange(len(comparison.grid))
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(idx, np.abs(comparison.analytic), "o-", ms=3, label="analytic")
    ax1.plot(idx, np.abs(comparison.empirical), "x", ms=4, label="empirical")
    ax1.set_ylabel("|f(t)|")
    ax1.legend()
    dev = np.abs(comparison.analytic - comparison.empirical)
    ax2.plot(idx, dev, "k.-", lw=0.8)
    ax2.axhline(comparison.threshold(), color="r", ls="--", label="threshold")
    ax2.set_ylabel("|deviation|")
    ax2.set_xlabel("grid point")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_cf_values_figure(grid: np.ndarray, values: np.ndarray, path: str | Path) -> Path:
    """Modulus and phase of characteristic-function values over a grid."""
    plt = _plt()
    path = Path(path)
    idx = np.arange(len(grid))
    values = np.asarray(values, dtype=complex)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(idx, np.abs(values), "o-", ms=3, label="|f(t)|")
    ax.plot(idx, np.angle(values), ".--", ms=3, label="arg f(t)")
    ax.set_xlabel("grid point")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_pmf_figure(dist, path: str | Path) -> Path:
    """Point masses: stem plot in 1-D, mass-scaled scatter in 2-D."""
    plt = _plt()
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 5))
    pts = dist.points
    if pts.shape[1] == 1:
        ax.stem(pts[:, 0], dist.masses, basefmt=" ")
        ax.set_xlabel("point")
        ax.set_ylabel("mass")
    else:
        m = dist.masses / dist.masses.max()
        sc = ax.scatter(pts[:, 0], pts[:, 1], s=400 * m, c=dist.masses, cmap="viridis")
        fig.colorbar(sc, ax=ax, label="mass")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(f"{len(dist)} support points, total mass {dist.total:.6f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_levy_figure(levy, path: str | Path) -> Path:
    """Atoms of a finite Levy measure."""
    plt = _plt()
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 5))
    locs = levy.locations
    if locs.shape[1] == 1:
        ax.stem(locs[:, 0], levy.weights, basefmt=" ")
        ax.set_xlabel("location")
        ax.set_ylabel("weight")
    else:
        sc = ax.scatter(locs[:, 0], locs[:, 1], s=30, c=levy.weights, cmap="magma")
        fig.colorbar(sc, ax=ax, label="weight")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    ax.set_title(f"{len(levy)} atoms, total mass {levy.total_mass:.6f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
