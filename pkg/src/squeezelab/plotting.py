"""Static SVG figures rendered in-process with matplotlib.

Plots are conveniences for eyeballing results; the CSVs next to them are
the contract.  The SVG hash salt is pinned and timestamps are stripped so
repeated runs produce stable files.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "squeezelab"

import matplotlib.pyplot as plt
import numpy as np

_SVG_META = {"Date": None}


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_ellipse(path: Path, curves: dict[float, np.ndarray],
                 mc_points: dict[float, np.ndarray] | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    for delta, pts in sorted(curves.items()):
        ax.plot(pts[:, 0], pts[:, 1], lw=1.2, label=f"$\\delta$ = {delta:.4g} rad")
    if mc_points:
        for delta, pts in sorted(mc_points.items()):
            ax.plot(pts[:, 0], pts[:, 1], "o", ms=3, alpha=0.6)
    ax.set_xlabel("$P_1/N$")
    ax.set_ylabel("$P_2/N$")
    ax.set_aspect("equal")
    ax.legend(fontsize=8, loc="upper right")
    _save(fig, path)


def plot_noise_maps(path: Path, alphas: np.ndarray, betas: np.ndarray,
                    panels: dict[str, np.ndarray]) -> None:
    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.6))
    if len(panels) == 1:
        axes = [axes]
    extent = (betas[0] / math.pi, (betas[-1] + betas[1] - betas[0]) / math.pi,
              alphas[0] / math.pi, (alphas[-1] + alphas[1] - alphas[0]) / math.pi)
    for ax, (label, data) in zip(axes, panels.items()):
        im = ax.imshow(data, origin="lower", aspect="auto", extent=extent, cmap="viridis")
        ax.set_xlabel(r"$\beta/\pi$")
        ax.set_ylabel(r"$\alpha/\pi$")
        ax.set_title(label)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    _save(fig, path)


def plot_heatmap(path: Path, m_values: np.ndarray, matrix: np.ndarray, title: str) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    half = 0.5 * (m_values[1] - m_values[0])
    extent = (m_values[0] - half, m_values[-1] + half, m_values[0] - half, m_values[-1] + half)
    im = ax.imshow(matrix.T, origin="lower", extent=extent, cmap="magma")
    ax.set_xlabel("$M_1$")
    ax.set_ylabel("$M_2$")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(path: Path, n_values, ratios, kind: str) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.plot(n_values, ratios, "o-", ms=4)
    ax.set_xlabel("atoms per pixel $N$")
    ax.set_ylabel(r"min $\Delta P_d$ / $\sqrt{N/2}$")
    ax.set_xscale("log")
    ax.set_title(kind)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_histogram(path: Path, centers, counts, label: str) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.bar(centers, counts, width=0.9, alpha=0.8)
    ax.set_xlabel("$P_d$")
    ax.set_ylabel("counts")
    ax.set_title(label)
    fig.tight_layout()
    _save(fig, path)


def plot_allan(path: Path, taus, sigmas, fitted_a: float, analytic_a: float) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.loglog(taus, sigmas, "o", ms=4, label="simulated")
    grid = np.asarray(taus, dtype=float)
    ax.loglog(grid, fitted_a / np.sqrt(grid), "-", label=f"fit {fitted_a:.2e}/$\\sqrt{{\\tau}}$")
    ax.loglog(grid, analytic_a / np.sqrt(grid), "--", label=f"analytic {analytic_a:.2e}/$\\sqrt{{\\tau}}$")
    ax.set_xlabel(r"$\tau$ (s)")
    ax.set_ylabel(r"$\sigma_y(\tau)$")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_phase(path: Path, betas, dphi, n_atoms: int) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.semilogy(np.asarray(betas) / math.pi, dphi, lw=1.2)
    ax.axhline(1.0 / math.sqrt(n_atoms), color="k", ls="--", lw=0.8, label="1/$\\sqrt{N}$")
    ax.axhline(1.0 / n_atoms, color="r", ls=":", lw=0.8, label="1/N")
    ax.set_xlabel(r"$\beta/\pi$")
    ax.set_ylabel(r"$\Delta\phi$")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
