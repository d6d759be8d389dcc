"""Matplotlib renderings of campaign outputs, written next to the CSV data."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_rank_histograms",
    "save_power_grid",
    "save_singular_values",
    "save_spectrum_flow",
]

_COLORS = ("#c44e52", "#55a868", "#4c72b8", "#8172b2")


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_rank_histograms(
    histograms: dict[str, dict[int, int]],
    path: str | Path,
    ceiling: int | None = None,
    title: str = "",
) -> Path:
    """Grouped bar chart of validated-rank frequencies, one series per label.

    ``ceiling`` draws the dashed theoretical rank bound for the advertised
    dimension.
    """
    fig, ax = plt.subplots(figsize=(7, 4))
    n_max = max(max(h) for h in histograms.values())
    ranks = np.arange(n_max + 1)
    width = 0.8 / max(len(histograms), 1)
    for i, (label, hist) in enumerate(histograms.items()):
        counts = [hist.get(int(r), 0) for r in ranks]
        ax.bar(ranks + (i - (len(histograms) - 1) / 2) * width, counts, width=width,
               label=label, color=_COLORS[i % len(_COLORS)])
    if ceiling is not None:
        ax.axvline(ceiling + 0.5, color="k", linestyle="--", linewidth=1,
                   label=f"rank bound {ceiling}")
    ax.set_xlabel("validated singular values")
    ax.set_ylabel("trials")
    ax.set_xticks(ranks)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _finish(fig, path)


def save_power_grid(
    cells: dict[tuple[int, int], dict[int, int]],
    path: str | Path,
    ceiling: int | None = None,
    base_shots: int = 8192,
) -> Path:
    """Fig-5-style grid: one panel per shot count, one bar series per dim."""
    shots_values = sorted({shots for _, shots in cells})
    dims = sorted({dim for dim, _ in cells})
    ncols = 2
    nrows = (len(shots_values) + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(9, 2.6 * nrows), sharex=True)
    axes = np.atleast_1d(axes).ravel()
    n_max = max(max(h) for h in cells.values())
    ranks = np.arange(n_max + 1)
    width = 0.8 / len(dims)
    for ax, shots in zip(axes, shots_values):
        for i, dim in enumerate(dims):
            hist = cells.get((dim, shots), {})
            counts = [hist.get(int(r), 0) for r in ranks]
            ax.bar(ranks + (i - (len(dims) - 1) / 2) * width, counts, width=width,
                   label=f"d={dim}", color=_COLORS[i % len(_COLORS)])
        if ceiling is not None:
            ax.axvline(ceiling + 0.5, color="k", linestyle="--", linewidth=1)
        ax.text(0.02, 0.9, f"x{shots / base_shots:g}", transform=ax.transAxes)
        ax.set_ylabel("trials")
    for ax in axes[len(shots_values):]:
        ax.set_visible(False)
    axes[0].legend(frameon=False)
    for ax in axes[max(0, len(shots_values) - ncols):len(shots_values)]:
        ax.set_xlabel("validated singular values")
    fig.tight_layout()
    return _finish(fig, path)


def save_singular_values(
    singular_values: np.ndarray, threshold: float, path: str | Path, title: str = ""
) -> Path:
    """Log-scale singular-value profile with the validation threshold."""
    fig, ax = plt.subplots(figsize=(6, 4))
    svals = np.asarray(singular_values, dtype=float)
    index = np.arange(1, svals.size + 1)
    floor = max(threshold * 1e-8, 1e-18)
    ax.semilogy(index, np.maximum(svals, floor), "o", color=_COLORS[2])
    ax.axhline(threshold, color="k", linestyle="--", linewidth=1,
               label=f"tolerance h = {threshold:.4g}")
    ax.set_xlabel("singular value index")
    ax.set_ylabel("singular value")
    ax.set_xticks(index)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    return _finish(fig, path)


def save_spectrum_flow(
    powers: np.ndarray, flow: np.ndarray, path: str | Path, title: str = ""
) -> Path:
    """Eigenvalue trajectories in the complex plane with the unit circle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    angle = np.linspace(0, 2 * np.pi, 512)
    ax.plot(np.cos(angle), np.sin(angle), color="0.8", linewidth=1)
    for j in range(flow.shape[1]):
        traj = flow[:, j]
        ax.plot(traj.real, traj.imag, "-", linewidth=1,
                color=_COLORS[j % len(_COLORS)], alpha=0.8)
        ax.plot(traj.real[0], traj.imag[0], "o", markersize=3,
                color=_COLORS[j % len(_COLORS)])
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_aspect("equal")
    lim = max(1.1, np.max(np.abs(flow)) * 1.05)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    if title:
        ax.set_title(title)
    return _finish(fig, path)
