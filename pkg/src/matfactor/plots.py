"""Figure rendering for report directories.

Figures are a convenience layer next to the delimited outputs; every number
shown here is also available in a CSV, and determinism guarantees apply to
the CSVs only.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import NormalitySummary
from .simulation import McReport


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def eigenvalue_figure(row_eigenvalues, col_eigenvalues, path) -> Path:
    """Scree and eigen-ratio traces for both axes."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    for col, (vals, label) in enumerate(
        [(np.asarray(row_eigenvalues), "row"), (np.asarray(col_eigenvalues), "column")]
    ):
        idx = np.arange(1, len(vals) + 1)
        axes[0, col].plot(idx, vals, "o-", ms=3)
        axes[0, col].set_title(f"{label} covariance eigenvalues")
        axes[0, col].set_xlabel("index")
        if len(vals) > 1:
            ratios = vals[:-1] / vals[1:]
            axes[1, col].plot(idx[:-1], ratios, "o-", ms=3, color="tab:orange")
        axes[1, col].set_title(f"{label} eigenvalue ratios")
        axes[1, col].set_xlabel("index")
    return _save(fig, path)


def loading_heatmap(loadings, row_labels, path, title="loadings") -> Path:
    loadings = np.asarray(loadings)
    fig, ax = plt.subplots(figsize=(6, max(3, 0.25 * loadings.shape[0])))
    vmax = np.abs(loadings).max() or 1.0
    im = ax.imshow(loadings, aspect="auto", cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    ax.set_xticks(range(loadings.shape[1]))
    ax.set_xticklabels([f"f{j + 1}" for j in range(loadings.shape[1])])
    ax.set_yticks(range(loadings.shape[0]))
    ax.set_yticklabels(row_labels, fontsize=7)
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.8)
    return _save(fig, path)


def mc_boxplots(report: McReport, path) -> Path:
    """Boxplots of per-replication loading distances and factor errors."""
    fig, axes = plt.subplots(1, 3, figsize=(10, 4))
    metrics = [("d_row", "row-space distance"), ("d_col", "column-space distance"),
               ("factor_mean", "factor error (per-rep mean)")]
    for ax, (field, title) in zip(axes, metrics):
        data = [getattr(report.results[m], field) for m in report.methods]
        ax.boxplot(data, tick_labels=list(report.methods))
        ax.set_title(title)
        ax.tick_params(axis="x", rotation=20)
    return _save(fig, path)


def qq_figure(summary: NormalitySummary, path) -> Path:
    """One QQ panel per coordinate of the loading-error draws."""
    n_coords = summary.standardized.shape[1]
    fig, axes = plt.subplots(1, n_coords, figsize=(3.2 * n_coords, 3.4), squeeze=False)
    for coord in range(n_coords):
        ax = axes[0, coord]
        ax.plot(summary.theoretical_quantiles, summary.standardized[:, coord], ".", ms=3)
        lims = [summary.theoretical_quantiles[0], summary.theoretical_quantiles[-1]]
        ax.plot(lims, lims, "k-", lw=1)
        ax.set_title(f"coordinate {coord + 1}")
        ax.set_xlabel("normal quantile")
        if coord == 0:
            ax.set_ylabel("empirical quantile")
    return _save(fig, path)
