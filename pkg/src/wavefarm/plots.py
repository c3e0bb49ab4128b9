"""Figure rendering for the CLI report path.

Every plot here is a file-output rendering of data the CLI also writes as
CSV; the CSVs remain the machine-readable contract, the PNGs are for eyes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_distance_power(
    dist: np.ndarray, power: np.ndarray, path: str | Path, scenario: str,
    bin_centers: np.ndarray | None = None, bin_means: np.ndarray | None = None,
) -> None:
    """Farm mean distance vs total power scatter, with optional binned means."""
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.scatter(dist, power, s=3, alpha=0.25, label="records", rasterized=True)
    if bin_centers is not None and len(bin_centers):
        ax.plot(bin_centers, bin_means, color="crimson", lw=2, label="binned mean (10 m)")
    ax.set_xlabel("farm mean distance (m)")
    ax.set_ylabel("total power (W)")
    ax.set_title(f"{scenario}: distance vs total absorbed power")
    ax.legend(loc="best")
    _save(fig, Path(path))


def plot_distributions(
    dist: np.ndarray, power: np.ndarray, path: str | Path, scenario: str
) -> None:
    """Histograms of farm mean distance and total power."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].hist(dist, bins=50, color="steelblue")
    axes[0].set_xlabel("farm mean distance (m)")
    axes[0].set_ylabel("count")
    axes[1].hist(power, bins=50, color="seagreen")
    axes[1].set_xlabel("total power (W)")
    axes[1].set_ylabel("count")
    fig.suptitle(f"{scenario}: distance and power distributions")
    _save(fig, Path(path))


def plot_pca_scatter(scores: np.ndarray, path: str | Path, scenario: str) -> None:
    """2-D PCA score scatter of the position features."""
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(scores[:, 0], scores[:, 1], s=3, alpha=0.25, rasterized=True)
    ax.set_xlabel("PC1")
    ax.set_ylabel("PC2")
    ax.set_title(f"{scenario}: PCA of layout positions")
    _save(fig, Path(path))


def plot_loss_curves(
    train_loss: list[float], val_loss: list[float], path: str | Path, scenario: str
) -> None:
    """Training/validation MSE per epoch."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    epochs = np.arange(len(train_loss))
    ax.plot(epochs, train_loss, label="train")
    ax.plot(epochs, val_loss, label="validation")
    ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("MSE (normalized target)")
    ax.set_title(f"{scenario}: training loss")
    ax.legend(loc="best")
    _save(fig, Path(path))


def plot_layout_scatter(points: np.ndarray, path: str | Path, scenario: str) -> None:
    """WEC positions for a sample of layouts; points is (n_layouts, 16, 2)."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for layout in points:
        ax.scatter(layout[:, 0], layout[:, 1], s=14, alpha=0.7)
    ax.set_xlim(0, 566)
    ax.set_ylim(0, 566)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"{scenario}: WEC positions ({len(points)} layouts)")
    _save(fig, Path(path))


def plot_outlier_scores(
    dist: np.ndarray, power: np.ndarray, lof: np.ndarray, flags: np.ndarray,
    path: str | Path, scenario: str,
) -> None:
    """Distance/power scatter colored by LOF score, flagged points circled."""
    fig, ax = plt.subplots(figsize=(7, 5))
    sc = ax.scatter(dist, power, c=lof, s=6, cmap="viridis", rasterized=True)
    if flags.any():
        ax.scatter(
            dist[flags], power[flags], facecolors="none", edgecolors="red", s=60,
            label="LOF flagged",
        )
        ax.legend(loc="best")
    fig.colorbar(sc, ax=ax, label="LOF score")
    ax.set_xlabel("farm mean distance (m)")
    ax.set_ylabel("total power (W)")
    ax.set_title(f"{scenario}: LOF screening")
    _save(fig, Path(path))
