"""Distance features, summary statistics, correlation, and 2-D PCA.

The core layout feature is the farm mean distance: each converter's average
distance to the other 15, averaged over the 16 converters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from wavefarm.dataset import N_WEC, FarmDataset, WecLayout


@dataclass(frozen=True)
class DistanceSummary:
    """Per-converter average distances and their farm-level mean, meters."""

    per_wec_avg: np.ndarray
    farm_mean_distance: float


@dataclass(frozen=True)
class FarmSummary:
    """Scenario-level statistics of farm mean distance and total power."""

    scenario: str
    record_count: int
    mean_distance: float
    min_distance: float
    max_distance: float
    mean_power: float
    min_power: float
    max_power: float
    pearson_r: float  # NaN when undefined (constant series)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "record_count": self.record_count,
            "mean_distance": self.mean_distance,
            "min_distance": self.min_distance,
            "max_distance": self.max_distance,
            "mean_power": self.mean_power,
            "min_power": self.min_power,
            "max_power": self.max_power,
            "pearson_r": None if math.isnan(self.pearson_r) else self.pearson_r,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True)
class PcaProjection:
    """Top-2 principal directions, their variances, and per-record scores."""

    components: np.ndarray  # (2, n_features), orthonormal rows
    explained_variance: np.ndarray  # (2,), descending
    scores: np.ndarray  # (n_records, 2)

    def to_dict(self) -> dict:
        return {
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "scores": self.scores.tolist(),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def pairwise_distances(layout: WecLayout) -> np.ndarray:
    """Symmetric 16x16 Euclidean distance matrix for one layout."""
    pts = layout.positions
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def distance_summary(dm: np.ndarray) -> DistanceSummary:
    """Per-WEC average distance (over the other 15) and the farm mean."""
    dm = np.asarray(dm, dtype=float)
    if dm.shape != (N_WEC, N_WEC):
        raise ValueError(f"expected ({N_WEC}, {N_WEC}) distance matrix, got {dm.shape}")
    per_wec_avg = dm.sum(axis=1) / (N_WEC - 1)  # diagonal is zero
    return DistanceSummary(
        per_wec_avg=per_wec_avg, farm_mean_distance=float(per_wec_avg.mean())
    )


def farm_mean_distances(ds: FarmDataset, chunk: int = 4096) -> np.ndarray:
    """Farm mean distance per record, vectorized over the whole dataset."""
    pts = ds.layout_points()
    out = np.empty(len(ds))
    for start in range(0, len(ds), chunk):
        block = pts[start : start + chunk]
        diff = block[:, :, None, :] - block[:, None, :, :]
        dist = np.sqrt((diff**2).sum(axis=-1))
        per_wec = dist.sum(axis=2) / (N_WEC - 1)
        out[start : start + chunk] = per_wec.mean(axis=1)
    return out


def pearson_correlation(x, y) -> float:
    """Pearson product-moment correlation; NaN when either series is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("need at least 2 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt((xc**2).sum() * (yc**2).sum())
    if denom == 0.0:
        return float("nan")
    r = float((xc * yc).sum() / denom)
    return max(-1.0, min(1.0, r))


def farm_summary(ds: FarmDataset) -> FarmSummary:
    """Distance/power statistics over all records plus their correlation."""
    dist = farm_mean_distances(ds)
    power = ds.totals
    return FarmSummary(
        scenario=ds.scenario,
        record_count=len(ds),
        mean_distance=float(dist.mean()),
        min_distance=float(dist.min()),
        max_distance=float(dist.max()),
        mean_power=float(power.mean()),
        min_power=float(power.min()),
        max_power=float(power.max()),
        pearson_r=pearson_correlation(dist, power) if len(ds) >= 2 else float("nan"),
    )


def pca_2d(features: np.ndarray, standardize: bool = True) -> PcaProjection:
    """Top-2 PCA via eigendecomposition of the feature covariance matrix.

    Features are centered (and by default standardized per feature) first.
    Sign convention: the largest-magnitude entry of each component is made
    positive, so results are deterministic across platforms.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError(f"need at least 2 records and 2 features, got shape {x.shape}")
    x = x - x.mean(axis=0)
    if standardize:
        std = x.std(axis=0)
        x = x / np.where(std > 0, std, 1.0)
        x = x - x.mean(axis=0)  # re-center against rounding drift

    cov = (x.T @ x) / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:2]
    components = eigvecs[:, order].T.copy()
    explained = np.maximum(eigvals[order], 0.0)

    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0

    return PcaProjection(
        components=components,
        explained_variance=explained,
        scores=x @ components.T,
    )
