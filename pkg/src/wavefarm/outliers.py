"""Outlier screening battery: Local Outlier Factor, z-scores, IQR fences.

LOF scores near 1 mean density similar to neighbours; scores above 1 mean
the point sits in a locally sparse region (candidate outlier).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_LOF_K = 20
DEFAULT_LOF_THRESHOLD = 1.5
DEFAULT_Z_THRESHOLD = 3.0
DEFAULT_IQR_MULTIPLIER = 1.5


@dataclass(frozen=True)
class LofParams:
    """Neighbour count for LOF; must satisfy 1 <= k < number of points."""

    k: int = DEFAULT_LOF_K

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass
class OutlierReport:
    """Combined per-record results of the three detectors."""

    lof_scores: np.ndarray
    lof_flags: np.ndarray
    z_scores: np.ndarray
    z_flags: np.ndarray
    iqr_lower: float
    iqr_upper: float
    iqr_flags: np.ndarray

    def to_dict(self) -> dict:
        return {
            "lof_scores": [_json_float(v) for v in self.lof_scores],
            "lof_flags": [bool(v) for v in self.lof_flags],
            "z_scores": list(map(float, self.z_scores)),
            "z_flags": [bool(v) for v in self.z_flags],
            "iqr_lower": self.iqr_lower,
            "iqr_upper": self.iqr_upper,
            "iqr_flags": [bool(v) for v in self.iqr_flags],
            "counts": {
                "lof": int(np.sum(self.lof_flags)),
                "zscore": int(np.sum(self.z_flags)),
                "iqr": int(np.sum(self.iqr_flags)),
            },
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _json_float(v: float) -> float | str:
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def _knn(points: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbours per point, ties broken by lower index.

    Brute-force O(N^2) distances, chunked by rows to bound memory. Returns
    (neighbour index array (N, k), neighbour distance array (N, k)), both
    ordered nearest-first.
    """
    n = len(points)
    neigh = np.empty((n, k), dtype=np.intp)
    ndist = np.empty((n, k))
    chunk = max(1, min(n, int(2e7) // max(n, 1)))
    sq = (points**2).sum(axis=1)
    for start in range(0, n, chunk):
        block = points[start : start + chunk]
        d2 = sq[start : start + chunk, None] + sq[None, :] - 2.0 * (block @ points.T)
        np.maximum(d2, 0.0, out=d2)
        d = np.sqrt(d2)
        rows = np.arange(start, min(start + chunk, n))
        d[np.arange(len(rows)), rows] = np.inf  # exclude self
        # stable sort keeps index order among exact ties
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        neigh[rows] = order
        ndist[rows] = np.take_along_axis(d, order, axis=1)
    return neigh, ndist


def lof_scores(points: np.ndarray, params: LofParams = LofParams()) -> np.ndarray:
    """Classical LOF over an N x D point matrix.

    k-distance, reachability distance, and local reachability density follow
    the textbook construction with a fixed-size neighbour set of exactly k
    points (ties broken by lower index). Duplicate points with zero
    reachability sums get lrd = +inf and a score of 1.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(pts)
    k = params.k
    if n <= k:
        raise ValueError(f"need more than k={k} points, got {n}")

    neigh, ndist = _knn(pts, k)
    kdist = ndist[:, -1]

    # reach(p, o) = max(kdist(o), d(p, o)) over p's neighbour set
    reach = np.maximum(kdist[neigh], ndist)
    reach_sum = reach.sum(axis=1)
    with np.errstate(divide="ignore"):
        lrd = np.where(reach_sum > 0, k / reach_sum, np.inf)

    neighbor_lrd_mean = np.empty(n)
    scores = np.empty(n)
    for i in range(n):
        neighbor_lrd_mean[i] = lrd[neigh[i]].mean()
    both_inf = np.isinf(neighbor_lrd_mean) & np.isinf(lrd)
    with np.errstate(invalid="ignore", over="ignore"):
        scores = np.where(both_inf, 1.0, neighbor_lrd_mean / lrd)
    return scores


def zscore_flags(
    values: np.ndarray, threshold: float = DEFAULT_Z_THRESHOLD
) -> tuple[np.ndarray, np.ndarray]:
    """Population z-scores and |z| > threshold flags.

    A constant series yields all-zero scores and no flags.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least 2 values")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    std = v.std()  # population
    if std == 0:
        scores = np.zeros_like(v)
    else:
        scores = (v - v.mean()) / std
    return np.abs(scores) > threshold, scores


def iqr_fences(
    values: np.ndarray, multiplier: float = DEFAULT_IQR_MULTIPLIER
) -> tuple[float, float, np.ndarray]:
    """Box-plot fences Q1 - m*IQR and Q3 + m*IQR with linear-interpolation quantiles."""
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise ValueError("need at least 4 values")
    if multiplier <= 0:
        raise ValueError("multiplier must be positive")
    q1, q3 = np.quantile(v, [0.25, 0.75])  # linear interpolation
    iqr = q3 - q1
    lower = float(q1 - multiplier * iqr)
    upper = float(q3 + multiplier * iqr)
    return lower, upper, (v < lower) | (v > upper)


def screen(
    features: np.ndarray,
    series: np.ndarray,
    lof_params: LofParams = LofParams(),
    lof_threshold: float = DEFAULT_LOF_THRESHOLD,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    iqr_multiplier: float = DEFAULT_IQR_MULTIPLIER,
) -> OutlierReport:
    """Run all three detectors: LOF on ``features``, z-score/IQR on ``series``."""
    lof = lof_scores(features, lof_params)
    z_flag, z_score = zscore_flags(series, z_threshold)
    lower, upper, iqr_flag = iqr_fences(series, iqr_multiplier)
    return OutlierReport(
        lof_scores=lof,
        lof_flags=lof > lof_threshold,
        z_scores=z_score,
        z_flags=z_flag,
        iqr_lower=lower,
        iqr_upper=upper,
        iqr_flags=iqr_flag,
    )
