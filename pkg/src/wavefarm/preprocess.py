"""Feature/target scaling and the deterministic 80/20 split.

The split permutation comes from numpy's default_rng (PCG64) seeded with
the run seed and nothing else, so a given (N, fraction, seed) triple yields
the same partition on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature scaling statistics, fitted once on training data only.

    kind ``minmax`` stores (min, max); ``standard`` stores (mean, stddev).
    Constant features are recorded with stat_b == stat_a and transform to 0.
    """

    kind: str
    stat_a: np.ndarray  # min or mean
    stat_b: np.ndarray  # max or stddev

    def __post_init__(self):
        if self.kind not in ("minmax", "standard"):
            raise ValueError(f"unknown scaler kind {self.kind!r}")
        object.__setattr__(self, "stat_a", np.asarray(self.stat_a, dtype=float))
        object.__setattr__(self, "stat_b", np.asarray(self.stat_b, dtype=float))

    @property
    def n_features(self) -> int:
        return self.stat_a.size

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "stat_a": self.stat_a.tolist(),
            "stat_b": self.stat_b.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerParams":
        return cls(kind=d["kind"], stat_a=np.array(d["stat_a"]), stat_b=np.array(d["stat_b"]))


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split parameters."""

    test_fraction: float = 0.2
    seed: int = 42
    shuffled: bool = True

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")


def fit_scaler(train: np.ndarray, kind: str = "minmax") -> ScalerParams:
    """Fit per-feature statistics over training rows only."""
    x = np.atleast_2d(np.asarray(train, dtype=float))
    if x.size == 0:
        raise ValueError("cannot fit scaler on empty data")
    if kind == "minmax":
        return ScalerParams(kind=kind, stat_a=x.min(axis=0), stat_b=x.max(axis=0))
    if kind == "standard":
        return ScalerParams(kind=kind, stat_a=x.mean(axis=0), stat_b=x.std(axis=0))
    raise ValueError(f"unknown scaler kind {kind!r}")


def _check_width(params: ScalerParams, data: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(data, dtype=float))
    if x.shape[1] != params.n_features:
        raise ValueError(
            f"column mismatch: scaler fitted on {params.n_features} features, got {x.shape[1]}"
        )
    return x


def transform(params: ScalerParams, data: np.ndarray) -> np.ndarray:
    """Apply the fitted scaling; no clipping, constant features map to 0."""
    x = _check_width(params, data)
    if params.kind == "minmax":
        span = params.stat_b - params.stat_a
        safe = np.where(span > 0, span, 1.0)
        out = (x - params.stat_a) / safe
        return np.where(span > 0, out, 0.0)
    std = params.stat_b
    safe = np.where(std > 0, std, 1.0)
    out = (x - params.stat_a) / safe
    return np.where(std > 0, out, 0.0)


def inverse_transform(params: ScalerParams, data: np.ndarray) -> np.ndarray:
    """Exact algebraic inverse of transform; constant features map back to the constant."""
    x = _check_width(params, data)
    if params.kind == "minmax":
        span = params.stat_b - params.stat_a
        return np.where(span > 0, x * span + params.stat_a, params.stat_a)
    std = params.stat_b
    return np.where(std > 0, x * std + params.stat_a, params.stat_a)


def train_test_split(n: int, spec: SplitSpec = SplitSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic index split: last round(test_fraction * n) of the
    (optionally shuffled) permutation form the test set.

    Returns (train_indices, test_indices); together they partition 0..n-1.
    """
    if n < 2:
        raise ValueError("need at least 2 records to split")
    if spec.shuffled:
        order = np.random.default_rng(spec.seed).permutation(n)
    else:
        order = np.arange(n)
    n_test = int(round(spec.test_fraction * n))
    return order[: n - n_test].copy(), order[n - n_test :].copy()
