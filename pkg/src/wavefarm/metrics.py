"""Regression evaluation metrics in normalized and physical (watts) units."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from wavefarm.preprocess import ScalerParams, inverse_transform


@dataclass(frozen=True)
class MetricsReport:
    """MSE/RMSE/MAE/R2 on the normalized target, plus watts-domain equivalents.

    R2 is an artifact addition (normalized MSE alone is scale-dependent);
    it is NaN for a constant truth series.
    """

    mse: float
    rmse: float
    mae: float
    r2: float
    mse_physical: float = float("nan")
    rmse_physical: float = float("nan")
    mae_physical: float = float("nan")

    def to_dict(self) -> dict:
        def j(v: float):
            return None if math.isnan(v) else v

        return {
            "mse": self.mse,
            "rmse": self.rmse,
            "mae": self.mae,
            "r2": j(self.r2),
            "mse_physical": j(self.mse_physical),
            "rmse_physical": j(self.rmse_physical),
            "mae_physical": j(self.mae_physical),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _core(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[float, float, float, float]:
    resid = y_pred - y_true
    mse = float((resid**2).mean())
    mae = float(np.abs(resid).mean())
    ss_tot = float(((y_true - y_true.mean()) ** 2).sum())
    r2 = float("nan") if ss_tot == 0 else 1.0 - float((resid**2).sum()) / ss_tot
    return mse, math.sqrt(mse), mae, r2


def evaluate(y_true, y_pred) -> MetricsReport:
    """Normalized-unit metrics for matching truth/prediction series."""
    yt = np.asarray(y_true, dtype=float).reshape(-1)
    yp = np.asarray(y_pred, dtype=float).reshape(-1)
    if yt.size == 0:
        raise ValueError("empty series")
    if yt.shape != yp.shape:
        raise ValueError(f"length mismatch: {yt.size} vs {yp.size}")
    mse, rmse, mae, r2 = _core(yt, yp)
    return MetricsReport(mse=mse, rmse=rmse, mae=mae, r2=r2)


def evaluate_with_physical(
    y_true_norm, y_pred_norm, target_scaler: ScalerParams
) -> MetricsReport:
    """Normalized metrics plus watts-domain fields.

    Physical values come from inverse-transforming both series, not from
    rescaling the normalized metrics, so they are exact.
    """
    base = evaluate(y_true_norm, y_pred_norm)
    yt = inverse_transform(
        target_scaler, np.asarray(y_true_norm, dtype=float).reshape(-1, 1)
    )[:, 0]
    yp = inverse_transform(
        target_scaler, np.asarray(y_pred_norm, dtype=float).reshape(-1, 1)
    )[:, 0]
    mse_p, rmse_p, mae_p, _ = _core(yt, yp)
    return MetricsReport(
        mse=base.mse,
        rmse=base.rmse,
        mae=base.mae,
        r2=base.r2,
        mse_physical=mse_p,
        rmse_physical=rmse_p,
        mae_physical=mae_p,
    )
