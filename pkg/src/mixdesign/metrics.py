"""Prediction-accuracy metrics for scored completions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ValidationError


@dataclass(frozen=True)
class MetricsRecord:
    r2: float
    mae: float
    mse: float
    units: str = "normalized"
    m: int = 0


def compute_metrics(y: np.ndarray, y_hat: np.ndarray,
                    units: str = "normalized") -> MetricsRecord:
    """R^2, MAE and MSE of predictions against references."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    y_hat = np.asarray(y_hat, dtype=np.float64).reshape(-1)
    if y.shape != y_hat.shape:
        raise ContractError(f"length mismatch: {y.shape} vs {y_hat.shape}")
    if y.size < 2:
        raise ContractError("need at least 2 samples")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValidationError("constant reference vector; R^2 undefined")
    err = y - y_hat
    ss_res = float(np.sum(err * err))
    return MetricsRecord(
        r2=1.0 - ss_res / ss_tot,
        mae=float(np.mean(np.abs(err))),
        mse=float(np.mean(err * err)),
        units=units,
        m=y.size,
    )
