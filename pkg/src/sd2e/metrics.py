"""Root-mean-square error and its Euclidean XY combination."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


def rmse(pred: np.ndarray, truth: np.ndarray) -> float:
    """sqrt(mean((pred - truth)^2)); lengths must match and be nonzero."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size == 0:
        raise InputError(f"pred/truth must be equal nonzero-length vectors, got {pred.shape}, {truth.shape}")
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


@dataclass(frozen=True)
class Metrics:
    """Per-axis errors plus their Euclidean combination."""

    rmse_x: float
    rmse_y: float
    rmse_xy: float

    def __post_init__(self):
        expected = math.hypot(self.rmse_x, self.rmse_y)
        if abs(self.rmse_xy - expected) > 1e-9 * max(1.0, expected):
            raise InputError(f"rmse_xy {self.rmse_xy} inconsistent with hypot {expected}")

    @classmethod
    def combine(cls, rmse_x: float, rmse_y: float) -> "Metrics":
        return cls(rmse_x=rmse_x, rmse_y=rmse_y, rmse_xy=math.hypot(rmse_x, rmse_y))

    def as_dict(self) -> dict:
        return {"rmse_x": self.rmse_x, "rmse_y": self.rmse_y, "rmse_xy": self.rmse_xy}
