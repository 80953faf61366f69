"""Prediction and scoring helpers for trained linear models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SparseDataset
from .mpm import ModelTheta, margin

__all__ = [
    "Prediction",
    "accuracy",
    "decision_scores",
    "error_rate",
    "predict",
    "predicted_labels",
    "train_misclassified_count",
]


@dataclass(frozen=True)
class Prediction:
    score: float
    label: float  # +1.0 or -1.0; score exactly 0 maps to +1


def predict(model: ModelTheta, col_idx, values) -> Prediction:
    """Classify one sparse sample given as parallel index/value arrays."""
    col_idx = np.asarray(col_idx, dtype=np.int64)
    values = np.asarray(values, dtype=np.float64)
    if col_idx.size and col_idx.max() >= model.m:
        raise ValueError(
            f"sample index {col_idx.max()} outside model range [0, {model.m})"
        )
    score = float(model.omega[col_idx] @ values + model.b)
    return Prediction(score, 1.0 if score >= 0.0 else -1.0)


def decision_scores(model: ModelTheta, ds: SparseDataset) -> np.ndarray:
    if model.m != ds.m:
        raise ValueError(f"model has {model.m} features, dataset has {ds.m}")
    return ds.matrix() @ model.omega + model.b


def predicted_labels(model: ModelTheta, ds: SparseDataset) -> np.ndarray:
    return np.where(decision_scores(model, ds) >= 0.0, 1.0, -1.0)


def accuracy(model: ModelTheta, ds: SparseDataset) -> float:
    """Percentage of samples whose predicted label matches, in [0, 100]."""
    if ds.n == 0:
        raise ValueError("cannot score an empty dataset")
    ds.assert_signed()
    correct = int(np.sum(predicted_labels(model, ds) == ds.labels))
    return 100.0 * correct / ds.n


def error_rate(model: ModelTheta, ds: SparseDataset) -> float:
    # complement, so the pair sums to exactly 100.0
    return 100.0 - accuracy(model, ds)


def train_misclassified_count(model: ModelTheta, ds: SparseDataset) -> int:
    """Number of samples violating the unit margin: #{i : z_i > 0}."""
    return int(np.sum(margin(model, ds) > 0.0))
