"""Dual coordinate descent for the L1 hinge-loss SVM baseline.

Solves the box-constrained dual

    min_a  0.5 a^T Qhat a - sum(a)   s.t.  0 <= a_i <= C

where Qhat_ij = y_i y_j xbar_i . xbar_j and xbar = [x; 1]: the bias rides
along as a constant feature, so the primal weight vector w = sum a_i y_i xbar_i
carries it in its last slot. One epoch sweeps all samples in a freshly drawn
permutation; the stopping rule is the largest projected-gradient magnitude
seen during an epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SparseDataset
from .mpm import ModelTheta

__all__ = ["DcdConfig", "DcdResult", "dcd_train"]


@dataclass(frozen=True)
class DcdConfig:
    C: float = 1.0
    max_epochs: int = 1000
    tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0.0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass(frozen=True)
class DcdResult:
    converged: bool
    epochs: int
    dual_objectives: tuple[float, ...]  # sum(a) - 0.5||w||^2 after each epoch
    alpha: np.ndarray


def dcd_train(ds: SparseDataset, cfg: DcdConfig = DcdConfig()) -> tuple[ModelTheta, DcdResult]:
    """Returns the trained model and the run record. Hitting max_epochs
    returns the current iterate with converged=False rather than raising."""
    ds.assert_signed()
    n, m = ds.n, ds.m
    row_ptr, col_idx, values, y = ds.row_ptr, ds.col_idx, ds.values, ds.labels
    # diagonal of Qhat; the +1 is the constant bias feature, so it never
    # vanishes even for an all-zero row
    diag = np.add.reduceat(values * values, row_ptr[:-1]) if ds.nnz else np.zeros(n)
    diag = np.where(np.diff(row_ptr) > 0, diag, 0.0) + 1.0

    rng = np.random.default_rng(cfg.seed)
    alpha = np.zeros(n)
    w = np.zeros(m + 1)  # augmented: w[:m] is omega, w[m] is the bias
    objectives = []
    converged = False
    epochs = 0
    for epoch in range(1, cfg.max_epochs + 1):
        epochs = epoch
        worst = 0.0
        for i in rng.permutation(n):
            lo, hi = row_ptr[i], row_ptr[i + 1]
            cols = col_idx[lo:hi]
            vals = values[lo:hi]
            g = y[i] * (w[cols] @ vals + w[m]) - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = min(g, 0.0)
            elif a == cfg.C:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                worst = max(worst, abs(pg))
                a_new = min(max(a - g / diag[i], 0.0), cfg.C)
                step = (a_new - a) * y[i]
                if step != 0.0:
                    w[cols] += step * vals
                    w[m] += step
                    alpha[i] = a_new
        objectives.append(float(alpha.sum() - 0.5 * (w @ w)))
        if worst <= cfg.tol:
            converged = True
            break
    model = ModelTheta(w[:m].copy(), float(w[m]))
    return model, DcdResult(converged, epochs, tuple(objectives), alpha.copy())
