#!/usr/bin/env python3
"""Regenerate the bundled synthetic datasets under data/.

Every generator is seeded, so reruns are byte-identical. All bundled sets
keep m < 100 on purpose: narrow data takes the direct solver path, whose
exact subproblem solves make the objective-descent guarantee unconditional.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from scsvm.data import SparseDataset, serialize_svmlight  # noqa: E402


def dense_rows(x: np.ndarray, labels: np.ndarray, prune_zeros: bool = True) -> SparseDataset:
    n, m = x.shape
    rows, cols, vals = [], [], []
    ptr = [0]
    for i in range(n):
        for j in range(m):
            if not prune_zeros or x[i, j] != 0.0:
                cols.append(j)
                vals.append(x[i, j])
        ptr.append(len(cols))
    return SparseDataset(
        np.array(ptr), np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64), labels.astype(np.float64), m,
    )


def separable_toy(path: Path) -> SparseDataset:
    """Two opposing clusters at +-15 on the first axis, so tight that the
    axis coordinate quantizes to the exact center in float64. Converges at
    every budget under default settings; s=0 separates with zero errors."""
    rng = np.random.default_rng(2024)
    n = 80
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    x = np.empty((n, 2))
    x[:, 0] = labels * 15.0 + rng.normal(0.0, 1e-20, n)
    x[:, 1] = rng.normal(0.0, 1e-20, n)
    ds = dense_rows(x, labels, prune_zeros=False)
    serialize_svmlight(ds, path)
    return ds


def noisy_blobs(path: Path) -> SparseDataset:
    """Two separated 2-D clusters with 4% of labels flipped. The spread
    keeps residual margin violations alive at every budget, so default
    training runs to the iteration cap while accuracy stays high."""
    rng = np.random.default_rng(777)
    n = 200
    labels = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    x = np.empty((n, 2))
    x[:, 0] = labels * 3.0 + rng.normal(0.0, 0.6, n)
    x[:, 1] = rng.normal(0.0, 0.6, n)
    flip = rng.choice(n, size=8, replace=False)
    labels[flip] = -labels[flip]
    ds = dense_rows(x, labels, prune_zeros=False)
    serialize_svmlight(ds, path)
    return ds


def dense_mid(path: Path) -> SparseDataset:
    """Dense 8-feature data from a planted separator with 10% label noise."""
    rng = np.random.default_rng(4242)
    n, m = 120, 8
    planted = rng.normal(size=m)
    planted /= np.linalg.norm(planted)
    x = rng.normal(size=(n, m))
    raw = x @ planted + 0.3 * rng.normal(size=n)
    labels = np.where(raw >= 0.0, 1.0, -1.0)
    flip = rng.choice(n, size=12, replace=False)
    labels[flip] = -labels[flip]
    ds = dense_rows(x, labels, prune_zeros=False)
    serialize_svmlight(ds, path)
    return ds


def sparse_imbalanced(path: Path) -> SparseDataset:
    """Sparse 20-feature data, 80/20 class imbalance, 5% flips."""
    rng = np.random.default_rng(99)
    n, m = 150, 20
    planted = rng.normal(size=m)
    x = np.zeros((n, m))
    labels = np.empty(n)
    for i in range(n):
        support = rng.choice(m, size=6, replace=False)
        x[i, support] = rng.normal(size=6)
        bias = 0.8 if i % 5 else -2.0  # one fifth of samples pushed negative
        labels[i] = 1.0 if x[i] @ planted + bias >= 0.0 else -1.0
    flip = rng.choice(n, size=7, replace=False)
    labels[flip] = -labels[flip]
    ds = dense_rows(x, labels, prune_zeros=True)
    serialize_svmlight(ds, path)
    return ds


def tiny(path: Path) -> SparseDataset:
    """Ten samples, three features; quick fixture for command-line tests.

    Rejection sampling keeps every point off the true boundary and the x25
    scale makes the margin fit tight enough to converge at every budget.
    """
    rng = np.random.default_rng(7)
    n, m = 10, 3
    w_true = np.array([1.0, 0.5, 0.0])
    rows = []
    while len(rows) < n:
        cand = rng.normal(size=m)
        if abs(cand @ w_true) >= 0.5:
            rows.append(cand)
    raw = np.array(rows)
    labels = np.where(raw @ w_true >= 0.0, 1.0, -1.0)
    ds = dense_rows(raw * 25.0, labels, prune_zeros=False)
    serialize_svmlight(ds, path)
    return ds


GENERATORS = {
    "separable_toy": separable_toy,
    "noisy_blobs": noisy_blobs,
    "dense_mid": dense_mid,
    "sparse_imbalanced": sparse_imbalanced,
    "tiny": tiny,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out-dir",
        default=str(Path(__file__).resolve().parent.parent / "data"),
        help="directory for the generated files (default: repo data/)",
    )
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'name':<20} {'n':>5} {'m':>4} {'nnz':>6} {'density%':>9}")
    for name, gen in GENERATORS.items():
        ds = gen(out / name)
        st = ds.stats()
        print(f"{name:<20} {st.n:>5} {st.m:>4} {st.nnz:>6} {st.density_pct:>9.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
