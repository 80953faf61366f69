"""Matrix-free normal operator and the two linear solvers behind training.

The operator is theta -> [omega; 0] + rho * Q^T (Q theta) with Q = [A 1]; the
cross-checks below materialize the (m+1)x(m+1) matrix independently.
"""

from __future__ import annotations

import numpy as np
import pytest

from scsvm.data import SparseDataset
from scsvm.linsys import CgConfig, RegularizedNormalOperator, cg_solve, dense_solve

from _util import dense_dataset, random_dataset


def one_sample_two():
    # single sample x = [2], label +1
    return dense_dataset([[2.0]], [1.0])


def materialized(op):
    """Independent dense build of [[I 0];[0 0]] + rho * Q^T Q."""
    ds = op.dataset
    a = ds.matrix().toarray()
    q = np.hstack([a, np.ones((ds.n, 1))])
    m = np.zeros((ds.m + 1, ds.m + 1))
    m[: ds.m, : ds.m] = np.eye(ds.m)
    return m + op.rho * (q.T @ q)


def test_apply_hand_example():
    op = RegularizedNormalOperator(one_sample_two(), rho=1.0)
    out = op.apply(np.array([1.0, 1.0]))
    # Qv = 2*1 + 1 = 3; Q^T 3 = [6, 3]; plus [1, 0]
    np.testing.assert_array_equal(out, [7.0, 3.0])


def test_apply_zero_is_zero():
    op = RegularizedNormalOperator(one_sample_two(), rho=0.4)
    np.testing.assert_array_equal(op.apply(np.zeros(2)), np.zeros(2))


def test_apply_dimension_mismatch():
    op = RegularizedNormalOperator(one_sample_two(), rho=1.0)
    with pytest.raises(ValueError):
        op.apply(np.zeros(3))


@pytest.mark.parametrize("rho", [1e-8, 0.1, 0.4, 10.0])
def test_apply_matches_materialized(rho):
    rng = np.random.default_rng(7)
    for _ in range(5):
        ds = random_dataset(rng, n=rng.integers(2, 40), m=rng.integers(1, 30))
        op = RegularizedNormalOperator(ds, rho=rho)
        mat = materialized(op)
        for _ in range(4):
            v = rng.normal(size=ds.m + 1)
            got = op.apply(v)
            want = mat @ v
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


def test_operator_is_symmetric_and_positive_definite():
    rng = np.random.default_rng(3)
    ds = random_dataset(rng, n=25, m=12)
    op = RegularizedNormalOperator(ds, rho=0.4)
    for _ in range(20):
        v = rng.normal(size=13)
        w = rng.normal(size=13)
        assert np.dot(op.apply(v), w) == pytest.approx(np.dot(v, op.apply(w)), rel=1e-12)
        assert np.dot(v, op.apply(v)) > 0.0


def test_label_signs_cancel_in_the_normal_matrix():
    # Q^T Q with diag(y) Q equals Q^T Q without it, because diag(y)^2 = I
    rng = np.random.default_rng(11)
    ds = random_dataset(rng, n=15, m=6)
    a = ds.matrix().toarray()
    q = np.hstack([a, np.ones((ds.n, 1))])
    qbar = ds.labels[:, None] * q
    np.testing.assert_allclose(q.T @ q, qbar.T @ qbar, rtol=1e-12, atol=1e-12)


def test_dense_solve_hand_example():
    # matrix [[5, 2], [2, 1]], rhs [7, 3] -> theta [1, 1]
    op = RegularizedNormalOperator(one_sample_two(), rho=1.0)
    np.testing.assert_allclose(materialized(op), [[5.0, 2.0], [2.0, 1.0]])
    out = dense_solve(op, np.array([7.0, 3.0]))
    np.testing.assert_allclose(out.theta, [1.0, 1.0], rtol=1e-12)
    assert out.iterations == 0
    assert out.converged


def test_cg_solve_hand_example():
    op = RegularizedNormalOperator(one_sample_two(), rho=1.0)
    out = cg_solve(op, np.array([7.0, 3.0]), CgConfig(tol=1e-12, max_iter=50))
    np.testing.assert_allclose(out.theta, [1.0, 1.0], rtol=1e-10)
    assert out.converged
    assert out.final_residual <= 1e-12


def test_cg_zero_rhs_converges_immediately():
    op = RegularizedNormalOperator(one_sample_two(), rho=1.0)
    out = cg_solve(op, np.zeros(2))
    np.testing.assert_array_equal(out.theta, np.zeros(2))
    assert out.iterations == 0
    assert out.converged


def test_cg_diagonal_system_needs_two_steps():
    # A = 0 makes the operator diag(1, rho*n): two distinct eigenvalues
    ds = SparseDataset(
        row_ptr=np.array([0, 0, 0]),
        col_idx=np.array([], dtype=np.int64),
        values=np.array([]),
        labels=np.array([1.0, -1.0]),
        m=1,
    )
    op = RegularizedNormalOperator(ds, rho=0.4)
    out = cg_solve(op, np.array([2.0, 1.6]), CgConfig(tol=1e-12, max_iter=50))
    np.testing.assert_allclose(out.theta, [2.0, 2.0], rtol=1e-10)
    assert out.iterations <= 2


def test_cg_and_dense_agree():
    rng = np.random.default_rng(23)
    for _ in range(10):
        ds = random_dataset(rng, n=int(rng.integers(5, 60)), m=int(rng.integers(2, 25)))
        rho = float(rng.choice([0.1, 0.4, 10.0]))
        op = RegularizedNormalOperator(ds, rho=rho)
        rhs = rng.normal(size=ds.m + 1)
        direct = dense_solve(op, rhs)
        iterative = cg_solve(op, rhs, CgConfig(tol=1e-10, max_iter=2000))
        assert iterative.converged
        scale = np.linalg.norm(direct.theta)
        assert np.linalg.norm(iterative.theta - direct.theta) <= 1e-6 * max(scale, 1.0)


def test_cg_respects_iteration_cap():
    rng = np.random.default_rng(5)
    ds = random_dataset(rng, n=80, m=40)
    op = RegularizedNormalOperator(ds, rho=10.0)
    out = cg_solve(op, rng.normal(size=41), CgConfig(tol=1e-15, max_iter=1))
    assert out.iterations == 1
    assert not out.converged
    assert out.final_residual > 1e-15


def test_cg_energy_norm_error_is_monotone():
    rng = np.random.default_rng(17)
    ds = random_dataset(rng, n=40, m=20)
    op = RegularizedNormalOperator(ds, rho=0.4)
    rhs = rng.normal(size=21)
    exact = dense_solve(op, rhs).theta
    energies = []

    def watch(x, _residual):
        e = x - exact
        energies.append(float(e @ op.apply(e)))

    cg_solve(op, rhs, CgConfig(tol=1e-12, max_iter=500), callback=watch)
    assert len(energies) >= 3
    diffs = np.diff(energies)
    assert np.all(diffs <= 1e-10 * (1.0 + np.abs(energies[:-1])))


def test_cg_raises_on_nonfinite():
    class Broken:
        dim = 2

        def apply(self, v):
            return np.array([np.nan, np.nan])

    with pytest.raises(np.linalg.LinAlgError):
        cg_solve(Broken(), np.array([1.0, 1.0]))


def test_cg_warm_start_helps_on_repeated_solve():
    rng = np.random.default_rng(29)
    ds = random_dataset(rng, n=60, m=30)
    op = RegularizedNormalOperator(ds, rho=0.4)
    rhs = rng.normal(size=31)
    cold = cg_solve(op, rhs, CgConfig(tol=1e-8, max_iter=500))
    warm = cg_solve(op, rhs, CgConfig(tol=1e-8, max_iter=500), x0=cold.theta)
    assert warm.iterations <= 1


def test_config_validation():
    with pytest.raises(ValueError):
        CgConfig(tol=0.0)
    with pytest.raises(ValueError):
        CgConfig(max_iter=0)
