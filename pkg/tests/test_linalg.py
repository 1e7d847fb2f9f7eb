import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morgreed.errors import DimensionMismatch, SingularMatrix
from morgreed.linalg import (
    LUFactor,
    SparseTriplets,
    empty_basis,
    gram_residual,
    orth_extend,
    solve_dense,
)


def test_solve_scalar(kern):
    x = solve_dense(np.array([[2 + 0j]]), np.array([[4 + 0j]]), kernels=kern)
    assert x[0, 0] == 2


def test_solve_identity(kern):
    b = np.arange(6).reshape(3, 2) * (1 - 1j)
    np.testing.assert_array_equal(solve_dense(np.eye(3), b, kernels=kern), b)


def test_solve_permutation(kern):
    x = solve_dense(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([[1.0], [0.0]]), kernels=kern)
    np.testing.assert_array_equal(x, [[0.0], [1.0]])


def test_solve_vector_rhs(kern):
    a = np.array([[3.0, 1.0], [1.0, 2.0]])
    x = solve_dense(a, np.array([9.0, 8.0]), kernels=kern)
    assert x.shape == (2,)
    np.testing.assert_allclose(a @ x, [9.0, 8.0])


def test_singular_matrix_raises(kern):
    with pytest.raises(SingularMatrix):
        solve_dense(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2), kernels=kern)
    with pytest.raises(SingularMatrix):
        LUFactor(np.zeros((3, 3)), kernels=kern)


def test_pivot_threshold_relative_to_column_norm(kern):
    # a pivot of 1e-15 relative to the largest column norm counts as singular
    a = np.diag([1.0, 1e-15, 1.0]) * 1e3
    with pytest.raises(SingularMatrix):
        LUFactor(a, kernels=kern)
    LUFactor(np.diag([1.0, 1e-12, 1.0]), kernels=kern)


def test_solve_shape_errors():
    with pytest.raises(DimensionMismatch):
        solve_dense(np.ones((2, 3)), np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve_dense(np.eye(2), np.ones(3))
    with pytest.raises(ValueError):
        solve_dense(np.array([[np.nan]]), np.ones(1))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 40), k=st.integers(1, 4), seed=st.integers(0, 2**31 - 1))
def test_solve_round_trip(n, k, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if np.linalg.cond(a) > 1e6:
        a = a + 3 * np.sqrt(n) * np.eye(n)
    b = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    x = solve_dense(a, b)
    assert np.linalg.norm(a @ x - b) / max(1.0, np.linalg.norm(b)) <= 1e-8


def test_orth_extend_empty_with_unit():
    v = orth_extend(empty_basis(3), np.array([1.0, 0.0, 0.0]))
    np.testing.assert_array_equal(v, [[1.0], [0.0], [0.0]])


def test_orth_extend_deflates_dependent():
    e1 = np.array([[1.0], [0.0], [0.0]])
    v = orth_extend(e1, 5 * e1)
    np.testing.assert_array_equal(v, e1)


def test_orth_extend_splits_complex():
    # real and imaginary parts are both e1: the second candidate deflates
    v = orth_extend(empty_basis(3), np.array([1 + 1j, 0, 0]))
    np.testing.assert_allclose(v, [[1.0], [0.0], [0.0]], atol=1e-15)


def test_orth_extend_keeps_existing_columns():
    rng = np.random.default_rng(2)
    v = orth_extend(empty_basis(20), rng.standard_normal((20, 3)))
    w = orth_extend(v, rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2)))
    assert w.shape == (20, 7)
    np.testing.assert_array_equal(w[:, :3], v)


def test_orth_extend_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        orth_extend(empty_basis(4), np.ones(5))


def test_gram_residual_examples():
    assert gram_residual(np.eye(3)[:, :2]) == 0
    assert gram_residual(np.array([[0.6], [0.8]])) <= 1e-16


def test_gram_residual_after_20_random_vectors(kern):
    x = np.random.default_rng(3).standard_normal((50, 20))
    assert gram_residual(orth_extend(empty_basis(50), x, kernels=kern)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 60), k=st.integers(1, 12), seed=st.integers(0, 2**31 - 1))
def test_orth_extend_properties(n, k, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    v = orth_extend(empty_basis(n), x)
    assert v.shape[1] <= min(n, 2 * k)
    assert gram_residual(v) <= 1e-10
    # the split real/imaginary candidates lie in the span
    parts = np.hstack([x.real, x.imag])
    resid = parts - v @ (v.T @ parts)
    assert np.linalg.norm(resid) <= 1e-8 * np.linalg.norm(parts)
    # idempotent on its own output
    assert orth_extend(v, v).shape == v.shape


def test_sparse_triplets_sum_duplicates():
    m = SparseTriplets(2, 2, [0, 0, 1], [1, 1, 0], [1.0, 2.0, 3j])
    np.testing.assert_array_equal(m.to_dense(), [[0, 3], [3j, 0]])
    np.testing.assert_array_equal(m.to_csr().toarray(), [[0, 3], [3j, 0]])


def test_sparse_triplets_validation():
    with pytest.raises(DimensionMismatch):
        SparseTriplets(2, 2, [2], [0], [1.0])
    with pytest.raises(DimensionMismatch):
        SparseTriplets(0, 2, [], [], [])
    with pytest.raises(ValueError):
        SparseTriplets(1, 1, [0], [0], [np.inf])


def test_sparse_from_dense_round_trip():
    a = np.array([[0, 1.5], [2j, 0]])
    m = SparseTriplets.from_dense(a)
    assert m.nnz == 2
    np.testing.assert_array_equal(m.to_dense(), a)
    assert m.to_csr().dtype == np.complex128
    assert SparseTriplets.identity(3).to_csr().dtype == np.float64
