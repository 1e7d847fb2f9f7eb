"""Dense solves, sparse triplet storage and basis orthonormalization.

Complex matrices are plain ``numpy`` arrays (``complex128``); reduced bases
are real ``float64`` arrays of shape ``(n, r)`` with orthonormal columns.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._backend import kernels as _default_kernels
from .errors import DimensionMismatch, SingularMatrix

__all__ = [
    "DEFLATION_TOL",
    "PIVOT_TOL",
    "SparseTriplets",
    "LUFactor",
    "solve_dense",
    "orth_extend",
    "gram_residual",
    "empty_basis",
]

PIVOT_TOL = 1e-14
DEFLATION_TOL = 1e-10


@dataclass(frozen=True)
class SparseTriplets:
    """Coordinate-format sparse matrix; duplicate entries are summed."""

    rows: int
    cols: int
    row_index: np.ndarray = field(repr=False)
    col_index: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        ri = np.ascontiguousarray(self.row_index, dtype=np.intp)
        ci = np.ascontiguousarray(self.col_index, dtype=np.intp)
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if not (ri.shape == ci.shape == vals.shape) or ri.ndim != 1:
            raise DimensionMismatch("triplet arrays must be 1-D and equally long")
        if self.rows < 1 or self.cols < 1:
            raise DimensionMismatch("sparse matrix needs at least one row and column")
        if ri.size and (ri.min() < 0 or ri.max() >= self.rows or ci.min() < 0 or ci.max() >= self.cols):
            raise DimensionMismatch("triplet index out of range")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite triplet value")
        object.__setattr__(self, "row_index", ri)
        object.__setattr__(self, "col_index", ci)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dense(cls, a, drop_zeros=True):
        a = np.asarray(a)
        if drop_zeros:
            r, c = np.nonzero(a)
        else:
            r, c = np.indices(a.shape).reshape(2, -1)
        # column-major order keeps the triplet list deterministic and cache friendly
        order = np.lexsort((r, c))
        r, c = r[order], c[order]
        return cls(a.shape[0], a.shape[1], r, c, a[r, c])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls(n, n, idx, idx, np.ones(n))

    @classmethod
    def zeros(cls, rows, cols):
        empty = np.zeros(0, dtype=np.intp)
        return cls(rows, cols, empty, empty, np.zeros(0))

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return self.values.size

    @property
    def is_real(self):
        return not np.any(self.values.imag)

    def to_dense(self):
        out = np.zeros(self.shape, dtype=np.complex128, order="F")
        np.add.at(out, (self.row_index, self.col_index), self.values)
        return out

    def to_csr(self):
        m = sp.coo_matrix((self.values, (self.row_index, self.col_index)), shape=self.shape)
        m = m.tocsr()
        if self.is_real:
            m = m.real.tocsr()
        return m


class LUFactor:
    """LU factorization with partial pivoting of a square complex matrix.

    Raises
    ------
    SingularMatrix
        If a pivot magnitude falls below ``PIVOT_TOL`` times the largest
        column norm of the input.
    """

    def __init__(self, a, kernels=None):
        kern = kernels or _default_kernels
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix contains non-finite entries")
        self.n = a.shape[0]
        self._kernels = kern
        lu = np.array(a, dtype=np.complex128, order="F", copy=True)
        scale = float(np.max(np.linalg.norm(lu, axis=0))) if self.n else 0.0
        self.piv = np.zeros(self.n, dtype=np.intp)
        if scale == 0.0:
            raise SingularMatrix("zero matrix")
        bad = kern.lu_factor_inplace(lu, self.piv, PIVOT_TOL * scale)
        if bad >= 0:
            raise SingularMatrix(f"pivot {bad} below {PIVOT_TOL:g} x max column norm {scale:.3e}")
        self.lu = lu

    def solve(self, b):
        b = np.asarray(b)
        squeeze = b.ndim == 1
        if squeeze:
            b = b[:, None]
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, expected {self.n}")
        x = np.array(b, dtype=np.complex128, order="F", copy=True)
        self._kernels.lu_solve_inplace(self.lu, self.piv, x)
        return x[:, 0] if squeeze else x


def solve_dense(a, b, kernels=None):
    """Solve ``a @ x = b`` for one or several right-hand sides."""
    return LUFactor(a, kernels=kernels).solve(b)


def empty_basis(n):
    return np.zeros((n, 0), dtype=np.float64)


def _split_candidates(x):
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[:, None]
    if not np.iscomplexobj(x):
        return np.asfortranarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], 2 * x.shape[1]), dtype=np.float64, order="F")
    out[:, 0::2] = x.real
    out[:, 1::2] = x.imag
    return out


def orth_extend(v, x, tol=DEFLATION_TOL, kernels=None):
    """Extend an orthonormal basis by the columns of ``x``.

    Complex columns are split into their real and imaginary parts so the
    basis stays real. Existing columns of ``v`` are kept as they are;
    candidates that are (numerically) in the current span are dropped.

    Parameters
    ----------
    v : ndarray, shape (n, r)
        Orthonormal basis, may have zero columns.
    x : ndarray, shape (n,) or (n, k)
        New directions, real or complex.
    tol : float
        Relative deflation tolerance.

    Returns
    -------
    ndarray, shape (n, r')
    """
    kern = kernels or _default_kernels
    v = np.asarray(v, dtype=np.float64)
    cand = _split_candidates(x)
    if v.ndim != 2 or cand.shape[0] != v.shape[0]:
        raise DimensionMismatch(f"basis has {v.shape[0]} rows, candidates have {cand.shape[0]}")
    n, r = v.shape
    cap = min(n, r + cand.shape[1])
    out = np.zeros((n, cap), dtype=np.float64, order="F")
    out[:, :r] = v
    count = kern.mgs_extend(out, r, cand, tol)
    return np.array(out[:, :count])


def gram_residual(v):
    """``max |V^T V - I|`` over all entries."""
    v = np.asarray(v)
    g = v.T @ v
    return float(np.max(np.abs(g - np.eye(g.shape[0]))))
