# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels.

Drop-in replacement for ``_pykernels``. LU factorization is recursive: small
leaf panels run in C, the triangular solves and Schur-complement updates go
through the BLAS shipped with scipy.
"""

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zgemm, ztrsm

import numpy as np

cdef inline double abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef Py_ssize_t LEAF = 8


cdef inline void _swap_rows(double complex[::1, :] a, Py_ssize_t[::1] piv, Py_ssize_t j,
                            Py_ssize_t k0, Py_ssize_t kend) noexcept nogil:
    cdef Py_ssize_t k, p
    cdef double complex t
    for k in range(k0, kend):
        p = piv[k]
        if p != k:
            t = a[k, j]
            a[k, j] = a[p, j]
            a[p, j] = t


cdef Py_ssize_t _leaf_lu(double complex[::1, :] a, Py_ssize_t[::1] piv, Py_ssize_t r0,
                         Py_ssize_t m, Py_ssize_t nc, double threshold) noexcept nogil:
    """Unblocked LU of the m x nc block at (r0, r0); swaps stay inside the block."""
    cdef Py_ssize_t k, i, j, p, rend = r0 + m
    cdef double best, v
    cdef double complex t, inv
    for k in range(r0, r0 + nc):
        p = k
        best = abs2(a[k, k])
        for i in range(k + 1, rend):
            v = abs2(a[i, k])
            if v > best:
                best = v
                p = i
        piv[k] = p
        if not (sqrt(best) >= threshold):
            return k
        if p != k:
            for j in range(r0, r0 + nc):
                t = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = t
        inv = 1.0 / a[k, k]
        for i in range(k + 1, rend):
            a[i, k] = a[i, k] * inv
        for j in range(k + 1, r0 + nc):
            t = a[k, j]
            if t != 0:
                for i in range(k + 1, rend):
                    a[i, j] = a[i, j] - a[i, k] * t
    return -1


cdef Py_ssize_t _rec_lu(double complex[::1, :] a, Py_ssize_t[::1] piv, Py_ssize_t r0,
                        Py_ssize_t m, Py_ssize_t nc, double threshold) noexcept nogil:
    """Recursive LU of the m x nc panel whose top-left corner is (r0, r0)."""
    cdef Py_ssize_t n1, n2, j, fail
    cdef int m_, n_, k_, lda = <int>a.shape[0]
    cdef double complex one = 1.0, minus_one = -1.0
    cdef char side = b'L', lo = b'L', notr = b'N', unit = b'U'
    if nc <= LEAF:
        return _leaf_lu(a, piv, r0, m, nc, threshold)
    n1 = nc // 2
    n2 = nc - n1
    fail = _rec_lu(a, piv, r0, m, n1, threshold)
    if fail >= 0:
        return fail
    for j in range(r0 + n1, r0 + nc):
        _swap_rows(a, piv, j, r0, r0 + n1)
    m_ = <int>n1
    n_ = <int>n2
    ztrsm(&side, &lo, &notr, &unit, &m_, &n_, &one,
          &a[r0, r0], &lda, &a[r0, r0 + n1], &lda)
    m_ = <int>(m - n1)
    k_ = <int>n1
    if m_ > 0:
        zgemm(&notr, &notr, &m_, &n_, &k_, &minus_one,
              &a[r0 + n1, r0], &lda, &a[r0, r0 + n1], &lda,
              &one, &a[r0 + n1, r0 + n1], &lda)
    fail = _rec_lu(a, piv, r0 + n1, m - n1, n2, threshold)
    if fail >= 0:
        return fail
    for j in range(r0, r0 + n1):
        _swap_rows(a, piv, j, r0 + n1, r0 + nc)
    return -1


def lu_factor_inplace(double complex[::1, :] a, Py_ssize_t[::1] piv, double threshold):
    """Recursive right-looking LU with partial pivoting; see ``_pykernels``."""
    cdef Py_ssize_t n = a.shape[0], fail
    if n == 0:
        return -1
    with nogil:
        fail = _rec_lu(a, piv, 0, n, n, threshold)
    return fail


def lu_solve_inplace(double complex[::1, :] lu, Py_ssize_t[::1] piv, double complex[::1, :] b):
    cdef Py_ssize_t n = lu.shape[0], nrhs = b.shape[1]
    cdef Py_ssize_t k, j, p
    cdef double complex t
    cdef int n_ = <int>n, m_ = <int>nrhs, lda = <int>n, ldb = <int>b.shape[0]
    cdef double complex one = 1.0
    cdef char side = b'L', lo = b'L', up = b'U', notr = b'N', unit = b'U', nonunit = b'N'
    if n == 0 or nrhs == 0:
        return
    with nogil:
        for k in range(n):
            p = piv[k]
            if p != k:
                for j in range(nrhs):
                    t = b[k, j]
                    b[k, j] = b[p, j]
                    b[p, j] = t
        ztrsm(&side, &lo, &notr, &unit, &n_, &m_, &one, &lu[0, 0], &lda, &b[0, 0], &ldb)
        ztrsm(&side, &up, &notr, &nonunit, &n_, &m_, &one, &lu[0, 0], &lda, &b[0, 0], &ldb)


def assemble_into(double complex[::1, :] out, const Py_ssize_t[::1] rows, const Py_ssize_t[::1] cols,
                  const double complex[::1] vals, const Py_ssize_t[::1] term,
                  const double complex[::1] coeffs):
    cdef Py_ssize_t i, nnz = vals.shape[0]
    with nogil:
        for i in range(nnz):
            out[rows[i], cols[i]] = out[rows[i], cols[i]] + coeffs[term[i]] * vals[i]


def mgs_extend(double[::1, :] basis, Py_ssize_t count, const double[::1, :] candidates, double tol):
    cdef Py_ssize_t n = basis.shape[0], cap = basis.shape[1]
    cdef Py_ssize_t c, q, i, sweep
    cdef double orig, prev, nrm, h
    cdef bint keep
    cdef double[::1] v = np.empty(n, dtype=np.float64)

    for c in range(candidates.shape[1]):
        orig = 0.0
        for i in range(n):
            v[i] = candidates[i, c]
            orig += v[i] * v[i]
        orig = sqrt(orig)
        if orig == 0.0:
            continue
        prev = orig
        keep = True
        nrm = orig
        for sweep in range(3):
            for q in range(count):
                h = 0.0
                for i in range(n):
                    h += basis[i, q] * v[i]
                for i in range(n):
                    v[i] -= h * basis[i, q]
            nrm = 0.0
            for i in range(n):
                nrm += v[i] * v[i]
            nrm = sqrt(nrm)
            if nrm < tol * orig:
                keep = False
                break
            if sweep >= 1 and nrm > 0.5 * prev:
                break
            prev = nrm
        if not keep:
            continue
        if count >= cap:
            raise ValueError("basis capacity exhausted")
        for i in range(n):
            basis[i, count] = v[i] / nrm
        count += 1
    return count


def imq_matrix(x, y, double a):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t i, j, m = xv.shape[0], k = yv.shape[0]
    out = np.empty((m, k), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double d
    with nogil:
        for i in range(m):
            for j in range(k):
                d = a * (xv[i] - yv[j])
                o[i, j] = 1.0 / (1.0 + d * d)
    return out
