"""Pure numpy implementations of the numerical kernels.

Same call signatures and in-place conventions as the compiled ``_ckernels``
module; used when the extension is not built or ``MORGREED_PURE_PYTHON`` is
set. Matrices are Fortran-ordered so both backends share buffers untouched.
"""

import numpy as np
from scipy.linalg import solve_triangular

BLOCK = 32


def lu_factor_inplace(a, piv, threshold):
    """Blocked right-looking LU with partial pivoting, in place.

    Returns -1 on success, otherwise the column index whose pivot magnitude
    fell below ``threshold``.
    """
    n = a.shape[0]
    for k0 in range(0, n, BLOCK):
        kend = min(k0 + BLOCK, n)
        for k in range(k0, kend):
            col = a[k:, k]
            mag = col.real * col.real + col.imag * col.imag
            p = k + int(np.argmax(mag))
            piv[k] = p
            if not np.sqrt(mag[p - k]) >= threshold:
                return k
            if p != k:
                a[[k, p], :] = a[[p, k], :]
            a[k + 1:, k] *= 1.0 / a[k, k]
            if k + 1 < kend:
                a[k + 1:, k + 1:kend] -= np.outer(a[k + 1:, k], a[k, k + 1:kend])
        if kend < n:
            a[k0:kend, kend:] = solve_triangular(
                a[k0:kend, k0:kend], a[k0:kend, kend:],
                lower=True, unit_diagonal=True, check_finite=False,
            )
            a[kend:, kend:] -= a[kend:, k0:kend] @ a[k0:kend, kend:]
    return -1


def lu_solve_inplace(lu, piv, b):
    n = lu.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            b[[k, p], :] = b[[p, k], :]
    b[:, :] = solve_triangular(lu, b, lower=True, unit_diagonal=True, check_finite=False)
    b[:, :] = solve_triangular(lu, b, lower=False, check_finite=False)


def assemble_into(out, rows, cols, vals, term, coeffs):
    """``out[rows[i], cols[i]] += coeffs[term[i]] * vals[i]`` in triplet order."""
    n = out.shape[0]
    weighted = coeffs[term] * vals
    # column-major linear index to match the Fortran buffer
    flat = cols * n + rows
    size = out.shape[0] * out.shape[1]
    acc = np.bincount(flat, weights=weighted.real, minlength=size) + 1j * np.bincount(
        flat, weights=weighted.imag, minlength=size
    )
    out += acc.reshape(out.shape, order="F")


def mgs_extend(basis, count, candidates, tol):
    """Append orthonormalized candidates to ``basis[:, :count]``.

    Two modified Gram-Schmidt sweeps (a third when the second still removes
    most of the vector). Candidates whose projected norm drops below
    ``tol`` times their original norm are discarded. Returns the new count.
    """
    cap = basis.shape[1]
    for c in range(candidates.shape[1]):
        v = np.array(candidates[:, c], dtype=np.float64)
        orig = np.sqrt(v @ v)
        if orig == 0.0:
            continue
        prev = orig
        keep = True
        for sweep in range(3):
            for q in range(count):
                bq = basis[:, q]
                v -= (bq @ v) * bq
            nrm = np.sqrt(v @ v)
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
        basis[:, count] = v / nrm
        count += 1
    return count


def imq_matrix(x, y, a):
    d = a * (np.asarray(x, dtype=np.float64)[:, None] - np.asarray(y, dtype=np.float64)[None, :])
    return 1.0 / (1.0 + d * d)
