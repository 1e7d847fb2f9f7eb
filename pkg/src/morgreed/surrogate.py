"""Inverse-multiquadric RBF interpolant of estimator values.

The kernel is ``phi(d) = 1 / (1 + (a d)^2)`` on scalar coordinates. The
greedy drivers feed normalized frequencies ``(f - f_low) / (f_high - f_low)``
so the shape parameter means the same thing for any band.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._backend import kernels as _kernels
from .errors import DegenerateSystem, DuplicateCenters

__all__ = [
    "COND_LIMIT",
    "RbfSurrogate",
    "rbf_fit",
    "rbf_eval",
    "select_candidates",
    "FrequencyScaling",
]

COND_LIMIT = 1e12
REGULARIZATION = 1e-10


@dataclass(frozen=True)
class RbfSurrogate:
    centers: np.ndarray
    weights: np.ndarray
    shape: float
    regularized: bool = False

    def __call__(self, x):
        return rbf_eval(self, x)


def rbf_fit(centers, values, a=30.0, kernels=None):
    """Interpolate ``values`` at ``centers``.

    Falls back to a Tikhonov-regularized Cholesky solve when the kernel
    matrix condition number exceeds ``COND_LIMIT``.
    """
    kern = kernels or _kernels
    c = np.asarray(centers, dtype=np.float64).ravel()
    v = np.asarray(values, dtype=np.float64).ravel()
    if c.size < 1 or c.size != v.size:
        raise ValueError("need as many values as centers, and at least one")
    if np.unique(c).size != c.size:
        raise DuplicateCenters("RBF centers must be pairwise distinct")
    if not a > 0:
        raise ValueError("shape parameter must be positive")
    phi = np.asarray(kern.imq_matrix(c, c, a))
    m = c.size
    if np.linalg.cond(phi) <= COND_LIMIT:
        w = np.linalg.solve(phi, v)
        if np.linalg.norm(phi @ w - v) <= 1e-8 * max(1.0, np.linalg.norm(v)):
            return RbfSurrogate(c, w, float(a))
    lam = REGULARIZATION * np.trace(phi) / m
    try:
        factor = scipy.linalg.cho_factor(phi + lam * np.eye(m))
    except np.linalg.LinAlgError as exc:
        raise DegenerateSystem("regularized RBF system is not positive definite") from exc
    w = scipy.linalg.cho_solve(factor, v)
    if not np.all(np.isfinite(w)):
        raise DegenerateSystem("regularized RBF solve produced non-finite weights")
    return RbfSurrogate(c, w, float(a), regularized=True)


def rbf_eval(sur, x, kernels=None):
    """Surrogate value(s); scalar in, scalar out."""
    kern = kernels or _kernels
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.asarray(kern.imq_matrix(xs, sur.centers, sur.shape)) @ sur.weights
    return float(out[0]) if np.ndim(x) == 0 else out


def select_candidates(sur, fine_set, n_add, exclude=(), atol=1e-12):
    """The ``n_add`` fine-set coordinates with the largest surrogate value.

    Returns ``(coordinate, value)`` pairs in descending order of value, ties
    going to the lower index. Coordinates within ``atol`` of any entry of
    ``exclude`` are skipped; grids built separately can share a frequency up
    to rounding, and such a pair would be a near-duplicate RBF center.
    """
    pts = np.asarray(fine_set, dtype=np.float64)
    if pts.size == 0 or n_add < 1:
        return []
    vals = np.atleast_1d(rbf_eval(sur, pts))
    ex = np.asarray(list(exclude), dtype=np.float64)
    if ex.size:
        near = np.abs(pts[:, None] - ex[None, :]).min(axis=1) <= atol
    else:
        near = np.zeros(pts.size, dtype=bool)
    idx = [i for i in range(pts.size) if not near[i]]
    # stable sort on -value keeps the lowest index first among ties
    idx.sort(key=lambda i: -vals[i])
    return [(float(pts[i]), float(vals[i])) for i in idx[:n_add]]


@dataclass(frozen=True)
class FrequencyScaling:
    """Affine map of frequencies in Hz onto ``[0, 1]``."""

    f_low: float
    f_high: float

    def __call__(self, f):
        return (np.asarray(f, dtype=np.float64) - self.f_low) / (self.f_high - self.f_low)
