"""Full-order parametric systems evaluated along the imaginary axis.

A system is a sum of affine terms ``K(s) = sum_t theta_t(s) T_t`` with sparse
``T_t`` and scalar coefficient functions drawn from a small fixed set. The
time-delay form

    K(s) = s * sum_j E_j exp(-s tau_j) - sum_j A_j exp(-s tau_j)

is the main concrete case.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _kernels
from .errors import DimensionMismatch, InvalidRange
from .linalg import LUFactor

__all__ = [
    "COEFFICIENT_TAGS",
    "FrequencyPoint",
    "AffineTerm",
    "ParametricSystem",
    "DelaySystem",
    "AffineSystem",
    "SolveCounter",
    "laplace_variable",
    "assemble",
    "solve_fom",
    "transfer_function",
    "make_grid",
]

COEFFICIENT_TAGS = ("constant", "s", "s_exp", "exp")


@dataclass(frozen=True, order=True)
class FrequencyPoint:
    """Ordinary frequency ``f`` in Hz; the Laplace variable is ``s = 2 pi f i``."""

    f: float

    @property
    def s(self):
        return complex(0.0, 2.0 * math.pi * self.f)


def laplace_variable(p):
    """Accept a :class:`FrequencyPoint` or a raw complex ``s``."""
    if isinstance(p, FrequencyPoint):
        return p.s
    return complex(p)


@dataclass(frozen=True)
class AffineTerm:
    """One summand ``weight * theta_tag(s; tau) * matrix``."""

    tag: str
    matrix: object
    tau: float = 0.0
    weight: complex = 1.0

    def __post_init__(self):
        if self.tag not in COEFFICIENT_TAGS:
            raise ValueError(f"unknown coefficient tag {self.tag!r}")

    def coefficient(self, s):
        if self.tag == "constant":
            theta = 1.0
        elif self.tag == "s":
            theta = s
        else:
            e = np.exp(-s * self.tau) if self.tau else 1.0
            theta = s * e if self.tag == "s_exp" else e
        return complex(self.weight * theta)

    def with_matrix(self, matrix):
        return AffineTerm(self.tag, matrix, self.tau, self.weight)


class SolveCounter:
    """Counts full-order solves; one factorization counts once."""

    def __init__(self, count=0):
        self.count = count

    def tick(self, k=1):
        self.count += k

    def __repr__(self):
        return f"SolveCounter({self.count})"


class ParametricSystem:
    """Affine parametric system ``K(s) x = B``, ``y = C x``."""

    kind = "affine"

    def __init__(self, terms, B, C):
        self.terms = tuple(terms)
        if not self.terms:
            raise DimensionMismatch("system needs at least one term")
        n = self.terms[0].matrix.rows
        for t in self.terms:
            if t.matrix.shape != (n, n):
                raise DimensionMismatch(f"term matrix has shape {t.matrix.shape}, expected {(n, n)}")
        B = np.atleast_2d(np.asarray(B, dtype=np.complex128))
        C = np.atleast_2d(np.asarray(C, dtype=np.complex128))
        if B.shape[0] != n:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
        self.B = B
        self.C = C
        self.order = n
        self._rows = np.concatenate([t.matrix.row_index for t in self.terms])
        self._cols = np.concatenate([t.matrix.col_index for t in self.terms])
        self._vals = np.concatenate([t.matrix.values for t in self.terms])
        self._term = np.concatenate(
            [np.full(t.matrix.nnz, i, dtype=np.intp) for i, t in enumerate(self.terms)]
        )
        self._csr = None

    @property
    def num_inputs(self):
        return self.B.shape[1]

    @property
    def num_outputs(self):
        return self.C.shape[0]

    @property
    def is_real(self):
        return (
            all(t.matrix.is_real and complex(t.weight).imag == 0 for t in self.terms)
            and not np.any(self.B.imag)
            and not np.any(self.C.imag)
        )

    def coefficients(self, s):
        return np.array([t.coefficient(s) for t in self.terms], dtype=np.complex128)

    def assemble(self, s, kernels=None):
        kern = kernels or _kernels
        out = np.zeros((self.order, self.order), dtype=np.complex128, order="F")
        kern.assemble_into(out, self._rows, self._cols, self._vals, self._term, self.coefficients(s))
        return out

    @property
    def csr_terms(self):
        if self._csr is None:
            self._csr = [t.matrix.to_csr() for t in self.terms]
        return self._csr

    def apply(self, s, x):
        """``K(s) @ x`` through sparse products, without assembling."""
        theta = self.coefficients(s)
        out = np.zeros((self.order,) + np.shape(x)[1:], dtype=np.complex128)
        for th, m in zip(theta, self.csr_terms):
            if th != 0:
                out += th * (m @ x)
        return out


class DelaySystem(ParametricSystem):
    """Time-delay system with delays ``0 = tau_0 < tau_1 < ... < tau_d``."""

    kind = "delay"

    def __init__(self, delays, E, A, B, C):
        delays = [float(t) for t in delays]
        if not delays or delays[0] != 0.0:
            raise ValueError("first delay must be exactly 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("delays must be strictly increasing")
        if len(E) != len(delays) or len(A) != len(delays):
            raise DimensionMismatch("need one E_j and one A_j per delay")
        self.delays = tuple(delays)
        self.E = tuple(E)
        self.A = tuple(A)
        terms = [AffineTerm("s_exp", e, tau) for e, tau in zip(E, delays)]
        terms += [AffineTerm("exp", a, tau, -1.0) for a, tau in zip(A, delays)]
        super().__init__(terms, B, C)

    @property
    def num_delays(self):
        return len(self.delays) - 1


class AffineSystem(ParametricSystem):
    """Generic affine variant with explicitly listed terms."""


def assemble(sys, p, kernels=None):
    """Dense ``K(s)`` at a frequency point (or raw complex ``s``)."""
    return sys.assemble(laplace_variable(p), kernels=kernels)


def solve_fom(sys, p, counter=None, kernels=None):
    """Snapshot block ``x = K(s)^{-1} B``; one counted solve for all inputs."""
    s = laplace_variable(p)
    lu = LUFactor(sys.assemble(s, kernels=kernels), kernels=kernels)
    if counter is not None:
        counter.tick()
    return lu.solve(sys.B)


def transfer_function(sys, p, counter=None, kernels=None):
    return sys.C @ solve_fom(sys, p, counter=counter, kernels=kernels)


def make_grid(f_low, f_high, cardinality, spacing="linear"):
    """Frequency grid with both endpoints included."""
    if not (0 < f_low < f_high) or not math.isfinite(f_high):
        raise InvalidRange(f"need 0 < f_low < f_high, got {f_low}, {f_high}")
    if int(cardinality) != cardinality or cardinality < 2:
        raise InvalidRange(f"cardinality must be an integer >= 2, got {cardinality}")
    cardinality = int(cardinality)
    if spacing == "linear":
        f = np.linspace(f_low, f_high, cardinality)
    elif spacing == "log":
        f = np.logspace(math.log10(f_low), math.log10(f_high), cardinality)
    else:
        raise InvalidRange(f"spacing must be 'linear' or 'log', got {spacing!r}")
    f[0], f[-1] = f_low, f_high
    return [FrequencyPoint(float(v)) for v in f]
