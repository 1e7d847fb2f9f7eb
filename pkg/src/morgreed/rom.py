"""Galerkin reduced-order models.

Each affine term of the source system is projected once (``V^T T V``), so a
reduced evaluation costs one ``r x r`` assembly and solve per frequency.
"""

import numpy as np

from .errors import DimensionMismatch
from .linalg import solve_dense
from .system import laplace_variable, transfer_function

__all__ = ["ReducedModel", "project", "solve_rom", "reduced_transfer", "output_error"]


class ReducedModel:
    """Projected operators of a :class:`~morgreed.system.ParametricSystem`.

    Attributes
    ----------
    system : ParametricSystem or None
        Source system; ``None`` for models loaded from an export file.
    basis : ndarray, shape (n, r)
    terms : tuple of AffineTerm
        Same coefficient tags as the source, with dense ``r x r`` matrices.
    B, C : ndarray
        ``V^T B`` and ``C V``.
    """

    def __init__(self, terms, B, C, basis, system=None, delays=None):
        self.terms = tuple(terms)
        self.B = np.asarray(B, dtype=np.complex128)
        self.C = np.asarray(C, dtype=np.complex128)
        self.basis = np.asarray(basis, dtype=np.float64)
        self.system = system
        self.delays = delays if delays is not None else getattr(system, "delays", None)
        r = self.basis.shape[1]
        if self.B.shape[0] != r or self.C.shape[1] != r:
            raise DimensionMismatch("projected B/C do not match the basis size")
        for t in self.terms:
            if t.matrix.shape != (r, r):
                raise DimensionMismatch("projected term has wrong shape")

    @property
    def order(self):
        return self.basis.shape[1]

    @property
    def full_order(self):
        return self.basis.shape[0]

    @property
    def num_inputs(self):
        return self.B.shape[1]

    @property
    def num_outputs(self):
        return self.C.shape[0]

    def assemble(self, s):
        s = laplace_variable(s)
        out = np.zeros((self.order, self.order), dtype=np.complex128)
        for t in self.terms:
            th = t.coefficient(s)
            if th != 0:
                out += th * t.matrix
        return out

    def solve(self, s, kernels=None):
        if self.order == 0:
            return np.zeros((0, self.num_inputs), dtype=np.complex128)
        return solve_dense(self.assemble(s), self.B, kernels=kernels)

    def transfer(self, s, kernels=None):
        return self.C @ self.solve(s, kernels=kernels)

    def lift(self, z):
        return self.basis @ z


def project(sys, V):
    """Galerkin projection of every affine term onto ``span(V)``."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != sys.order:
        raise DimensionMismatch(f"basis has {V.shape[0]} rows, system order is {sys.order}")
    if V.shape[1] == 0:
        raise DimensionMismatch("basis is empty")
    terms = []
    for t, m in zip(sys.terms, sys.csr_terms):
        terms.append(t.with_matrix(np.asarray(V.T @ (m @ V), dtype=np.complex128)))
    return ReducedModel(terms, V.T @ sys.B, sys.C @ V, V, system=sys)


def solve_rom(rom, p, kernels=None):
    """Reduced state ``z`` with ``K_hat(s) z = B_hat``; never counts a full solve."""
    return rom.solve(laplace_variable(p), kernels=kernels)


def reduced_transfer(rom, p, kernels=None):
    return rom.transfer(laplace_variable(p), kernels=kernels)


def output_error(sys, rom, p, counter=None, reference=None):
    """``max_ij |H_ij(s) - H_hat_ij(s)|``.

    ``reference`` may carry a precomputed ``H(s)``, in which case no full
    solve is performed or counted.
    """
    H = transfer_function(sys, p, counter=counter) if reference is None else reference
    return float(np.max(np.abs(H - reduced_transfer(rom, p))))
