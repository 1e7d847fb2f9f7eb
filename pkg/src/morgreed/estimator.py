"""Output-error estimation through a reduced residual system.

For a ROM with basis ``V`` the output error is ``C K(s)^{-1} r(s)`` where
``r = B - K(s) V z`` is the primal residual. The estimator replaces the
residual solve by a Galerkin solve on an auxiliary basis ``V_r``:

    V_r^T K(s) V_r z_r = V_r^T r(s),    Delta(s) = max_ij |C_i V_r z_rj|.

Everything that depends on ``s`` only through the affine coefficients is
projected once per (``V``, ``V_r``) pair in :meth:`ResidualEstimator.bind`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, FrozenEstimator
from .linalg import LUFactor, empty_basis, orth_extend, solve_dense
from .rom import project
from .system import laplace_variable, solve_fom

__all__ = [
    "ResidualEstimator",
    "BoundEstimator",
    "EstimatorValues",
    "residual",
    "estimate",
    "residual_of_residual",
    "update_vr",
    "delta_diagnostic",
]


@dataclass(frozen=True)
class EstimatorValues:
    """Everything one estimator evaluation produces at a single frequency."""

    z: np.ndarray
    z_r: np.ndarray
    delta_tilde: float
    output_scale: float


class ResidualEstimator:
    """Auxiliary basis ``V_r`` with its projected residual-side operators.

    Instances are immutable; :func:`update_vr` and :meth:`freeze` return new
    objects.
    """

    def __init__(self, system, basis, frozen=False):
        basis = np.asarray(basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[0] != system.order:
            raise DimensionMismatch("auxiliary basis does not match the system order")
        self.system = system
        self.basis = basis
        self.frozen = bool(frozen)
        self.residual_rom = project(system, basis) if basis.shape[1] else None

    @classmethod
    def empty(cls, system):
        return cls(system, empty_basis(system.order))

    @property
    def order(self):
        return self.basis.shape[1]

    def freeze(self):
        out = object.__new__(type(self))
        out.system = self.system
        out.basis = self.basis
        out.residual_rom = self.residual_rom
        out.frozen = True
        return out

    def bind(self, rom):
        return BoundEstimator(self, rom)


class BoundEstimator:
    """A :class:`ResidualEstimator` paired with one primal ROM."""

    def __init__(self, est, rom):
        sys = est.system
        if rom.full_order != sys.order:
            raise DimensionMismatch("ROM and estimator belong to different systems")
        self.est = est
        self.rom = rom
        self.system = sys
        Vr = est.basis
        self._cross = []
        if est.order:
            V = rom.basis
            for t, m in zip(sys.terms, sys.csr_terms):
                self._cross.append(Vr.T @ (m @ V))
            self._VrB = Vr.T @ sys.B
            self._CVr = sys.C @ Vr

    def evaluate(self, p):
        s = laplace_variable(p)
        z = self.rom.solve(s)
        scale = float(np.max(np.abs(self.rom.C @ z))) if z.size else 0.0
        if not self.est.order:
            z_r = np.zeros((0, z.shape[1]), dtype=np.complex128)
            return EstimatorValues(z, z_r, 0.0, scale)
        rhs = self._VrB.copy()
        for t, cross in zip(self.system.terms, self._cross):
            th = t.coefficient(s)
            if th != 0:
                rhs -= th * (cross @ z)
        z_r = solve_dense(self.est.residual_rom.assemble(s), rhs)
        dt = float(np.max(np.abs(self._CVr @ z_r)))
        return EstimatorValues(z, z_r, dt, scale)

    def estimate(self, p):
        return self.evaluate(p).delta_tilde

    def residual(self, p, z=None):
        """Primal residual block ``B - K(s) V z`` (all inputs)."""
        s = laplace_variable(p)
        if z is None:
            z = self.rom.solve(s)
        return self.system.B - self.system.apply(s, self.rom.basis @ z)

    def residual_of_residual(self, p, values=None):
        """``max_j || r_j - K(s) V_r z_rj ||_2``."""
        s = laplace_variable(p)
        v = values if values is not None else self.evaluate(s)
        y = self.rom.basis @ v.z
        if self.est.order:
            y = y + self.est.basis @ v.z_r
        res = self.system.B - self.system.apply(s, y)
        return float(np.max(np.linalg.norm(res, axis=0)))

    def delta(self, p, counter=None, values=None):
        """Sandwich slack ``max_ij |C_i (x_rj - V_r z_rj)|`` from an exact residual solve."""
        s = laplace_variable(p)
        v = values if values is not None else self.evaluate(s)
        r = self.residual(s, v.z)
        lu = LUFactor(self.system.assemble(s))
        if counter is not None:
            counter.tick()
        x_r = lu.solve(r)
        if self.est.order:
            x_r = x_r - self.est.basis @ v.z_r
        return float(np.max(np.abs(self.system.C @ x_r)))


def residual(sys, rom, p, j):
    """Residual ``r_j = B_j - K(s) V z_j`` of the ``j``-th input; no full solve."""
    if not 0 <= j < sys.num_inputs:
        raise IndexError(f"input index {j} out of range")
    s = laplace_variable(p)
    z = rom.solve(s)
    return sys.B[:, j] - sys.apply(s, rom.basis @ z[:, j])


def estimate(est, sys, rom, p):
    return est.bind(rom).estimate(p)


def residual_of_residual(est, sys, rom, p):
    return est.bind(rom).residual_of_residual(p)


def update_vr(est, sys, V, p_r, counter=None):
    """Solve at ``p_r`` and rebuild ``V_r = orth{V, V_r, x(p_r)}``.

    Raises
    ------
    FrozenEstimator
        Once the multi-fidelity latch has engaged.
    """
    if est.frozen:
        raise FrozenEstimator("residual estimator is frozen")
    x = solve_fom(sys, p_r, counter=counter)
    cand = np.hstack([est.basis.astype(np.complex128), x])
    return ResidualEstimator(sys, orth_extend(V, cand))


def delta_diagnostic(est, sys, rom, p, counter=None):
    return est.bind(rom).delta(p, counter=counter)
