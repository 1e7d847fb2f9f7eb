"""Seeded random time-delay systems with controlled resonances.

The undelayed part is a set of damped oscillators,

    E_0 = I,   A_0 = blockdiag([[-d_k, w_k], [-w_k, -d_k]]) + skew coupling,

with a few resonances inside the target band and the rest placed well above
it. For every complex ``x`` the undelayed part satisfies
``Re(x^H K(iw) x) >= d_min |x|^2`` (the skew part only adds an imaginary
contribution), so keeping the delayed terms below ``d_min`` in norm makes
``K(s)`` nonsingular for all frequencies up to ``f_high``.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SingularMatrix, SingularOnGrid
from .linalg import LUFactor, SparseTriplets
from .system import DelaySystem, FrequencyPoint, make_grid

__all__ = ["SyntheticSpec", "generate_synthetic"]


@dataclass(frozen=True)
class SyntheticSpec:
    order: int = 500
    num_delays: int = 10
    num_inputs: int = 3
    num_outputs: int = 3
    f_low: float = 1e8
    f_high: float = 1e10
    resonances: int = 20
    damping: float = 0.05
    coupling: float = 0.5
    density: float = 0.01
    delays: tuple | None = None
    max_delay: float | None = None
    output_scale: float = 1.0
    seed: int = 0

    def to_dict(self):
        d = asdict(self)
        if d["delays"] is not None:
            d["delays"] = list(d["delays"])
        return d


def _sparse_random(rng, n, density):
    nnz = max(1, int(round(density * n * n)))
    rows = rng.integers(0, n, nnz)
    cols = rng.integers(0, n, nnz)
    vals = rng.standard_normal(nnz)
    m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    m.sum_duplicates()
    return m


def _frobenius(m):
    return float(np.sqrt(np.sum(np.abs(m.data) ** 2))) if m.nnz else 0.0


def _triplets(m):
    m = sp.coo_matrix(m)
    order = np.lexsort((m.row, m.col))
    return SparseTriplets(m.shape[0], m.shape[1], m.row[order], m.col[order], m.data[order])


def _draw_delays(rng, spec):
    if spec.delays is not None:
        delays = [float(t) for t in spec.delays]
        if len(delays) != spec.num_delays + 1:
            raise ValueError("explicit delays must list tau_0 = 0 plus num_delays entries")
        return delays
    tmax = spec.max_delay if spec.max_delay is not None else 2.0 / spec.f_high
    while True:
        tau = np.sort(rng.uniform(0.0, tmax, spec.num_delays))
        if spec.num_delays == 0 or (tau[0] > 0 and np.all(np.diff(tau) > 0)):
            return [0.0] + [float(t) for t in tau]


def generate_synthetic(spec):
    """Build a :class:`~morgreed.system.DelaySystem` from ``spec``.

    Raises
    ------
    SingularOnGrid
        If trial factorizations at the band endpoints and midpoint still
        fail after five rescalings of the delayed terms.
    """
    n, d = spec.order, spec.num_delays
    if n < 2 or d < 0:
        raise ValueError("need order >= 2 and num_delays >= 0")
    if not 0 < spec.f_low < spec.f_high:
        raise ValueError("need 0 < f_low < f_high")
    if not 0 <= spec.coupling < 1:
        raise ValueError("coupling must lie in [0, 1)")
    rng = np.random.default_rng(spec.seed)

    nblocks = n // 2
    n_in = min(spec.resonances, nblocks)
    band = spec.f_high - spec.f_low
    f_in = np.sort(rng.uniform(spec.f_low + 0.1 * band, spec.f_high - 0.1 * band, n_in))
    f_out = np.exp(rng.uniform(math.log(2 * spec.f_high), math.log(20 * spec.f_high), nblocks - n_in))
    omega = 2 * math.pi * np.concatenate([f_in, f_out])
    damp = spec.damping * omega

    rows, cols, vals = [], [], []
    for k, (w, dk) in enumerate(zip(omega, damp)):
        i = 2 * k
        rows += [i, i, i + 1, i + 1]
        cols += [i, i + 1, i, i + 1]
        vals += [-dk, w, -w, -dk]
    if n % 2:
        # odd order: one purely relaxing state
        rows.append(n - 1)
        cols.append(n - 1)
        vals.append(-float(damp.max()))
    A0 = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    d_min = float(damp.min())

    # skew coupling between oscillators; no effect on the real part of x^H K x
    R = _sparse_random(rng, n, spec.density)
    skew = R - R.T
    fs = _frobenius(skew)
    if fs:
        A0 = A0 + skew * (0.1 * d_min / fs)

    delays = _draw_delays(rng, spec)
    w_max = 2 * math.pi * spec.f_high
    budget = spec.coupling * d_min / 2
    Ed, Ad = [], []
    for _ in range(d):
        Ed.append(_sparse_random(rng, n, spec.density))
        Ad.append(_sparse_random(rng, n, spec.density))
    e_norm = sum(_frobenius(m) for m in Ed)
    a_norm = sum(_frobenius(m) for m in Ad)
    e_scale = budget / (w_max * e_norm) if e_norm else 0.0
    a_scale = budget / a_norm if a_norm else 0.0

    B = rng.standard_normal((n, spec.num_inputs))
    C = rng.standard_normal((spec.num_outputs, n))

    probes = [FrequencyPoint(spec.f_low), FrequencyPoint(0.5 * (spec.f_low + spec.f_high)),
              FrequencyPoint(spec.f_high)]
    for attempt in range(6):
        E = [SparseTriplets.identity(n)] + [_triplets(m * e_scale) for m in Ed]
        A = [_triplets(A0)] + [_triplets(m * a_scale) for m in Ad]
        sys = DelaySystem(delays, E, A, B, C)
        try:
            for p in probes:
                LUFactor(sys.assemble(p.s))
            break
        except SingularMatrix:
            if attempt == 5:
                raise SingularOnGrid("trial factorization failed after 5 rescalings") from None
            e_scale *= 0.5
            a_scale *= 0.5

    # normalize so the largest probed |H| equals output_scale
    peak_probes = probes + [FrequencyPoint(float(f)) for f in f_in]
    peak_probes += make_grid(spec.f_low, spec.f_high, 16)
    peak = 0.0
    for p in peak_probes:
        H = C @ LUFactor(sys.assemble(p.s)).solve(B)
        peak = max(peak, float(np.max(np.abs(H))))
    if peak > 0:
        C = C * (spec.output_scale / peak)
    return DelaySystem(delays, E, A, B, C)
