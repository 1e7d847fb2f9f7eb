"""Greedy basis construction: standard, bi-fidelity and multi-fidelity drivers.

All three drivers share the dual-basis bookkeeping: each iteration solves the
full model at the current worst sample ``mu*`` (extending ``V``) and, unless
the estimator is frozen, at the residual sample ``mu_r`` (rebuilding
``V_r = orth{V, V_r, x(mu_r)}``).

* standard: estimator swept over one fixed training set.
* bi-fidelity: estimator swept over a small set ``xi_c`` only; an RBF
  surrogate fitted to those values is swept over a large set ``xi_f`` to
  pick new samples for ``xi_c``; samples already below ``tol`` may leave.
* multi-fidelity: bi-fidelity plus a one-way latch that stops updating
  ``V_r`` (and the extra solve at ``mu_r``) once the estimate drops below
  ``epsilon``.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import EmptyCoarseSet
from .estimator import ResidualEstimator, update_vr
from .linalg import empty_basis, orth_extend
from .rom import output_error, project
from .surrogate import FrequencyScaling, rbf_fit, select_candidates
from .system import FrequencyPoint, SolveCounter, solve_fom, transfer_function

__all__ = [
    "MODES",
    "SET_POLICIES",
    "GreedyConfig",
    "TrainingSets",
    "IterationRecord",
    "GreedyResult",
    "run",
    "run_standard",
    "run_bifidelity",
    "run_multifidelity",
    "update_coarse_set",
    "reference_transfer",
    "validate",
]

log = logging.getLogger(__name__)

MODES = ("standard", "bifidelity", "multifidelity")
SET_POLICIES = ("add_only", "add_remove")
NORMALIZATIONS = ("absolute", "relative")


@dataclass
class GreedyConfig:
    tol: float = 1e-3
    epsilon: float = 0.1
    n_add: int = 1
    n_del: int = 1
    max_iterations: int = 100
    mode: str = "standard"
    set_policy: str = "add_only"
    rbf_shape: float = 30.0
    normalization: str = "absolute"
    initial_index: int = 0
    residual_index: int | None = None
    min_coarse_size: int = 3

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise ValueError(f"tol must lie in (0, 1), got {self.tol}")
        if not self.tol < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (tol, 1), got {self.epsilon}")
        if self.n_add < 0 or self.n_del < 0:
            raise ValueError("n_add and n_del must be non-negative")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.set_policy not in SET_POLICIES:
            raise ValueError(f"set_policy must be one of {SET_POLICIES}, got {self.set_policy!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        if not self.rbf_shape > 0:
            raise ValueError("rbf_shape must be positive")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TrainingSets:
    """``xi`` for the standard driver; ``xi_c`` (mutable between iterations) and ``xi_f`` otherwise."""

    xi: tuple = ()
    xi_c: tuple = ()
    xi_f: tuple = ()

    def __post_init__(self):
        for name in ("xi", "xi_c", "xi_f"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if len(set(self.xi_c)) != len(self.xi_c):
            raise ValueError("coarse set contains duplicates")


@dataclass
class IterationRecord:
    iteration: int
    snapshot: float
    residual_snapshot: float | None
    selected: float
    selected_residual: float | None
    added: list
    removed: list
    epsilon: float
    coarse_size: int
    estimator_set: list
    iteration_solves: int
    fom_solves: int
    estimator_evals: int
    reduced_order: int
    residual_order: int
    frozen: bool
    wall_time: float = 0.0

    def to_dict(self, timing=False):
        d = asdict(self)
        if not timing:
            del d["wall_time"]
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


@dataclass
class GreedyResult:
    mode: str
    config: GreedyConfig
    rom: object
    estimator: ResidualEstimator
    log: list
    converged: bool
    fom_solves: int
    estimator_evals: int
    runtime: float
    stop_reason: str
    sets: TrainingSets = field(default_factory=TrainingSets)

    @property
    def iterations(self):
        return len(self.log)

    @property
    def reduced_order(self):
        return self.rom.order

    @property
    def snapshots(self):
        return [FrequencyPoint(rec.snapshot) for rec in self.log]


def _initial_indices(config, size):
    i0 = config.initial_index
    if not 0 <= i0 < size:
        raise IndexError(f"initial_index {i0} outside training set of size {size}")
    ir = config.residual_index
    if ir is None:
        ir = 1 if i0 == 0 else 0
    if not 0 <= ir < size or ir == i0:
        raise IndexError("residual_index must differ from initial_index and lie in the set")
    return i0, ir


class _Stagnation:
    """Stops the loop when ``mu*`` repeats without a 1% drop of the estimate, 3 times running."""

    def __init__(self, limit=3, factor=0.99):
        self.limit = limit
        self.factor = factor
        self.count = 0
        self.prev = None

    def update(self, snapshot, selected, eps):
        if self.prev is not None and selected == snapshot and eps > self.factor * self.prev:
            self.count += 1
        else:
            self.count = 0
        self.prev = eps
        return self.count >= self.limit


def _sweep(bound, points, normalization):
    """Estimator values at ``points``; returns (delta, residual-of-residual, values)."""
    vals = [bound.evaluate(p) for p in points]
    dt = np.array([v.delta_tilde for v in vals])
    if normalization == "relative":
        scale = max(v.output_scale for v in vals)
        if scale > 0:
            dt = dt / scale
    return dt, vals


def run_standard(sys, xi, config=None):
    """Greedy sampling with the residual-system estimator over a fixed set."""
    config = config or GreedyConfig()
    xi = list(xi)
    if len(xi) < 2:
        raise ValueError("training set needs at least two samples")
    i0, ir = _initial_indices(config, len(xi))
    mu_star, mu_r = xi[i0], xi[ir]

    counter = SolveCounter()
    V = empty_basis(sys.order)
    est = ResidualEstimator.empty(sys)
    evals = 0
    eps = 1.0
    records = []
    stag = _Stagnation()
    stop = "max_iterations"
    t0 = time.perf_counter()

    for it in range(1, config.max_iterations + 1):
        before = counter.count
        x = solve_fom(sys, mu_star, counter=counter)
        V = orth_extend(V, x)
        rom = project(sys, V)
        est = update_vr(est, sys, V, mu_r, counter=counter)
        bound = est.bind(rom)

        dt, vals = _sweep(bound, xi, config.normalization)
        evals += len(xi)
        rr = np.array([bound.residual_of_residual(p, v) for p, v in zip(xi, vals)])
        next_r = xi[int(np.argmax(rr))]
        i_star = int(np.argmax(dt))
        next_star = xi[i_star]
        eps = float(dt[i_star])

        records.append(IterationRecord(
            iteration=it,
            snapshot=mu_star.f,
            residual_snapshot=mu_r.f,
            selected=next_star.f,
            selected_residual=next_r.f,
            added=[],
            removed=[],
            epsilon=eps,
            coarse_size=len(xi),
            estimator_set=[p.f for p in xi],
            iteration_solves=counter.count - before,
            fom_solves=counter.count,
            estimator_evals=evals,
            reduced_order=V.shape[1],
            residual_order=est.order,
            frozen=False,
            wall_time=time.perf_counter() - t0,
        ))
        log.debug("standard it=%d eps=%.3e r=%d", it, eps, V.shape[1])
        if eps <= config.tol:
            stop = "converged"
            break
        if stag.update(mu_star, next_star, eps):
            stop = "stagnation"
            break
        mu_star, mu_r = next_star, next_r

    return GreedyResult(
        mode="standard",
        config=config,
        rom=rom,
        estimator=est,
        log=records,
        converged=stop == "converged",
        fom_solves=counter.count,
        estimator_evals=evals,
        runtime=time.perf_counter() - t0,
        stop_reason=stop,
        sets=TrainingSets(xi=xi),
    )


def update_coarse_set(sets, additions, removals, policy, tol, protect=None, min_size=3):
    """Apply one round of coarse-set additions and removals.

    Parameters
    ----------
    sets : TrainingSets
    additions : list of (FrequencyPoint, float)
        Candidates from the fine set with their surrogate values; admitted
        only when the value exceeds ``tol``.
    removals : list of (FrequencyPoint, float)
        Coarse samples with their estimator values, smallest first; removed
        only when the value is below ``tol`` and ``policy`` is
        ``"add_remove"``.
    protect : FrequencyPoint, optional
        Never removed (the freshly selected ``mu*``).
    min_size : int
        Removals stop before the set would shrink below this size.
    """
    coarse = list(sets.xi_c)
    present = set(coarse)
    for p, val in additions:
        if val > tol and p not in present:
            coarse.append(p)
            present.add(p)
    if policy == "add_remove":
        for p, val in removals:
            if len(coarse) - 1 < min_size:
                break
            if val < tol and p in present and p != protect:
                coarse.remove(p)
                present.discard(p)
    if not coarse:
        raise EmptyCoarseSet("coarse training set became empty")
    return replace(sets, xi_c=tuple(coarse))


def _run_two_set(sys, sets, config, mode):
    xi_c = list(sets.xi_c)
    xi_f = list(sets.xi_f)
    if len(xi_c) < 2:
        raise ValueError("coarse set needs at least two samples")
    if len(xi_f) < len(xi_c):
        raise ValueError("fine set must be at least as large as the coarse set")
    i0, ir = _initial_indices(config, len(xi_c))
    mu_star, mu_r = xi_c[i0], xi_c[ir]

    universe = [p.f for p in xi_c + xi_f]
    scaling = FrequencyScaling(min(universe), max(universe))
    fine_coords = scaling([p.f for p in xi_f])
    fine_lookup = {float(c): p for c, p in zip(fine_coords, xi_f)}

    counter = SolveCounter()
    V = empty_basis(sys.order)
    est = ResidualEstimator.empty(sys)
    evals = 0
    records = []
    stag = _Stagnation()
    stop = "max_iterations"
    t0 = time.perf_counter()

    for it in range(1, config.max_iterations + 1):
        before = counter.count
        frozen_at_start = est.frozen
        x = solve_fom(sys, mu_star, counter=counter)
        V = orth_extend(V, x)
        rom = project(sys, V)
        solved_r = None
        if not est.frozen:
            est = update_vr(est, sys, V, mu_r, counter=counter)
            solved_r = mu_r.f
        bound = est.bind(rom)

        dt, vals = _sweep(bound, xi_c, config.normalization)
        evals += len(xi_c)
        i_star = int(np.argmax(dt))
        next_star = xi_c[i_star]
        # ascending estimator value, lowest index first among ties
        ascending = sorted(range(len(xi_c)), key=lambda i: dt[i])
        removal_candidates = [(xi_c[i], float(dt[i])) for i in ascending[: config.n_del]]

        next_r = None
        if not est.frozen:
            rr = np.array([bound.residual_of_residual(p, v) for p, v in zip(xi_c, vals)])
            next_r = xi_c[int(np.argmax(rr))]

        coarse_coords = scaling([p.f for p in xi_c])
        sur = rbf_fit(coarse_coords, dt, a=config.rbf_shape)
        picks = select_candidates(sur, fine_coords, config.n_add, exclude=coarse_coords)
        additions = [(fine_lookup[c], v) for c, v in picks]

        new_sets = update_coarse_set(
            TrainingSets(xi_c=xi_c, xi_f=xi_f),
            additions,
            removal_candidates,
            config.set_policy,
            config.tol,
            protect=next_star,
            min_size=config.min_coarse_size,
        )
        old = set(xi_c)
        added = [p.f for p in new_sets.xi_c if p not in old]
        kept = set(new_sets.xi_c)
        removed = [p.f for p in xi_c if p not in kept]
        estimator_set = [p.f for p in xi_c]
        xi_c = list(new_sets.xi_c)

        eps = float(dt[i_star])
        if mode == "multifidelity" and not est.frozen and eps < config.epsilon:
            est = est.freeze()
            log.info("multi-fidelity latch engaged at iteration %d (eps=%.3e)", it, eps)

        records.append(IterationRecord(
            iteration=it,
            snapshot=mu_star.f,
            residual_snapshot=solved_r,
            selected=next_star.f,
            selected_residual=None if next_r is None else next_r.f,
            added=added,
            removed=removed,
            epsilon=eps,
            coarse_size=len(xi_c),
            estimator_set=estimator_set,
            iteration_solves=counter.count - before,
            fom_solves=counter.count,
            estimator_evals=evals,
            reduced_order=V.shape[1],
            residual_order=est.order,
            frozen=est.frozen,
            wall_time=time.perf_counter() - t0,
        ))
        log.debug("%s it=%d eps=%.3e r=%d |xi_c|=%d frozen=%s",
                  mode, it, eps, V.shape[1], len(xi_c), frozen_at_start)
        if eps <= config.tol:
            stop = "converged"
            break
        if stag.update(mu_star, next_star, eps):
            stop = "stagnation"
            break
        mu_star = next_star
        if next_r is not None:
            mu_r = next_r

    return GreedyResult(
        mode=mode,
        config=config,
        rom=rom,
        estimator=est,
        log=records,
        converged=stop == "converged",
        fom_solves=counter.count,
        estimator_evals=evals,
        runtime=time.perf_counter() - t0,
        stop_reason=stop,
        sets=TrainingSets(xi_c=xi_c, xi_f=xi_f),
    )


def run_bifidelity(sys, sets, config=None):
    """Greedy sampling with estimator on ``xi_c`` and RBF surrogate on ``xi_f``."""
    return _run_two_set(sys, sets, config or GreedyConfig(mode="bifidelity"), "bifidelity")


def run_multifidelity(sys, sets, config=None):
    """Bi-fidelity sampling whose residual basis freezes once the estimate drops below ``epsilon``."""
    return _run_two_set(sys, sets, config or GreedyConfig(mode="multifidelity"), "multifidelity")


def run(sys, sets, config):
    """Dispatch on ``config.mode``."""
    if config.mode == "standard":
        return run_standard(sys, sets.xi, config)
    if config.mode == "bifidelity":
        return run_bifidelity(sys, sets, config)
    return run_multifidelity(sys, sets, config)


def reference_transfer(sys, grid, counter=None):
    """Full-order ``H(s)`` at every grid point."""
    return [transfer_function(sys, p, counter=counter) for p in grid]


def validate(sys, rom, grid, counter=None, reference=None):
    """Maximum output error over ``grid``.

    With ``reference`` (the full-order transfer function on the grid) no
    solves are performed; otherwise one counted solve per grid point.
    """
    if reference is None:
        reference = reference_transfer(sys, grid, counter=counter)
    if len(reference) != len(grid):
        raise ValueError("reference does not match the grid")
    worst = 0.0
    for p, H in zip(grid, reference):
        e = output_error(sys, rom, p, reference=H)
        if not math.isfinite(e):
            return math.inf
        worst = max(worst, e)
    return worst
