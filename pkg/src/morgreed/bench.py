"""Benchmark harness: run configuration, method comparison, validation and traces.

A :class:`RunConfig` names a model file (or a synthetic spec), the frequency
grids, and the greedy settings. :func:`compare` runs the five method rows on
shared inputs and validates every ROM against one shared full-order
reference, so validation solves are paid once.
"""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import MorGreedError
from .estimator import ResidualEstimator, update_vr
from .fileio import (
    config_from_header,
    load_model,
    read_log,
    save_model,
    save_rom,
    write_csv,
    write_json,
    write_log,
)
from .greedy import GreedyConfig, TrainingSets, reference_transfer, run, validate
from .linalg import empty_basis, orth_extend
from .rom import output_error, project
from .synthetic import SyntheticSpec, generate_synthetic
from .system import FrequencyPoint, SolveCounter, make_grid, solve_fom, transfer_function

__all__ = [
    "GridSpec",
    "RunConfig",
    "METHODS",
    "MethodRow",
    "load_config",
    "build_system",
    "build_sets",
    "validation_grid",
    "run_method",
    "compare",
    "replay",
    "trace",
    "REPORT_COLUMNS",
    "TRACE_COLUMNS",
    "system_from_header",
    "save_synthetic",
]

log = logging.getLogger(__name__)

# (label, mode, set_policy); label doubles as a file stem
METHODS = (
    ("standard", "standard", "add_only"),
    ("bifidelity_add_only", "bifidelity", "add_only"),
    ("bifidelity_add_remove", "bifidelity", "add_remove"),
    ("multifidelity_add_only", "multifidelity", "add_only"),
    ("multifidelity_add_remove", "multifidelity", "add_remove"),
)

REPORT_COLUMNS = [
    "method", "mode", "set_policy", "status", "converged", "iterations", "fom_solves",
    "estimator_evals", "reduced_order", "valid_err",
]
TRACE_COLUMNS = [
    "iteration", "estimator_max", "true_error_max", "frozen", "selected_frequency",
    "estimator_at_selected", "true_error_at_selected", "delta_at_selected",
]


@dataclass
class GridSpec:
    f_low: float | None = None
    f_high: float | None = None
    cardinality: int = 30
    spacing: str = "linear"

    def points(self, f_low, f_high):
        lo = self.f_low if self.f_low is not None else f_low
        hi = self.f_high if self.f_high is not None else f_high
        return make_grid(lo, hi, self.cardinality, self.spacing)


def _grid(value, default):
    if value is None:
        return default
    if isinstance(value, GridSpec):
        return value
    return GridSpec(**value)


@dataclass
class RunConfig:
    """Everything one ``run`` or ``compare`` invocation needs.

    ``model`` is a path to a model file; when it is ``None`` the system is
    generated from ``synthetic`` (a :class:`SyntheticSpec` field dict) with
    ``seed``. Grid bounds default to ``f_low`` and ``f_high``.
    """

    model: str | None = None
    synthetic: dict = field(default_factory=dict)
    seed: int = 0
    mode: str = "standard"
    f_low: float = 1e8
    f_high: float = 1e10
    xi: GridSpec = None
    xi_c: GridSpec = None
    xi_f: GridSpec = None
    validation: GridSpec = None
    tol: float = 1e-3
    epsilon: float = 0.1
    n_add: int = 1
    n_del: int = 1
    set_policy: str = "add_only"
    rbf_shape: float = 30.0
    normalization: str = "absolute"
    max_iterations: int = 100
    initial_index: int = 0
    output_dir: str = "morgreed-out"
    timing: bool = False

    def __post_init__(self):
        self.xi = _grid(self.xi, GridSpec(cardinality=30))
        self.xi_c = _grid(self.xi_c, GridSpec(cardinality=10))
        self.xi_f = _grid(self.xi_f, GridSpec(cardinality=100))
        self.validation = _grid(self.validation, GridSpec(cardinality=1000, spacing="log"))
        if self.mode not in ("standard", "bifidelity", "multifidelity", "all"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def greedy_config(self, mode=None, set_policy=None):
        return GreedyConfig(
            tol=self.tol,
            epsilon=self.epsilon,
            n_add=self.n_add,
            n_del=self.n_del,
            max_iterations=self.max_iterations,
            mode=mode or self.mode,
            set_policy=set_policy or self.set_policy,
            rbf_shape=self.rbf_shape,
            normalization=self.normalization,
            initial_index=self.initial_index,
        )

    def to_dict(self):
        return asdict(self)


def load_config(path=None, overrides=None):
    """Read a JSON config file and apply ``overrides`` (``None`` values ignored)."""
    data = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if "." in key:
            grid, attr = key.split(".", 1)
            spec = dict(data.get(grid) or {})
            spec[attr] = value
            data[grid] = spec
        else:
            data[key] = value
    return RunConfig(**data)


def _synthetic_spec(cfg):
    spec = dict(cfg.synthetic)
    spec.setdefault("seed", cfg.seed)
    spec.setdefault("f_low", cfg.f_low)
    spec.setdefault("f_high", cfg.f_high)
    if spec.get("delays") is not None:
        spec["delays"] = tuple(spec["delays"])
    return SyntheticSpec(**spec)


def build_system(cfg):
    if cfg.model is not None:
        return load_model(cfg.model)
    return generate_synthetic(_synthetic_spec(cfg))


def build_sets(cfg):
    return TrainingSets(
        xi=cfg.xi.points(cfg.f_low, cfg.f_high),
        xi_c=cfg.xi_c.points(cfg.f_low, cfg.f_high),
        xi_f=cfg.xi_f.points(cfg.f_low, cfg.f_high),
    )


def validation_grid(cfg):
    return cfg.validation.points(cfg.f_low, cfg.f_high)


def _meta(cfg, label):
    return {
        "label": label,
        "model": cfg.model,
        "synthetic": None if cfg.model else _synthetic_spec(cfg).to_dict(),
        "grids": {k: asdict(getattr(cfg, k)) for k in ("xi", "xi_c", "xi_f", "validation")},
        "band": [cfg.f_low, cfg.f_high],
        "rbf_coordinates": "normalized linear frequency over xi_c and xi_f",
    }


@dataclass
class MethodRow:
    method: str
    mode: str
    set_policy: str
    status: str = "ok"
    converged: bool = False
    iterations: int = 0
    fom_solves: int = 0
    estimator_evals: int = 0
    reduced_order: int = 0
    valid_err: float | None = None
    runtime: float | None = None
    result: object = field(default=None, repr=False)

    def to_dict(self, timing=False):
        d = {c: getattr(self, c) for c in REPORT_COLUMNS}
        if timing:
            d["runtime"] = self.runtime
        return d


def run_method(sys, sets, cfg, label, mode, set_policy, reference=None, grid=None, out_dir=None):
    """Run one method row; never raises for numerical failures (row marked failed)."""
    row = MethodRow(label, mode, set_policy)
    try:
        res = run(sys, sets, cfg.greedy_config(mode, set_policy))
    except (MorGreedError, np.linalg.LinAlgError) as exc:
        row.status = f"failed: {type(exc).__name__}: {exc}"
        return row
    row.result = res
    row.converged = res.converged
    row.iterations = res.iterations
    row.fom_solves = res.fom_solves
    row.estimator_evals = res.estimator_evals
    row.reduced_order = res.reduced_order
    row.runtime = res.runtime
    if grid is not None:
        row.valid_err = validate(sys, res.rom, grid, reference=reference)
    if out_dir is not None:
        write_log(res, os.path.join(out_dir, f"{label}.log.jsonl"), meta=_meta(cfg, label),
                  timing=cfg.timing)
        save_rom(res.rom, os.path.join(out_dir, f"{label}.rom.json"))
    return row


def _threads():
    try:
        return max(1, int(os.environ.get("MORGREED_THREADS", "1")))
    except ValueError:
        return 1


def compare(cfg, sys=None, reference=None, methods=METHODS, write=True):
    """Run every method row on shared inputs.

    Returns ``(rows, info)`` where ``info`` carries the shared validation
    solve count and the report paths.
    """
    sys = sys if sys is not None else build_system(cfg)
    sets = build_sets(cfg)
    grid = validation_grid(cfg)
    counter = SolveCounter()
    if reference is None:
        reference = reference_transfer(sys, grid, counter=counter)
    out_dir = cfg.output_dir if write else None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    def job(m):
        return run_method(sys, sets, cfg, *m, reference=reference, grid=grid, out_dir=out_dir)

    workers = min(_threads(), len(methods))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(job, methods))
    else:
        rows = [job(m) for m in methods]

    info = {"validation_points": len(grid), "validation_solves": counter.count}
    if out_dir is not None:
        cols = REPORT_COLUMNS + (["runtime"] if cfg.timing else [])
        dicts = [r.to_dict(timing=cfg.timing) for r in rows]
        write_csv(os.path.join(out_dir, "report.csv"), cols, dicts)
        write_json({"rows": dicts, **info}, os.path.join(out_dir, "report.json"))
        info["report_csv"] = os.path.join(out_dir, "report.csv")
        info["report_json"] = os.path.join(out_dir, "report.json")
    return rows, info


def system_from_header(header, model=None):
    """Rebuild the system a log was produced from."""
    if model is not None:
        return load_model(model)
    meta = header.get("meta") or {}
    if meta.get("model"):
        return load_model(meta["model"])
    if meta.get("synthetic"):
        spec = dict(meta["synthetic"])
        if spec.get("delays") is not None:
            spec["delays"] = tuple(spec["delays"])
        return generate_synthetic(SyntheticSpec(**spec))
    raise ValueError("log names no model; pass one explicitly")


def replay(sys, records):
    """Rebuild ``(rom, estimator)`` after every logged iteration.

    The driver's basis updates are deterministic functions of the logged
    snapshot frequencies, so replaying them reproduces the run's bases.
    """
    V = empty_basis(sys.order)
    est = ResidualEstimator.empty(sys)
    for rec in records:
        V = orth_extend(V, solve_fom(sys, FrequencyPoint(rec.snapshot)))
        if rec.residual_snapshot is not None:
            est = update_vr(est, sys, V, FrequencyPoint(rec.residual_snapshot))
        if rec.frozen and not est.frozen:
            est = est.freeze()
        yield rec, project(sys, V), est


def trace(log_path, out_dir, model=None, true_error=False, delta=False):
    """Write ``trace.csv`` and ``samples.csv`` from a run log.

    With ``true_error`` the true output error is evaluated over each
    iteration's estimator set (full solves, cached per frequency). With
    ``delta`` the estimator, true error and slack ``delta`` are also
    reported at the sample selected by that iteration.
    """
    header, records, _ = read_log(log_path)
    os.makedirs(out_dir, exist_ok=True)
    cfg = config_from_header(header)
    relative = cfg.normalization == "relative"

    rows = []
    if true_error or delta:
        sys = system_from_header(header, model)
        cache = {}

        def H(f):
            if f not in cache:
                cache[f] = transfer_function(sys, FrequencyPoint(f))
            return cache[f]

        for rec, rom, est in replay(sys, records):
            row = _trace_row(rec)
            scale = 1.0
            if relative:
                scale = max(float(np.max(np.abs(rom.transfer(FrequencyPoint(f).s))))
                            for f in rec.estimator_set) or 1.0
            if true_error:
                errs = [output_error(sys, rom, FrequencyPoint(f), reference=H(f))
                        for f in rec.estimator_set]
                row["true_error_max"] = max(errs) / scale
            if delta:
                p = FrequencyPoint(rec.selected)
                bound = est.bind(rom)
                vals = bound.evaluate(p)
                row["estimator_at_selected"] = vals.delta_tilde / scale
                row["true_error_at_selected"] = output_error(sys, rom, p, reference=H(p.f)) / scale
                row["delta_at_selected"] = bound.delta(p, values=vals) / scale
            rows.append(row)
    else:
        rows = [_trace_row(rec) for rec in records]

    trace_path = os.path.join(out_dir, "trace.csv")
    write_csv(trace_path, TRACE_COLUMNS, rows)
    samples = []
    for rec in records:
        samples.append((rec.iteration, "snapshot", rec.snapshot))
        if rec.residual_snapshot is not None:
            samples.append((rec.iteration, "residual", rec.residual_snapshot))
        samples += [(rec.iteration, "added", f) for f in rec.added]
        samples += [(rec.iteration, "removed", f) for f in rec.removed]
    samples_path = os.path.join(out_dir, "samples.csv")
    write_csv(samples_path, ["iteration", "kind", "frequency"], samples)
    return trace_path, samples_path, rows


def _trace_row(rec):
    return {
        "iteration": rec.iteration,
        "estimator_max": rec.epsilon,
        "true_error_max": None,
        "frozen": rec.frozen,
        "selected_frequency": rec.selected,
        "estimator_at_selected": None,
        "true_error_at_selected": None,
        "delta_at_selected": None,
    }


def save_synthetic(spec, path):
    sys = generate_synthetic(spec)
    save_model(sys, path)
    return sys
