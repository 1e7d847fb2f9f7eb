"""``morgreed`` command-line interface.

Exit codes: 0 success (converged), 2 a run did not converge, 1 any error.
Failures print a one-line JSON object as the last line on stderr.
"""

import argparse
import json
import logging
import os
import sys

from . import __version__
from .bench import (
    METHODS,
    REPORT_COLUMNS,
    build_sets,
    build_system,
    compare,
    load_config,
    run_method,
    trace,
    validation_grid,
)
from .errors import NotConverged
from .fileio import load_model, load_rom, save_model, write_csv, write_json
from .greedy import validate
from .synthetic import SyntheticSpec, generate_synthetic
from .system import SolveCounter

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; that code is reserved for non-convergence
    def error(self, message):
        raise UsageError(message)


def _policy(value):
    v = value.replace("-", "_")
    if v not in ("add_only", "add_remove"):
        raise argparse.ArgumentTypeError("expected add-only or add-remove")
    return v


def _add_run_options(p):
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--model", help="model file; a synthetic system is generated when omitted")
    p.add_argument("--seed", type=int)
    p.add_argument("--f-low", type=float)
    p.add_argument("--f-high", type=float)
    p.add_argument("--xi-size", type=int, help="|xi| for the standard driver")
    p.add_argument("--xi-c-size", type=int, help="initial coarse set size")
    p.add_argument("--xi-f-size", type=int, help="fine set size")
    p.add_argument("--validation-size", type=int)
    p.add_argument("--validation-spacing", choices=("linear", "log"))
    p.add_argument("--tol", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n-add", type=int)
    p.add_argument("--n-del", type=int)
    p.add_argument("--set-policy", type=_policy)
    p.add_argument("--rbf-shape", type=float)
    p.add_argument("--normalization", choices=("absolute", "relative"))
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--initial-index", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--timing", action="store_true", default=None,
                   help="include wall-clock fields (outputs stop being byte-reproducible)")


def _overrides(args):
    return {
        "model": args.model,
        "seed": args.seed,
        "f_low": args.f_low,
        "f_high": args.f_high,
        "xi.cardinality": args.xi_size,
        "xi_c.cardinality": args.xi_c_size,
        "xi_f.cardinality": args.xi_f_size,
        "validation.cardinality": args.validation_size,
        "validation.spacing": args.validation_spacing,
        "tol": args.tol,
        "epsilon": args.epsilon,
        "n_add": args.n_add,
        "n_del": args.n_del,
        "set_policy": args.set_policy,
        "rbf_shape": args.rbf_shape,
        "normalization": args.normalization,
        "max_iterations": args.max_iterations,
        "initial_index": args.initial_index,
        "output_dir": args.output_dir,
        "timing": args.timing,
        "mode": getattr(args, "mode", None),
    }


def build_parser():
    parser = _Parser(prog="morgreed", description="Greedy reduced-basis MOR for delay systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a seeded synthetic delay system")
    g.add_argument("--out", required=True)
    g.add_argument("--order", type=int, default=SyntheticSpec.order)
    g.add_argument("--num-delays", type=int, default=SyntheticSpec.num_delays)
    g.add_argument("--num-inputs", type=int, default=SyntheticSpec.num_inputs)
    g.add_argument("--num-outputs", type=int, default=SyntheticSpec.num_outputs)
    g.add_argument("--f-low", type=float, default=SyntheticSpec.f_low)
    g.add_argument("--f-high", type=float, default=SyntheticSpec.f_high)
    g.add_argument("--resonances", type=int, default=SyntheticSpec.resonances)
    g.add_argument("--damping", type=float, default=SyntheticSpec.damping)
    g.add_argument("--coupling", type=float, default=SyntheticSpec.coupling)
    g.add_argument("--density", type=float, default=SyntheticSpec.density)
    g.add_argument("--max-delay", type=float)
    g.add_argument("--output-scale", type=float, default=SyntheticSpec.output_scale)
    g.add_argument("--seed", type=int, default=SyntheticSpec.seed)

    r = sub.add_parser("run", help="run one greedy driver")
    r.add_argument("--mode", choices=("standard", "bifidelity", "multifidelity"))
    r.add_argument("--no-validate", action="store_true", help="skip the validation sweep")
    _add_run_options(r)

    c = sub.add_parser("compare", help="run all five method rows and write a report")
    _add_run_options(c)

    t = sub.add_parser("trace", help="per-iteration plot data from a run log")
    t.add_argument("--log", required=True)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--model", help="override the model named in the log")
    t.add_argument("--true-error", action="store_true",
                   help="also evaluate true errors over each estimator set (full solves)")
    t.add_argument("--delta", action="store_true",
                   help="also report estimator, true error and delta at each selected sample")

    v = sub.add_parser("validate", help="maximum output error of a ROM file over a grid")
    v.add_argument("--rom", required=True)
    _add_run_options(v)
    return parser


def _cmd_generate(args):
    spec = SyntheticSpec(
        order=args.order, num_delays=args.num_delays, num_inputs=args.num_inputs,
        num_outputs=args.num_outputs, f_low=args.f_low, f_high=args.f_high,
        resonances=args.resonances, damping=args.damping, coupling=args.coupling,
        density=args.density, max_delay=args.max_delay, output_scale=args.output_scale,
        seed=args.seed,
    )
    save_model(generate_synthetic(spec), args.out)
    print(json.dumps({"model": args.out, "order": spec.order, "num_delays": spec.num_delays}))
    return EXIT_OK


def _cmd_run(args):
    cfg = load_config(args.config, _overrides(args))
    if cfg.mode == "all":
        raise ValueError("mode 'all' belongs to the compare command")
    label = cfg.mode if cfg.mode == "standard" else f"{cfg.mode}_{cfg.set_policy}"
    sys_ = build_system(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    grid = None if args.no_validate else validation_grid(cfg)
    row = run_method(sys_, build_sets(cfg), cfg, label, cfg.mode, cfg.set_policy,
                     grid=grid, out_dir=cfg.output_dir)
    if row.result is None:
        raise RuntimeError(row.status)
    d = row.to_dict(timing=cfg.timing)
    cols = REPORT_COLUMNS + (["runtime"] if cfg.timing else [])
    write_csv(os.path.join(cfg.output_dir, f"{label}.summary.csv"), cols, [d])
    write_json(d, os.path.join(cfg.output_dir, f"{label}.summary.json"))
    print(json.dumps(d, sort_keys=True))
    if not row.converged:
        raise NotConverged(f"{label} stopped after {row.iterations} iterations "
                           f"({row.result.stop_reason})")
    return EXIT_OK


def _cmd_compare(args):
    cfg = load_config(args.config, _overrides(args))
    rows, info = compare(cfg, methods=METHODS)
    for r in rows:
        print(json.dumps(r.to_dict(timing=cfg.timing), sort_keys=True))
    failed = [r.method for r in rows if r.result is None]
    if failed:
        raise RuntimeError(f"method rows failed: {failed}")
    stalled = [r.method for r in rows if not r.converged]
    if stalled:
        raise NotConverged(f"method rows did not converge: {stalled}")
    return EXIT_OK


def _cmd_trace(args):
    trace_path, samples_path, rows = trace(args.log, args.out, model=args.model,
                                           true_error=args.true_error, delta=args.delta)
    print(json.dumps({"trace": trace_path, "samples": samples_path, "rows": len(rows)}))
    return EXIT_OK


def _cmd_validate(args):
    cfg = load_config(args.config, _overrides(args))
    if cfg.model is None:
        raise ValueError("validate needs --model")
    sys_ = load_model(cfg.model)
    rom = load_rom(args.rom)
    counter = SolveCounter()
    err = validate(sys_, rom, validation_grid(cfg), counter=counter)
    print(json.dumps({"valid_err": err, "points": counter.count}))
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "trace": _cmd_trace,
    "validate": _cmd_validate,
}


def _fail(exc, code):
    print(f"morgreed: {exc}", file=sys.stderr)
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}),
          file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(exc, EXIT_ERROR)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except NotConverged as exc:
        return _fail(exc, EXIT_NOT_CONVERGED)
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit 1
        return _fail(exc, EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
