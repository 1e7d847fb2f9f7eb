"""JSON and CSV containers for models, reduced models, run logs and reports.

Floats are written with ``repr`` precision, so every file round-trips
bit-for-bit. Complex numbers are ``[re, im]`` pairs; sparse matrices are
``{"rows", "cols", "triplets": [[i, j, re, im], ...]}`` with 0-based indices.
"""

import csv
import io
import json
import os

import numpy as np

from .errors import FormatError, MissingLog
from .greedy import GreedyConfig, IterationRecord
from .linalg import SparseTriplets
from .rom import ReducedModel
from .system import AffineSystem, AffineTerm, DelaySystem

__all__ = [
    "MODEL_FORMAT",
    "AFFINE_FORMAT",
    "ROM_FORMAT",
    "LOG_FORMAT",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "rom_to_dict",
    "rom_from_dict",
    "save_rom",
    "load_rom",
    "write_log",
    "read_log",
    "write_csv",
    "write_json",
    "config_from_header",
]

MODEL_FORMAT = "morgreed-delay-v1"
AFFINE_FORMAT = "morgreed-affine-v1"
ROM_FORMAT = "morgreed-rom-v1"
LOG_FORMAT = "morgreed-log-v1"


def _sparse_to_json(m):
    trip = [[int(i), int(j), float(v.real), float(v.imag)]
            for i, j, v in zip(m.row_index, m.col_index, m.values)]
    return {"rows": int(m.rows), "cols": int(m.cols), "triplets": trip}


def _sparse_from_json(d):
    try:
        t = np.asarray(d["triplets"], dtype=np.float64).reshape(-1, 4)
        return SparseTriplets(int(d["rows"]), int(d["cols"]), t[:, 0].astype(np.intp),
                              t[:, 1].astype(np.intp), t[:, 2] + 1j * t[:, 3])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad sparse matrix entry: {exc}") from exc


def _dense_to_json(a):
    a = np.asarray(a, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def _dense_from_json(rows, shape=None):
    try:
        a = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad dense matrix: {exc}") from exc
    if a.ndim != 3 or a.shape[2] != 2:
        if shape is not None and a.size == 0:
            return np.zeros(shape, dtype=np.complex128)
        raise FormatError("dense matrices must be nested [[re, im], ...] rows")
    out = a[..., 0] + 1j * a[..., 1]
    if shape is not None and out.shape != tuple(shape):
        raise FormatError(f"dense matrix has shape {out.shape}, expected {tuple(shape)}")
    return out


def _real_to_json(a):
    return [[float(v) for v in row] for row in np.asarray(a, dtype=np.float64)]


def _term_to_json(t, matrix):
    w = complex(t.weight)
    return {"tag": t.tag, "tau": float(t.tau), "weight": [w.real, w.imag], "matrix": matrix}


def model_to_dict(sys):
    if sys.kind == "delay":
        return {
            "format": MODEL_FORMAT,
            "order": sys.order,
            "num_inputs": sys.num_inputs,
            "num_outputs": sys.num_outputs,
            "delays": list(sys.delays),
            "E": [_sparse_to_json(m) for m in sys.E],
            "A": [_sparse_to_json(m) for m in sys.A],
            "B": _dense_to_json(sys.B),
            "C": _dense_to_json(sys.C),
        }
    return {
        "format": AFFINE_FORMAT,
        "order": sys.order,
        "num_inputs": sys.num_inputs,
        "num_outputs": sys.num_outputs,
        "terms": [_term_to_json(t, _sparse_to_json(t.matrix)) for t in sys.terms],
        "B": _dense_to_json(sys.B),
        "C": _dense_to_json(sys.C),
    }


def _check_header(d, expected):
    if not isinstance(d, dict):
        raise FormatError("top-level JSON value must be an object")
    fmt = d.get("format")
    if fmt not in expected:
        raise FormatError(f"unsupported format tag {fmt!r}; expected one of {expected}")
    return fmt


def model_from_dict(d):
    fmt = _check_header(d, (MODEL_FORMAT, AFFINE_FORMAT))
    try:
        n, ni, no = int(d["order"]), int(d["num_inputs"]), int(d["num_outputs"])
        B = _dense_from_json(d["B"], (n, ni))
        C = _dense_from_json(d["C"], (no, n))
        if fmt == MODEL_FORMAT:
            E = [_sparse_from_json(m) for m in d["E"]]
            A = [_sparse_from_json(m) for m in d["A"]]
            return DelaySystem(d["delays"], E, A, B, C)
        terms = [AffineTerm(t["tag"], _sparse_from_json(t["matrix"]), float(t["tau"]),
                            complex(*t["weight"])) for t in d["terms"]]
        return AffineSystem(terms, B, C)
    except KeyError as exc:
        raise FormatError(f"missing key {exc}") from exc


def rom_to_dict(rom):
    terms = [_term_to_json(t, _dense_to_json(t.matrix)) for t in rom.terms]
    out = {
        "format": ROM_FORMAT,
        "order": rom.order,
        "full_order": rom.full_order,
        "num_inputs": rom.num_inputs,
        "num_outputs": rom.num_outputs,
    }
    if rom.delays is not None:
        out["delays"] = list(rom.delays)
    out.update({"terms": terms, "B": _dense_to_json(rom.B), "C": _dense_to_json(rom.C),
                "V": _real_to_json(rom.basis)})
    return out


def rom_from_dict(d):
    _check_header(d, (ROM_FORMAT,))
    try:
        r, n = int(d["order"]), int(d["full_order"])
        ni, no = int(d["num_inputs"]), int(d["num_outputs"])
        terms = [AffineTerm(t["tag"], _dense_from_json(t["matrix"], (r, r)), float(t["tau"]),
                            complex(*t["weight"])) for t in d["terms"]]
        V = np.asarray(d["V"], dtype=np.float64).reshape(n, r)
        return ReducedModel(terms, _dense_from_json(d["B"], (r, ni)),
                            _dense_from_json(d["C"], (no, r)), V,
                            delays=tuple(d["delays"]) if "delays" in d else None)
    except KeyError as exc:
        raise FormatError(f"missing key {exc}") from exc


def _dump(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, separators=(",", ":"))
        fh.write("\n")


def _load(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc


def save_model(sys, path):
    _dump(model_to_dict(sys), path)


def load_model(path):
    return model_from_dict(_load(path))


def save_rom(rom, path):
    _dump(rom_to_dict(rom), path)


def load_rom(path):
    return rom_from_dict(_load(path))


def write_json(obj, path):
    """Pretty JSON with sorted keys (reports, summaries)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_log(result, path, meta=None, timing=False):
    """JSON lines: a header with the config echo, then one record per iteration."""
    header = {"format": LOG_FORMAT, "mode": result.mode, "config": result.config.to_dict()}
    if meta:
        header["meta"] = meta
    footer = {
        "summary": {
            "converged": result.converged,
            "stop_reason": result.stop_reason,
            "iterations": result.iterations,
            "fom_solves": result.fom_solves,
            "estimator_evals": result.estimator_evals,
            "reduced_order": result.reduced_order,
        }
    }
    if timing:
        footer["summary"]["runtime"] = result.runtime
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for rec in result.log:
            fh.write(json.dumps(rec.to_dict(timing=timing), sort_keys=True) + "\n")
        fh.write(json.dumps(footer, sort_keys=True) + "\n")


def read_log(path):
    """Parse a run log into ``(header, records, summary)``.

    Raises
    ------
    MissingLog
        If ``path`` does not exist.
    """
    if not os.path.isfile(path):
        raise MissingLog(f"run log not found: {path}")
    header, records, summary = None, [], None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if header is None:
                _check_header(obj, (LOG_FORMAT,))
                header = obj
            elif "summary" in obj:
                summary = obj["summary"]
            else:
                records.append(IterationRecord.from_dict(obj))
    if header is None:
        raise FormatError(f"{path}: empty log")
    return header, records, summary


def config_from_header(header):
    return GreedyConfig(**header["config"])


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def write_csv(path, columns, rows):
    """CSV with 17 significant digits and LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        values = [row[c] for c in columns] if isinstance(row, dict) else row
        w.writerow([_fmt(v) for v in values])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
