"""Command-line driver: read a JSON problem, build, verify, write CSV and JSON report.

Exit codes: 0 when every check passes (N/A counts as passing), 2 on any FAIL,
1 on configuration or construction errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from ckextend import builder, verify
from ckextend.catalog import CATALOG, OrderExceeded, make_oracle
from ckextend.opensets import (
    DEFAULT_MAX_DEPTH,
    OpenSet,
    ValidationError,
    complement_interior,
    normalize,
)
from ckextend.taming import ConstructionError

log = logging.getLogger("ckextend")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

_bound = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf", "+inf"]}]}
_interval_list = {"type": "array", "items": {"type": "array", "items": _bound, "minItems": 2, "maxItems": 2}}
_function = {
    "oneOf": [
        {"type": "string", "enum": sorted(CATALOG)},
        {
            "type": "object",
            "properties": {"id": {"type": "string", "enum": sorted(CATALOG)}, "params": {"type": "object"}},
            "required": ["id"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "open_set": {**_interval_list, "minItems": 1},
        "function": _function,
        "k": {"oneOf": [{"type": "integer", "minimum": 0}, {"enum": ["inf"]}]},
        "max_depth": {"type": "integer", "minimum": 2, "maximum": 200},
        "max_order": {"type": "integer", "minimum": 1, "maximum": 32},
        "mode": {"enum": ["extend", "cozero", "complement"]},
        "checks": {
            "type": "object",
            "properties": {
                "orders": {"type": "integer", "minimum": 1, "maximum": 8},
                "samples": {"type": "integer", "minimum": 10},
                "depths": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {"samples_csv": {"type": "string"}, "report_json": {"type": "string"}},
            "additionalProperties": False,
        },
        "complement": {
            "type": "object",
            "properties": {
                "b": {
                    "oneOf": [
                        _function,
                        {"type": "object", "properties": {"cozero_of": _interval_list},
                         "required": ["cozero_of"], "additionalProperties": False},
                    ]
                },
                "zero_set": _interval_list,
                "window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
            "required": ["b"],
            "additionalProperties": False,
        },
        "fault_injection": {"enum": ["none", "knot_perturb", "deflate_constants"]},
        "timestamp": {"type": "boolean"},
    },
    "required": ["open_set"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


def load_config(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validate_config(config)
    return config


def validate_config(config: dict) -> None:
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.path))
    if errors:
        lines = []
        for err in errors:
            where = "/".join(str(p) for p in err.path) or "<root>"
            lines.append(f"field {where}: {err.message}")
        raise ConfigError("; ".join(lines))
    mode = config.get("mode", "extend")
    if mode == "extend" and "function" not in config:
        raise ConfigError("field function: required when mode is 'extend'")
    if mode == "complement" and "complement" not in config:
        raise ConfigError("field complement: required when mode is 'complement'")
    if config.get("fault_injection", "none") != "none" and mode != "extend":
        raise ConfigError("field fault_injection: only supported in 'extend' mode")


def _function_spec(spec) -> tuple[str, dict]:
    if isinstance(spec, str):
        return spec, {}
    return spec["id"], dict(spec.get("params", {}))


def _order_bound(value) -> float:
    if value is None or value == "inf":
        return math.inf
    return int(value)


def _json_number(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    return _json_number(obj)


def sample_grid(e, V: OpenSet, per_segment: int = 8, window: float = 4.0) -> np.ndarray:
    """Knot-aware grid: ``per_segment`` points per live ladder segment plus boundary points."""
    xs = []
    for m, plan in enumerate(e.plans):
        lad = plan.ladder
        lo, hi = V.components[m]
        for side in lad.sides():
            depth = min(plan.constants[side].effective_depth() + 2, lad.max_depth)
            for n in range(1, depth + 1):
                a, b = lad.segment(side, n)
                xs.extend(np.linspace(a, b, per_segment, endpoint=False))
        if math.isinf(lo):
            xs.extend(np.linspace(lad.midpoint - window, lad.midpoint, 4 * per_segment, endpoint=False))
        if math.isinf(hi):
            xs.extend(np.linspace(lad.midpoint, lad.midpoint + window, 4 * per_segment))
    xs.extend(V.boundary())
    return np.unique(np.asarray(xs, dtype=float))


def write_samples_csv(path: Path, e, V: OpenSet, f=None, g=None) -> int:
    """Columns: x, in_V, g, h, f, component_index, knot_index."""
    g = g if g is not None else e
    xs = sample_grid(e, V)
    gv = np.asarray(g(xs))
    hv = np.asarray(e(xs)) if e is not g else gv
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "in_V", "g", "h", "f", "component_index", "knot_index"])
        for x, gx, hx in zip(xs, gv, hv):
            loc = e.locate(x)
            if loc is None:
                w.writerow([repr(float(x)), 0, repr(float(gx)), repr(float(hx)), "", "", ""])
                continue
            m, side, n = loc
            fx = ""
            if f is not None:
                fx = repr(float(f(x))) if e.plans[m].in_domain else "0.0"
            knot = "" if side == "const" else (n if side == "right" else -n)
            w.writerow([repr(float(x)), 1, repr(float(gx)), repr(float(hx)), fx, m, knot])
    return len(xs)


def run_config(config: dict, *, timestamp: bool = True) -> tuple[int, dict]:
    """Execute one problem; returns (exit code, report document)."""
    mode = config.get("mode", "extend")
    max_depth = config.get("max_depth", DEFAULT_MAX_DEPTH)
    checks = config.get("checks", {})
    verify_order_cap = config.get("max_order", 8)
    orders = min(checks.get("orders", 4), verify_order_cap)
    samples = checks.get("samples", 10_000)
    depths_cfg = checks.get("depths")
    depths = list(depths_cfg) if depths_cfg else list(range(5, 21))
    fault = config.get("fault_injection", "none")
    U = normalize(config["open_set"])
    report = verify.Report()
    csv_target = None

    if mode == "extend":
        fid, params = _function_spec(config["function"])
        f = make_oracle(fid, params, U)
        k = min(_order_bound(config.get("k")), f.k)
        ext = builder.build_extension(f, k, max_depth=max_depth,
                                      deflate=10.0 if fault == "deflate_constants" else 1.0)
        if fault == "knot_perturb":
            m = next(i for i, p in enumerate(ext.g.plans) if p.in_domain and p.knot_values)
            side = next(iter(ext.g.plans[m].knot_values))
            ext = builder.Extension(ext.U, ext.V, ext.f, ext.g,
                                    ext.h.with_perturbed_knot(m, side, 1, 1e-6))
        report = verify.verify_extension(ext, samples=samples, orders=orders, depths=depths,
                                         quotient_orders=min(4, orders))
        report.summary = ext.g.summary()
        csv_target = (ext.h, ext.V, ext.f, ext.g)
    elif mode == "cozero":
        a = builder.build_cozero(U, max_depth=max_depth)
        report.extend(verify.check_cozero(a, U))
        report.extend(verify.check_knot_values(a))
        report.extend(verify.check_boundary_vanishing(a, a.V, orders, depths, "fd", "cozero"))
        report.summary = a.summary()
        csv_target = (a, a.V, None, None)
    else:
        spec = config["complement"]
        b_spec = spec["b"]
        window = tuple(spec.get("window", [-5.0, 5.0]))
        if isinstance(b_spec, dict) and "cozero_of" in b_spec:
            support = normalize(b_spec["cozero_of"])
            b = builder.build_cozero(support, max_depth=max_depth)
            zero_set = spec.get("zero_set")
            if zero_set is None:
                zero_set = [[lo, hi] for lo, hi in _closed_complement(support)]
        else:
            fid, params = _function_spec(b_spec)
            whole = normalize([["-inf", "inf"]])
            b = make_oracle(fid, params, whole)
            zero_set = spec.get("zero_set")
        a = builder.build_complement(b, zero_set, window=window, max_depth=max_depth)
        report.extend(verify.check_complement(a, b, window))
        report.summary = a.summary()
        if isinstance(a, builder.SmoothEvaluator):
            csv_target = (a, a.V, None, None)

    outputs = config.get("outputs", {})
    if outputs.get("samples_csv") and csv_target is not None:
        e, V, f, g = csv_target
        write_samples_csv(Path(outputs["samples_csv"]), e, V, f, g)

    doc = {
        "mode": mode,
        "checks": [e.to_json() for e in report.entries],
        "build_summary": report.summary,
        "status": "PASS" if report.ok else "FAIL",
    }
    if timestamp and config.get("timestamp", True):
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    doc = _clean(doc)
    if outputs.get("report_json"):
        p = Path(outputs["report_json"])
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return (EXIT_OK if report.ok else EXIT_FAIL), doc


def _closed_complement(S: OpenSet) -> list[tuple[float, float]]:
    """Closed intervals making up ``R \\ S`` (isolated boundary points included)."""
    gaps = complement_interior(S)
    points = set(S.boundary())
    out = [(lo, hi) for lo, hi in gaps.components]
    for p in points:
        if not any(lo <= p <= hi for lo, hi in out):
            out.append((p, p))
    return sorted(out)


def run(config: dict, *, timestamp: bool = True) -> int:
    """Validate and execute a configuration dictionary; returns the exit code."""
    try:
        validate_config(config)
        code, _ = run_config(config, timestamp=timestamp)
        return code
    except (ConfigError, ValidationError, ConstructionError, OrderExceeded) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


def run_suite(timestamp: bool = False) -> tuple[int, list[dict]]:
    """Build and verify every standard fixture."""
    from ckextend.fixtures import standard_fixtures

    rows = []
    failed = False
    for name, f in standard_fixtures():
        started = time.perf_counter()
        ext = builder.build_extension(f)
        report = verify.verify_extension(ext)
        rows.append({
            "fixture": name,
            "status": "PASS" if report.ok else "FAIL",
            "failures": [e.to_json() for e in report.failures],
            "seconds": round(time.perf_counter() - started, 3),
        })
        failed |= not report.ok
    return (EXIT_FAIL if failed else EXIT_OK), rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ckextend", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a JSON problem description")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--report", type=Path, help="override outputs.report_json")
    p_run.add_argument("--samples-csv", type=Path, help="override outputs.samples_csv")
    p_run.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    p_suite = sub.add_parser("suite", help="verify the standard fixture set")
    p_suite.add_argument("--report", type=Path)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "suite":
        code, rows = run_suite()
        for row in rows:
            print(f"{row['status']:4s}  {row['fixture']:32s} {row['seconds']:7.2f}s")
        if args.report:
            args.report.write_text(json.dumps(_clean(rows), indent=2, sort_keys=True) + "\n")
        return code

    try:
        config = load_config(args.config)
        outputs = dict(config.get("outputs", {}))
        if args.report:
            outputs["report_json"] = str(args.report)
        if args.samples_csv:
            outputs["samples_csv"] = str(args.samples_csv)
        if outputs:
            config["outputs"] = outputs
        code, doc = run_config(config, timestamp=not args.no_timestamp)
    except (ConfigError, ValidationError, ConstructionError, OrderExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for entry in doc["checks"]:
        order = entry["params"].get("order")
        fn = entry["params"].get("function")
        label = entry["check"] + (f"[{fn + ' ' if fn else ''}r={order}]" if order else "")
        print(f"{entry['status']:4s}  {label}")
    return code


if __name__ == "__main__":
    sys.exit(main())
