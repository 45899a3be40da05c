"""Command line experiment runner.

    kickosc run --config cfg.json [--output-dir DIR] [--seed N] [--threads N]
    kickosc validate --config cfg.json
    kickosc list

A config is one JSON object with keys ``experiment``, ``parameters`` (flat
name -> number/string map, lists as comma-separated strings), ``seed``,
``output_dir`` and ``threads``. Exit codes: 0 ok, 1 config error, 2 a hard
invariant failed (outputs are still written and the manifest says which).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .classical import DivergenceError
from .experiments import EXPERIMENTS, Outcome, floats, ints
from .metrics import PSDViolation
from .numerics import NotHermitianError
from .quantum import TruncationError

CONFIG_KEYS = {"experiment", "parameters", "seed", "output_dir", "threads"}
EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 1, 2
RUNTIME_INVARIANTS = (TruncationError, DivergenceError, PSDViolation, NotHermitianError)


class ConfigError(ValueError):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"
    threads: int = 0  # 0 means all available cores

    def resolved(self):
        """Defaults overlaid with the given parameters, each coerced to its default's type."""
        _, defaults = EXPERIMENTS[self.experiment]
        out = dict(defaults)
        for k, v in self.parameters.items():
            kind = type(defaults[k])
            out[k] = int(v) if kind is int else float(v) if kind is float else str(v)
        return out

    def worker_count(self):
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_values(name, params):
    errors, warnings = [], []
    for key, value in params.items():
        if "sigma" in key:
            vals = floats(value) if isinstance(value, str) else [value]
            if any(v < 0 for v in vals):
                errors.append("sigma must be non-negative")
        if key.startswith("n_max"):
            for n in (ints(value) if isinstance(value, str) else [value]):
                if n < 16:
                    errors.append(f"{key} must be at least 16")
                elif n & (n - 1):
                    warnings.append(f"{key}={n} is not a power of two")
        if key in ("hbar", "hbars", "mass", "omega", "d", "gamma_s", "area", "scale"):
            vals = floats(value) if isinstance(value, str) else [value]
            if any(v <= 0 for v in vals):
                errors.append(f"{key} must be positive")
        if key in ("n", "t_max", "t", "points", "realizations", "classical_n") and _is_number(value) and value < 1:
            errors.append(f"{key} must be at least 1")
    if name == "fig3_m2_growth":
        lengths = {len(str(params[k]).split(",")) for k in ("hbars", "t_max", "n_max", "leak_thresholds")}
        if len(lengths) != 1:
            errors.append("hbars, t_max, n_max and leak_thresholds need equal lengths")
    return errors, warnings


def validate(raw):
    """Return (errors, warnings) for a config mapping without running it."""
    errors, warnings = [], []
    if not isinstance(raw, dict):
        return ["config must be a JSON object"], []
    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        errors.append(f"unknown config keys: {', '.join(unknown)}")
    name = raw.get("experiment")
    if name not in EXPERIMENTS:
        errors.append(f"unknown experiment {name!r}; valid names: {', '.join(EXPERIMENTS)}")
        return errors, warnings
    for key in ("seed", "threads"):
        if key in raw and (not isinstance(raw[key], int) or isinstance(raw[key], bool) or raw[key] < 0):
            errors.append(f"{key} must be a non-negative integer")
    if "output_dir" in raw and not isinstance(raw["output_dir"], str):
        errors.append("output_dir must be a string")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        errors.append("parameters must be an object")
        return errors, warnings
    _, defaults = EXPERIMENTS[name]
    bad = sorted(set(params) - set(defaults))
    if bad:
        errors.append(f"unknown parameters for {name}: {', '.join(bad)}")
    merged = dict(defaults)
    for key, value in params.items():
        if key not in defaults:
            continue
        kind = type(defaults[key])
        if kind is str:
            if not isinstance(value, (str, int, float)) or isinstance(value, bool):
                errors.append(f"{key} must be a string or number")
                continue
            try:
                floats(value)
            except ValueError:
                errors.append(f"{key} must be a comma-separated list of numbers")
                continue
        elif not _is_number(value) or not math.isfinite(value):
            errors.append(f"{key} must be a finite number")
            continue
        elif kind is int and float(value) != int(value):
            errors.append(f"{key} must be an integer")
            continue
        merged[key] = value
    if not errors:
        e, w = _check_values(name, merged)
        errors += e
        warnings += w
    return errors, warnings


def load_config(path, overrides=None):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    if isinstance(raw, dict):
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    errors, _ = validate(raw)
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(**raw)


# -- CSV --------------------------------------------------------------------------

def format_number(x):
    return "%.17g" % x


def write_csv(path, columns, data):
    """Header of "name [unit]" cells, then rows at 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{n} [{u}]" for n, u in columns])
    for row in np.atleast_2d(data):
        w.writerow([format_number(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    """Inverse of write_csv: ([(name, unit), ...], float array)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    columns = []
    for cell in rows[0]:
        name, _, unit = cell.partition(" [")
        columns.append((name, unit.rstrip("]")))
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(columns))
    return columns, data


# -- run --------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer, np.bool_)):
        return x.item()
    return x


def run(config):
    """Execute an experiment; returns (exit code, manifest dict)."""
    fn, _ = EXPERIMENTS[config.experiment]
    params = config.resolved()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    workers = config.worker_count()
    start = time.perf_counter()
    outcome = Outcome()
    try:
        # one BLAS thread per worker keeps floating-point reductions independent of the worker count
        with threadpool_limits(limits=1):
            fn(params, config.seed, workers, outcome)
        outcome.invariant("completed", True)
    except RUNTIME_INVARIANTS as exc:
        # keep whatever curves were produced before the failure
        outcome.invariant("completed", False, f"{type(exc).__name__}: {exc}")
    wall = time.perf_counter() - start
    files = []
    for curve in outcome.curves:
        path = out_dir / f"{curve.name}.csv"
        write_csv(path, curve.columns, curve.data)
        files.append(path.name)
    failed = [k for k, (ok, _) in outcome.invariants.items() if not ok]
    manifest = {
        "experiment": config.experiment,
        "config": {**asdict(config), "parameters": params},
        "seed": config.seed,
        "threads": workers,
        "version": __version__,
        "wall_time_s": wall,
        "files": files,
        "invariants": {k: {"passed": ok, "value": v} for k, (ok, v) in outcome.invariants.items()},
        "checks": {k: {"passed": ok, "value": v} for k, (ok, v) in outcome.checks.items()},
        "info": outcome.info,
        "status": "invariant_violation" if failed else "ok",
    }
    (out_dir / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return (EXIT_INVARIANT if failed else EXIT_OK), manifest


def main(argv=None):
    parser = argparse.ArgumentParser(prog="kickosc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output-dir")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--threads", type=int)
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("--config", required=True)
    sub.add_parser("list", help="print experiment names")
    args = parser.parse_args(argv)

    if args.command == "list":
        for name in EXPERIMENTS:
            print(name)
        return EXIT_OK
    if args.command == "validate":
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        errors, warnings = validate(raw)
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        if not errors:
            print("ok")
        return EXIT_CONFIG if errors else EXIT_OK

    overrides = {"output_dir": args.output_dir, "seed": args.seed, "threads": args.threads}
    try:
        config = load_config(args.config, overrides)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    code, manifest = run(config)
    for name, entry in manifest["invariants"].items():
        if not entry["passed"]:
            print(f"invariant failed: {name} ({entry['value']})", file=sys.stderr)
    print(f"{config.experiment}: {len(manifest['files'])} files in {config.output_dir} "
          f"({manifest['wall_time_s']:.2f} s, {manifest['status']})")
    return code


if __name__ == "__main__":
    sys.exit(main())
