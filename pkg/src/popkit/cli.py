"""Command-line runner.

Reads a YAML config naming experiments from the registry, runs them under a
root seed with splittable per-experiment streams, and writes one CSV per
experiment, a run-level JSON summary, and a PNG figure per experiment.
CSV/JSON bytes depend only on the config and the seed, never on --jobs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .experiments import REGISTRY, ExperimentResult, get
from .figures import render_figure
from .streams import StreamKey


class ConfigError(Exception):
    pass


_TOP_KEYS = {"seed", "output_dir", "experiments"}


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    output_dir = cfg.get("output_dir", "popkit_out")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a string path")
    exps = cfg.get("experiments")
    if not isinstance(exps, list) or not exps:
        raise ConfigError("experiments must be a non-empty list")
    cleaned = []
    for i, entry in enumerate(exps):
        if not isinstance(entry, dict):
            raise ConfigError(f"experiments[{i}] must be a mapping")
        unknown = set(entry) - {"name", "params"}
        if unknown:
            raise ConfigError(f"experiments[{i}] has unknown keys: {sorted(unknown)}")
        name = entry.get("name")
        if name not in REGISTRY:
            raise ConfigError(f"experiments[{i}].name: unknown experiment {name!r}")
        params = entry.get("params", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError(f"experiments[{i}].params must be a mapping")
        schema = REGISTRY[name].params
        for k in params:
            if k not in schema:
                raise ConfigError(
                    f"experiments[{i}].params: unknown parameter {k!r} for {name!r}")
        cleaned.append({"name": name, "params": params})
    return {"seed": seed, "output_dir": output_dir, "experiments": cleaned}


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply a dotted-path override like experiments.0.params.replicates=500."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    value = yaml.safe_load(raw)
    parts = path.split(".")
    node = cfg
    for part in parts[:-1]:
        if isinstance(node, list):
            node = node[int(part)]
        elif isinstance(node, dict):
            node = node.setdefault(part, {})
        else:
            raise ConfigError(f"--set path {path!r} does not resolve")
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    elif isinstance(node, dict):
        node[last] = value
    else:
        raise ConfigError(f"--set path {path!r} does not resolve")


def _fmt(value) -> str:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    if isinstance(value, (np.bool_, bool)):
        return str(bool(value))
    return str(value)


def write_csv(result: ExperimentResult, path: Path) -> None:
    cols = list(result.table)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        if cols:
            n = len(result.table[cols[0]])
            for i in range(n):
                writer.writerow([_fmt(result.table[c][i]) for c in cols])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def run_config(cfg: dict, jobs: int = 1, figures: bool = True,
               log=print) -> tuple[list[ExperimentResult], Path]:
    cfg = validate_config(cfg)
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    root = StreamKey(cfg["seed"])
    results = []
    for i, entry in enumerate(cfg["experiments"]):
        exp = get(entry["name"])
        result = exp.run(entry["params"], root.child(i), jobs=jobs)
        results.append(result)
        stem = f"{i:02d}_{result.name}" if _has_dup(cfg["experiments"]) else result.name
        write_csv(result, outdir / f"{stem}.csv")
        if figures:
            render_figure(result, str(outdir / f"{stem}.png"))
        log(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}  "
            + "  ".join(f"{k}={_short(v)}" for k, v in result.metrics.items()))
    summary = [r.summary() for r in results]
    with open(outdir / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return results, outdir


def _has_dup(entries) -> bool:
    names = [e["name"] for e in entries]
    return len(names) != len(set(names))


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_short(x)}" for k, x in v.items()) + "}"
    if isinstance(v, list):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="popkit",
        description="Run stochastic population-model experiments from a YAML config.")
    ap.add_argument("--config", help="YAML config file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config entry by dotted path (repeatable)")
    ap.add_argument("--seed", type=int, help="override the root seed")
    ap.add_argument("--jobs", type=int, default=1,
                    help="worker threads for replicate chunks (output-invariant)")
    ap.add_argument("--list", action="store_true", dest="list_experiments",
                    help="print the experiment registry as JSON and exit")
    ap.add_argument("--no-figures", action="store_true",
                    help="skip PNG rendering")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_experiments:
        print(json.dumps({name: exp.schema() for name, exp in sorted(REGISTRY.items())},
                         indent=2))
        return 0
    if not args.config:
        print("error: --config is required (or use --list)", file=sys.stderr)
        return 2
    try:
        with open(args.config) as fh:
            cfg = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a mapping")
        for assignment in args.set:
            apply_override(cfg, assignment)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        results, outdir = run_config(cfg, jobs=args.jobs,
                                     figures=not args.no_figures)
    except (ConfigError, KeyError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} experiments passed; "
          f"outputs in {outdir}")
    return 0 if n_fail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
