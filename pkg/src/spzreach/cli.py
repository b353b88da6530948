"""Command-line front end: ``spzreach reach | gene-network | demo | simulate``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import benchmarks, demos
from .convert import from_interval, interval_enclose, zono_enclose
from .dynamics import ModelError, NonlinearSystem, load_model
from .interval import IntervalDivisionError
from .linsys import FlowError
from .oracle import run_oracle
from .reach import FixedPointError, ReachConfig, StepResult, reach_analyze
from .sets import IntervalVector
from .spz import SparsePolyZonotope

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_UNSOUND, EXIT_NUMERIC = 0, 1, 2, 3, 4

REACH_KEYS = ("dt", "t_f", "lam", "rho_d", "mu_d", "p_d", "eta", "max_iter", "reduction")
ORACLE_DEFAULTS = {"trajectories": 100, "seed": 0, "samples_per_step": 4, "rtol": 1e-10, "atol": 1e-10, "tol": 1e-9}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- config -------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    cfg["_base"] = str(Path(path).resolve().parent)
    return cfg


def resolve_model(spec: str, base: str | None = None) -> NonlinearSystem:
    """A model is a path to a model file or the name of a built-in model."""
    candidates = [Path(spec)]
    if base is not None:
        candidates.append(Path(base) / spec)
    for p in candidates:
        if p.is_file():
            return load_model(p)
    try:
        return benchmarks.builtin_model(spec)
    except FileNotFoundError:
        raise ConfigError(f"model not found: {spec}") from None


def _interval(record, dim: int, what: str) -> IntervalVector:
    if record is None:
        if dim == 0:
            return IntervalVector(np.zeros(0), np.zeros(0))
        raise ConfigError(f"missing {what}")
    try:
        lo = np.asarray(record["lo"], dtype=float).reshape(-1)
        hi = np.asarray(record["hi"], dtype=float).reshape(-1)
        iv = IntervalVector(lo, hi)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be {{'lo': [...], 'hi': [...]}} with lo <= hi") from exc
    if iv.dim != dim:
        raise ConfigError(f"{what} has dimension {iv.dim}, expected {dim}")
    return iv


def reach_config(cfg: dict) -> ReachConfig:
    kwargs = {k: cfg[k] for k in REACH_KEYS if k in cfg}
    missing = [k for k in ("dt", "t_f") if k not in kwargs]
    if missing:
        raise ConfigError(f"missing config field(s): {', '.join(missing)}")
    try:
        return ReachConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _projection(cfg: dict, n: int) -> tuple[int, int] | None:
    proj = cfg.get("project")
    if proj is None:
        return (0, 1) if n >= 2 else None
    if len(proj) != 2 or not all(isinstance(i, int) and 0 <= i < n for i in proj) or proj[0] == proj[1]:
        raise ConfigError(f"projection dimensions must be two distinct indices in [0, {n})")
    return tuple(proj)


# -- output -------------------------------------------------------------------

def canonical_ids(pz: SparsePolyZonotope) -> dict:
    """Map identifiers to 1..p in increasing order, so records do not depend on the id counter."""
    return {int(v): i + 1 for i, v in enumerate(sorted(pz.id.tolist()))}


def _num(x: float):
    return float(x) if math.isfinite(x) else None


def polygon(pz: SparsePolyZonotope, dims) -> list | None:
    if dims is None:
        return None
    z = zono_enclose(pz)
    P = np.zeros((2, pz.n))
    P[0, dims[0]] = P[1, dims[1]] = 1.0
    return (P @ z).polygon().tolist()


def step_record(rec: StepResult, dims, store_sets: bool) -> dict:
    hull = rec.tau_hull()
    out = {
        "kind": "interval",
        "step": rec.step,
        "t_start": rec.t_start,
        "t_end": rec.t_end,
        "iterations": rec.iterations,
        "vol_ratio": _num(rec.vol_ratio),
        "restructured": bool(rec.restructured),
        "hull": {"lo": hull.lo.tolist(), "hi": hull.hi.tolist()},
        "polygon": polygon(rec.R_tau, dims),
    }
    if store_sets:
        out["set"] = rec.R_tau.to_dict(canonical_ids(rec.R_tau))
    return out


def point_record(pz: SparsePolyZonotope, step: int, t: float, dims) -> dict:
    hull = interval_enclose(pz)
    return {
        "kind": "point",
        "step": step,
        "t_start": t,
        "t_end": t,
        "hull": {"lo": hull.lo.tolist(), "hi": hull.hi.tolist()},
        "polygon": polygon(pz, dims),
        "set": pz.to_dict(canonical_ids(pz)),
    }


def _dump(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def write_polygon_csv(path, records) -> None:
    """One row per polygon vertex: step, t_start, t_end, vertex, x, y."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "t_start", "t_end", "vertex", "x", "y"])
        for rec in records:
            for k, (x, y) in enumerate(rec["polygon"] or []):
                writer.writerow([rec["step"], repr(rec["t_start"]), repr(rec["t_end"]), k, repr(x), repr(y)])


# -- commands -------------------------------------------------------------------

def _oracle_settings(cfg: dict) -> dict:
    settings = dict(ORACLE_DEFAULTS)
    settings.update(cfg.get("oracle") or {})
    unknown = set(settings) - set(ORACLE_DEFAULTS) - {"enabled"}
    if unknown:
        raise ConfigError(f"unknown oracle field(s): {', '.join(sorted(unknown))}")
    return settings


def run_reach(cfg: dict, output, oracle: bool, label: str) -> int:
    """Run one reachability analysis and write NDJSON records to ``output``."""
    model = resolve_model(cfg.get("model", ""), cfg.get("_base")) if cfg.get("model") else None
    if model is None:
        raise ConfigError("missing model")
    return _run(model, cfg, output, oracle, label)


def _run(model: NonlinearSystem, cfg: dict, output, oracle: bool, label: str) -> int:
    n, m = model.n, model.m
    X0_box = _interval(cfg.get("x0"), n, "x0")
    U = _interval(cfg.get("u"), m, "u") if m or cfg.get("u") else IntervalVector(np.zeros(0), np.zeros(0))
    rc = reach_config(cfg)
    dims = _projection(cfg, n)
    store_sets = bool(cfg.get("store_sets", False))
    settings = _oracle_settings(cfg)
    oracle = oracle or bool(settings.get("enabled", False))

    X0 = from_interval(X0_box)
    header = {
        "kind": "header",
        "model": model.name,
        "n": n,
        "m": m,
        "x0": {"lo": X0_box.lo.tolist(), "hi": X0_box.hi.tolist()},
        "u": {"lo": U.lo.tolist(), "hi": U.hi.tolist()},
        "config": {k: getattr(rc, k) for k in REACH_KEYS},
        "project": list(dims) if dims else None,
    }

    hulls = []
    polygons = []
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(_dump(header) + "\n")

        def on_step(rec: StepResult):
            hulls.append(rec.tau_hull())
            record = step_record(rec, dims, store_sets)
            polygons.append(record)
            fh.write(_dump(record) + "\n")

        result = reach_analyze(model, X0, U if m else None, rc, on_step=on_step)
        fh.write(_dump(point_record(result.final, rc.steps, rc.steps * rc.dt, dims)) + "\n")

        report = None
        if oracle:
            report = run_oracle(
                model, X0, U if m else None, hulls, rc.dt,
                trajectories=int(settings["trajectories"]), seed=int(settings["seed"]),
                samples_per_step=int(settings["samples_per_step"]),
                rtol=float(settings["rtol"]), atol=float(settings["atol"]), tol=float(settings["tol"]),
            )
            fh.write(_dump({"kind": "diagnostic", "oracle": report.to_dict()}) + "\n")

    if cfg.get("csv"):
        write_polygon_csv(cfg["csv"], polygons)

    summary = (
        f"{label}: steps={len(result.steps)} restructures={result.restructure_count} "
        f"max_iterations={int(result.iterations.max())} wall_time={result.wall_time:.2f}s"
    )
    if report is not None:
        summary += f" oracle={'pass' if report.ok else 'FAIL'} checks={report.checks} violations={len(report.violations)}"
    print(summary)
    return EXIT_UNSOUND if report is not None and not report.ok else EXIT_OK


def gene_network_config(N: int, overrides: dict | None = None) -> dict:
    g = benchmarks.GENE_NETWORK
    n = 2 * N
    cfg = {
        "x0": {"lo": [g["x0_lo"]] * n, "hi": [g["x0_hi"]] * n},
        "u": {"lo": [-benchmarks.GENE_INPUT] * N, "hi": [benchmarks.GENE_INPUT] * N},
        **{k: g[k] for k in ("dt", "t_f", "lam", "rho_d", "mu_d", "p_d")},
    }
    cfg.update(overrides or {})
    return cfg


def cmd_reach(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    if args.model:
        cfg["model"] = args.model
    if args.project:
        cfg["project"] = list(args.project)
    if args.csv:
        cfg["csv"] = args.csv
    output = args.output or cfg.get("output") or "reach.ndjson"
    return run_reach(cfg, output, args.oracle, cfg.get("model", "reach"))


def cmd_gene_network(args) -> int:
    if args.genes < 2:
        raise ConfigError("the gene network needs at least two genes")
    overrides = load_config(args.config) if args.config else {}
    if args.t_final is not None:
        overrides["t_f"] = args.t_final
    if args.project:
        overrides["project"] = list(args.project)
    if args.csv:
        overrides["csv"] = args.csv
    cfg = gene_network_config(args.genes, overrides)
    output = args.output or cfg.get("output") or f"gene_network_{args.genes}.ndjson"
    return _run(benchmarks.gene_network(args.genes), cfg, output, args.oracle, f"gene-network N={args.genes}")


def cmd_demo(args) -> int:
    records = demos.demo_records(args.selector)
    output = args.output or f"demo_{args.selector}.ndjson"
    with open(output, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(_dump(rec) + "\n")
    print(f"demo {args.selector}: {len(records)} records written to {output}")
    return EXIT_OK


def _read_records(path) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except FileNotFoundError as exc:
        raise ConfigError(f"reach output not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid record ({exc})") from exc


def cmd_simulate(args) -> int:
    """Check sampled trajectories against the hulls of an existing reach output."""
    records = _read_records(args.input)
    if not records or records[0].get("kind") != "header":
        raise ConfigError(f"{args.input}: missing header record")
    header = records[0]
    cfg = load_config(args.config) if args.config else {}
    if args.model:
        cfg["model"] = args.model
    if "model" not in cfg:
        raise ConfigError("simulate needs --model or a config with a model")
    model = resolve_model(cfg["model"], cfg.get("_base"))
    if model.n != header["n"] or model.m != header["m"]:
        raise ConfigError("model dimensions do not match the reach output")
    settings = _oracle_settings(cfg)
    if args.trajectories is not None:
        settings["trajectories"] = args.trajectories

    steps = [r for r in records if r.get("kind") == "interval"]
    hulls = [IntervalVector(r["hull"]["lo"], r["hull"]["hi"]) for r in steps]
    dt = float(header["config"]["dt"])
    X0 = from_interval(IntervalVector(header["x0"]["lo"], header["x0"]["hi"]))
    U = IntervalVector(header["u"]["lo"], header["u"]["hi"]) if model.m else None
    report = run_oracle(
        model, X0, U, hulls, dt,
        trajectories=int(settings["trajectories"]), seed=int(settings["seed"]),
        samples_per_step=int(settings["samples_per_step"]),
        rtol=float(settings["rtol"]), atol=float(settings["atol"]), tol=float(settings["tol"]),
    )
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(_dump({"kind": "diagnostic", "oracle": report.to_dict()}) + "\n")
    print(
        f"simulate: trajectories={report.trajectories} checks={report.checks} "
        f"violations={len(report.violations)} {'pass' if report.ok else 'FAIL'}"
    )
    return EXIT_OK if report.ok else EXIT_UNSOUND


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spzreach", description="Sparse polynomial zonotope reachability.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reach", help="run reachability analysis from a JSON config")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--model", help="model file or built-in model name (overrides config)")
    p.add_argument("--output", help="NDJSON output file")
    p.add_argument("--oracle", action="store_true", help="check simulated trajectories against the result")
    p.add_argument("--project", nargs=2, type=int, metavar=("I", "J"), help="state dimensions for polygons")
    p.add_argument("--csv", help="also write the projected polygons as CSV")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("gene-network", help="run the cyclic gene-network benchmark")
    p.add_argument("--genes", "-N", type=int, required=True, help="number of genes (n = 2N)")
    p.add_argument("--config", help="JSON overrides for the benchmark settings")
    p.add_argument("--t-final", type=float, help="time horizon")
    p.add_argument("--output", help="NDJSON output file")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--project", nargs=2, type=int, metavar=("I", "J"))
    p.add_argument("--csv", help="also write the projected polygons as CSV")
    p.set_defaults(func=cmd_gene_network)

    p = sub.add_parser("demo", help="write data for the set-operation examples")
    p.add_argument("selector", choices=demos.SELECTORS)
    p.add_argument("--output", help="NDJSON output file")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("simulate", help="check trajectories against an existing reach output")
    p.add_argument("--input", required=True, help="NDJSON file written by 'reach' or 'gene-network'")
    p.add_argument("--config", help="JSON config naming the model and oracle settings")
    p.add_argument("--model", help="model file or built-in model name")
    p.add_argument("--trajectories", type=int)
    p.add_argument("--output", help="write the oracle report as NDJSON")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ModelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FixedPointError, FlowError, FloatingPointError, IntervalDivisionError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
