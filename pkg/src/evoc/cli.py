"""Command line: ``evoc run | sweep | analyze | export``.

Every flag can also be given in a JSON file passed with ``--config`` (keys
are the flag names without dashes, underscores for inner dashes); flags on
the command line win.  The worker count for sweeps comes only from the
``EVOC_WORKERS`` environment variable.

Exit status: 0 on success, 2 on a usage error, 1 on a runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from . import io
from .actions import FitnessVariant
from .analysis import DiscountParams, build_landscape, global_optimum, npv, optima_ridge, time_to_threshold
from .sweep import GridSpec, default_axis
from .world import WorldConfig, run_simulation

DEFAULTS = {
    "seed": None,
    "n_agents": 1024,
    "width": 32,
    "height": 32,
    "iterations": 100,
    "variant": FitnessVariant.HEAD_STATIONARY_REWARD.value,
    "tau": 9.0,
    "r": 1.0,
    "bias_delta": 0.1,
    "format": "csv",
    # run
    "c": None,
    "p": None,
    # sweep
    "c_values": None,
    "p_values": None,
    "runs": 100,
    "desk": False,
    # analyze
    "piv_per_run": False,
    "out": None,
    "store": None,
    "ridge": None,
}


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_world_flags(sp):
    sp.add_argument("--seed", type=int, help="64-bit seed (required)")
    sp.add_argument("--n-agents", type=int, dest="n_agents")
    sp.add_argument("--width", type=int)
    sp.add_argument("--height", type=int)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--variant", choices=[v.value for v in FitnessVariant])
    sp.add_argument("--bias-delta", type=float, dest="bias_delta")
    sp.add_argument("--tau", type=float)


def _add_common(sp):
    sp.add_argument("--config", type=Path, help="JSON file of flag values")
    sp.add_argument("--format", choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evoc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one world and write its series")
    _add_common(run)
    _add_world_flags(run)
    run.add_argument("--c", type=float, help="fraction of creators")
    run.add_argument("--p", type=float, help="probability a creator invents")
    run.add_argument("--r", type=float, help="discount rate for the reported NPV")
    run.add_argument("--out", type=Path, help="series file (default series.csv)")

    sweep = sub.add_parser("sweep", help="run a (C, p) grid and build the landscape")
    _add_common(sweep)
    _add_world_flags(sweep)
    sweep.add_argument("--c-values", type=_float_list, dest="c_values")
    sweep.add_argument("--p-values", type=_float_list, dest="p_values")
    sweep.add_argument("--runs", type=int, help="runs per cell")
    sweep.add_argument("--desk", action="store_true", default=None, help="20 runs per cell")
    sweep.add_argument("--out", type=Path, help="output directory (default sweep/)")

    analyze = sub.add_parser("analyze", help="recompute the landscape from a sweep store")
    _add_common(analyze)
    analyze.add_argument("--store", type=Path, help="sweep store directory")
    analyze.add_argument("--tau", type=float)
    analyze.add_argument(
        "--piv-per-run", action="store_true", default=None, dest="piv_per_run"
    )
    analyze.add_argument("--out", type=Path, help="landscape file (default landscape.csv)")
    analyze.add_argument("--ridge", type=Path, help="ridge file (default: next to --out)")

    export = sub.add_parser("export", help="convert a series/landscape/ridge CSV")
    export.add_argument("input", type=Path)
    export.add_argument("--out", type=Path, required=True)
    export.add_argument("--format", choices=["csv", "json"], default="json")
    return parser


def _merge(args) -> dict:
    opts = dict(DEFAULTS)
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            data = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {cfg_path}: {exc}")
        unknown = set(data) - set(DEFAULTS) - {"config"}
        if unknown:
            raise UsageError(f"--config: unknown keys {sorted(unknown)}")
        opts.update(data)
    for k, v in vars(args).items():
        if v is not None:
            opts[k] = v
    return opts


def _world_config(o, c, p, seed) -> WorldConfig:
    for name, val in (("--c", c), ("--p", p)):
        if val is not None and not 0.0 <= val <= 1.0:
            raise UsageError(f"{name} must be in [0, 1], got {val}")
    if o["n_agents"] != o["width"] * o["height"]:
        raise UsageError(
            f"--n-agents {o['n_agents']} != --width x --height ({o['width']}x{o['height']})"
        )
    if o["iterations"] < 1:
        raise UsageError("--iterations must be positive")
    try:
        return WorldConfig(
            c=c if c is not None else 1.0,
            p=p if p is not None else 1.0,
            seed=seed if seed is not None else 0,
            n_agents=o["n_agents"],
            width=o["width"],
            height=o["height"],
            iterations=o["iterations"],
            variant=o["variant"],
            tau=o["tau"],
            bias_delta=o["bias_delta"],
        )
    except ValueError as exc:
        raise UsageError(str(exc))


def _require_seed(o):
    if o["seed"] is None:
        raise UsageError("--seed is required")
    if not 0 <= o["seed"] < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    return o["seed"]


def _emit_csv(path: Path, fmt: str, writer) -> None:
    """Call ``writer(csv_path)``; for JSON output convert the CSV afterwards."""
    if fmt == "csv":
        writer(path)
        return
    with tempfile.TemporaryDirectory() as tmp:
        tmp_csv = Path(tmp) / "out.csv"
        writer(tmp_csv)
        io.csv_to_json(tmp_csv, path)


def cmd_run(o, out=None) -> int:
    out = out or sys.stdout
    seed = _require_seed(o)
    for name in ("c", "p"):
        if o[name] is None:
            raise UsageError(f"--{name} is required")
    if not 0.0 < o["r"] <= 1.0:
        raise UsageError(f"--r must be in (0, 1], got {o['r']}")
    cfg = _world_config(o, o["c"], o["p"], seed)
    series = run_simulation(cfg)
    path = Path(o["out"] or "series.csv")
    _emit_csv(path, o["format"], lambda tmp: io.write_run_series(tmp, series, cfg.c, cfg.p))
    tt = time_to_threshold(series.mean_fitness, cfg.tau)
    print(f"final_mean_fitness {io.fmt(series.mean_fitness[-1])}", file=out)
    print(f"ttt {tt.value if not tt.censored else f'censored (bound {tt.bound})'}", file=out)
    print(f"npv {io.fmt(npv(series.mean_fitness, o['r']))}", file=out)
    return 0


def _write_analysis(result, params, landscape_path, ridge_path, fmt, piv_per_run=False, out=None):
    out = out or sys.stdout
    landscape = build_landscape(result.series_by_cell(), params, piv_per_run=piv_per_run)
    _emit_csv(landscape_path, fmt, lambda path: io.write_landscape(path, landscape))
    rows = []
    rectangular = len(landscape) == len({pt.c for pt in landscape}) * len({pt.p for pt in landscape})
    if rectangular:
        for valuation in ("ttt", "piv"):
            for axis in ("c", "p"):
                for fixed, opt in optima_ridge(landscape, axis=axis, valuation=valuation):
                    rows.append((axis, fixed, opt, valuation))
        for valuation in ("ttt", "piv"):
            c, p = global_optimum(landscape, valuation)
            print(f"global_optimum_{valuation} C={c} p={p}", file=out)
    _emit_csv(ridge_path, fmt, lambda path: io.write_ridge(path, rows))
    censored = sum(pt.fully_censored for pt in landscape)
    print(f"cells {len(landscape)} fully_censored {censored}", file=out)
    return landscape


def cmd_sweep(o, out=None) -> int:
    out = out or sys.stdout
    seed = _require_seed(o)
    runs = 20 if o["desk"] else o["runs"]
    if runs < 1:
        raise UsageError("--runs must be positive")
    base = _world_config(o, None, None, None)
    try:
        spec = GridSpec(
            c_values=tuple(o["c_values"] or default_axis()),
            p_values=tuple(o["p_values"] or default_axis()),
            runs_per_cell=runs,
            base_config=base,
            master_seed=seed,
        )
    except ValueError as exc:
        raise UsageError(f"--c-values/--p-values: {exc}")
    outdir = Path(o["out"] or "sweep")
    store = outdir / "store"
    io.sweep_to_store(spec, store)
    result = io.read_store(store)
    ext = o["format"]
    _write_analysis(
        result,
        DiscountParams(tau=o["tau"], periods=base.iterations),
        outdir / f"landscape.{ext}",
        outdir / f"ridge.{ext}",
        ext,
        out=out,
    )
    print(f"store {store}", file=out)
    return 0


def cmd_analyze(o, out=None) -> int:
    out = out or sys.stdout
    if o["store"] is None:
        raise UsageError("--store is required")
    try:
        result = io.read_store(o["store"])
    except FileNotFoundError as exc:
        raise UsageError(f"--store: {exc}")
    landscape_path = Path(o["out"] or "landscape.csv")
    ridge_path = o["ridge"] or landscape_path.with_name(
        landscape_path.stem + "_ridge" + landscape_path.suffix
    )
    _write_analysis(
        result,
        DiscountParams(tau=o["tau"], periods=result.spec.base_config.iterations),
        landscape_path,
        Path(ridge_path),
        o["format"],
        piv_per_run=bool(o["piv_per_run"]),
        out=out,
    )
    return 0


def cmd_export(args, out=None) -> int:
    out = out or sys.stdout
    if not args.input.exists():
        raise UsageError(f"input {args.input} does not exist")
    if args.format == "json":
        io.csv_to_json(args.input, args.out)
    else:
        with io.atomic_writer(args.out) as fh:
            fh.write(args.input.read_text())
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "export":
            return cmd_export(args)
        o = _merge(args)
        return {"run": cmd_run, "sweep": cmd_sweep, "analyze": cmd_analyze}[args.command](o)
    except UsageError as exc:
        parser.error(str(exc))
    except KeyError as exc:
        # missing baseline cell
        print(f"evoc: error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"evoc: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
