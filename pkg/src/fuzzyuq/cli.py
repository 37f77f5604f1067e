"""Command-line entry point.

    fuzzyuq example1 [--interaction both] [--out DIR]
    fuzzyuq example2 [--map fibers.pgm | --moments moments.json]
    fuzzyuq extend --input a.csv b.csv --expr "z1 * z2"
    fuzzyuq fit --input values.csv --column b
    fuzzyuq ingest --map fibers.pgm | --synthesize
    fuzzyuq kl-info

Settings come from the built-in defaults, then an optional JSON file given
with --config, then the flags. Exit codes: 0 success, 2 usage or
configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io
from .core import DEFAULT_LEVELS, from_alpha_cuts
from .data import DegenerateSpread, PackingFailure, fit_membership, harmonic_coarsen, station_moments, synthesize_fiber_map
from .extension import EvaluationError, extend
from .interaction import FuzzyVector, Interaction
from .random_field import CovarianceSpec, kl_decompose, kl_truncation_order, midpoint_grid
from .solver import Example1Coefficient, NonPositiveCoefficient, SolveConfig, example1_mean_oracle
from .studies import (
    Example1Config,
    Example2Config,
    config_dict,
    example1_draws,
    moments_from_map,
    run_example1,
    run_example2,
)
from .translation import Infeasible

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

# flag name -> config field
FLAG_FIELDS = {"seed": "seed", "alphas": "levels", "ms": "n_samples", "mf": "n_points", "nh": "cells", "workers": "workers"}
MODE_DIRS = {Interaction.NON_INTERACTIVE: "non_interactive", Interaction.FULLY_INTERACTIVE: "fully_interactive"}
MOMENT_NAMES = ("mean", "std", "skewness", "kurtosis")


class ConfigError(ValueError):
    pass


def _parse_levels(text) -> tuple[float, ...]:
    if isinstance(text, str):
        try:
            vals = [float(t) for t in text.split(",") if t.strip()]
        except ValueError as exc:
            raise ConfigError(f"cannot parse alpha levels {text!r}") from exc
    else:
        vals = [float(t) for t in text]
    lv = np.asarray(vals)
    if lv.size < 2 or lv[0] != 0.0 or lv[-1] != 1.0 or np.any(np.diff(lv) <= 0):
        raise ConfigError("alpha levels must be strictly ascending from 0 to 1")
    return tuple(vals)


def _read_config_file(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _resolve(cls, args, extra_keys=()) -> tuple[object, dict]:
    """Build a study config from defaults, the --config file and the flags.

    Returns the config and the leftover file keys named in ``extra_keys``.
    """
    names = {f.name for f in fields(cls)} - {"moments"}
    values, extra = {}, {}
    for key, val in _read_config_file(args.config).items():
        name = FLAG_FIELDS.get(key, key)
        if name in names:
            values[name] = val
        elif key in extra_keys:
            extra[key] = val
        else:
            raise ConfigError(f"unknown config key {key!r}")
    for flag, name in FLAG_FIELDS.items():
        val = getattr(args, flag, None)
        if val is not None:
            values[name] = val
    if "levels" in values:
        values["levels"] = _parse_levels(values["levels"])
    for k, v in values.items():
        if isinstance(v, list):
            values[k] = tuple(v)
    try:
        cfg = cls(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    _check_numbers(cfg)
    return cfg, extra


def _check_numbers(cfg) -> None:
    positive = {"n_samples": 1, "n_points": 2, "cells": 1, "workers": 1, "box_resolution": 2, "bins": 1}
    for name, low in positive.items():
        val = getattr(cfg, name, None)
        if val is not None and (not isinstance(val, (int, np.integer)) or val < low):
            raise ConfigError(f"{name} must be an integer >= {low}, got {val!r}")
    if getattr(cfg, "length", 1.0) <= 0:
        raise ConfigError("length must be positive")


def _modes(args, extra) -> list[Interaction]:
    choice = args.interaction or extra.get("interaction") or "both"
    if choice == "both":
        return [Interaction.NON_INTERACTIVE, Interaction.FULLY_INTERACTIVE]
    try:
        return [Interaction(choice)]
    except ValueError as exc:
        raise ConfigError(f"interaction must be one of non, full, both; got {choice!r}") from exc


def _out_dir(args, extra) -> Path:
    out = Path(args.out or extra.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report(path: Path, command: str, cfg: dict, seed, timings: dict, **more) -> None:
    from . import __version__

    io.dump_json(path, {"command": command, "version": __version__, "seed": seed, "config": cfg, "timings": timings, **more})


def cmd_example1(args) -> int:
    cfg, extra = _resolve(Example1Config, args, ("interaction", "out"))
    modes = _modes(args, extra)
    out = _out_dir(args, extra)
    timings, checks = {}, {}
    coef = Example1Coefficient(cfg.length)
    ys = example1_draws(cfg)
    z_modal = (cfg.z1[1], cfg.z2[1])
    summand = coef.displacement([cfg.length], ys, z_modal, SolveConfig(cfg.length, cfg.cells))[:, 0]
    tol = 3.0 * float(summand.std(ddof=1)) / math.sqrt(cfg.n_samples)
    oracle = example1_mean_oracle(cfg.length, z_modal)
    for mode in modes:
        t0 = time.perf_counter()
        res = run_example1(cfg, (mode,))[mode]
        timings[MODE_DIRS[mode]] = time.perf_counter() - t0
        sub = out / MODE_DIRS[mode]
        sub.mkdir(exist_ok=True)
        io.write_cut_table(sub / "q1_membership.csv", res.q1)
        io.write_field(sub / "q2_field.csv", cfg.q2_x, res.q2)
        io.write_pbox(sub / "q3_pbox.csv", res.q3)
        core = res.q1.core
        checks[MODE_DIRS[mode]] = {
            "q1_modal_cut": [core.lo, core.hi],
            "q1_oracle": oracle,
            "mc_tolerance": tol,
            "brackets_oracle": bool(core.lo - tol <= oracle <= core.hi + tol),
        }
    _report(out / "run_report.json", "example1", config_dict(cfg), cfg.seed, timings, q1_check=checks)
    for name, c in checks.items():
        print(f"{name}: Q1 modal cut [{c['q1_modal_cut'][0]:.6f}, {c['q1_modal_cut'][1]:.6f}], "
              f"oracle {oracle:.6f} +/- {tol:.2g}")
    return EXIT_OK


def _load_moments(path) -> list:
    try:
        data = json.loads(Path(path).read_text())
        return [from_alpha_cuts(d["levels"], d["cuts"]) for d in data["moments"]]
    except (OSError, KeyError, TypeError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"cannot read moment fixtures from {path}: {exc}") from exc


def _load_map(path):
    try:
        return io.read_pgm(path)
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read fiber map {path}: {exc}") from exc


def cmd_example2(args) -> int:
    cfg, extra = _resolve(Example2Config, args, ("out", "map", "moments"))
    if args.u_cr is not None:
        cfg.u_cr = args.u_cr
    map_path = args.map or extra.get("map")
    moments_path = args.moments or extra.get("moments")
    if map_path and moments_path:
        raise ConfigError("give either a fiber map or moment fixtures, not both")
    out = _out_dir(args, extra)
    source = "reference fixtures"
    t0 = time.perf_counter()
    if map_path:
        cfg.moments = moments_from_map(_load_map(map_path), cfg.bins)
        source = f"map {map_path}"
    elif moments_path:
        cfg.moments = _load_moments(moments_path)
        source = f"moments {moments_path}"
    t_ingest = time.perf_counter() - t0
    res = run_example2(cfg)
    io.write_field(out / "q4_field.csv", cfg.q4_x, res.q4)
    io.write_pbox(out / "q5_pbox.csv", res.q5)
    io.write_cut_table(out / "q6_membership.csv", res.q6)
    timings = {"ingest_s": t_ingest, **res.timings}
    _report(
        out / "run_report.json",
        "example2",
        config_dict(cfg),
        cfg.seed,
        timings,
        moment_source=source,
        moments=[fv.to_dict() for fv in (cfg.moments or [])],
        kl_terms=res.kl_terms,
        retained_variance=res.retained_variance,
    )
    print(f"KL terms {res.kl_terms} (retained variance {res.retained_variance:.4f})")
    print(f"Q6 zero-cut [{res.q6.support.lo:.4f}, {res.q6.support.hi:.4f}], "
          f"one-cut [{res.q6.core.lo:.4f}, {res.q6.core.hi:.4f}]")
    return EXIT_OK


class _Expression:
    """Map z -> value from an arithmetic expression in z1, z2, ... and numpy functions."""

    names = {k: getattr(np, k) for k in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "minimum", "maximum", "pi")}

    def __init__(self, text: str, dim: int):
        self.text, self.dim = text, dim
        try:
            self.code = compile(text, "<expr>", "eval")
        except SyntaxError as exc:
            raise ConfigError(f"invalid expression {text!r}: {exc.msg}") from exc
        unknown = set(self.code.co_names) - set(self.names) - {f"z{i + 1}" for i in range(dim)}
        if unknown:
            raise ConfigError(f"unknown names in expression: {', '.join(sorted(unknown))}")

    def __call__(self, z):
        scope = dict(self.names, **{f"z{i + 1}": float(v) for i, v in enumerate(z)})
        return float(eval(self.code, {"__builtins__": {}}, scope))


def _read_tables(paths) -> list:
    tables = []
    for p in paths:
        try:
            tables.append(io.read_cut_table(p))
        except (OSError, ValueError, IndexError) as exc:
            raise ConfigError(f"cannot read cut table {p}: {exc}") from exc
    return tables


def cmd_extend(args) -> int:
    extra = _read_config_file(args.config)
    comps = _read_tables(args.input)
    expr = _Expression(args.expr or extra.get("expr") or "z1", len(comps))
    out = _out_dir(args, extra)
    levels = _parse_levels(args.alphas) if args.alphas else None
    for mode in _modes(args, {"interaction": extra.get("interaction", "non")}):
        fvec = FuzzyVector(comps, mode)
        result = extend(expr, fvec, levels, resolution=args.resolution, refine=args.refine, workers=args.workers or 1)
        path = out / f"extend_{MODE_DIRS[mode]}.csv"
        io.write_cut_table(path, result)
        print(f"{MODE_DIRS[mode]}: wrote {path}")
        for a, lo, hi in zip(result.levels, result.lower, result.upper):
            print(f"  alpha={a:g}: [{float(lo)!r}, {float(hi)!r}]")
    return EXIT_OK


def _read_column(path, column) -> np.ndarray:
    try:
        _, header, rows = io.read_csv(path)
    except (OSError, IndexError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if column is None:
        if len(header) != 1:
            raise ConfigError(f"{path} has {len(header)} columns; choose one with --column")
        idx = 0
    elif column in header:
        idx = header.index(column)
    else:
        raise ConfigError(f"column {column!r} not in {header}")
    try:
        return np.array([float(r[idx]) for r in rows if r])
    except ValueError as exc:
        raise ConfigError(f"non-numeric value in column {header[idx]!r}") from exc


def cmd_fit(args) -> int:
    extra = _read_config_file(args.config)
    values = _read_column(args.input, args.column)
    if values.size == 0:
        raise ConfigError("no values to fit")
    levels = _parse_levels(args.alphas) if args.alphas else DEFAULT_LEVELS
    try:
        fv = fit_membership(values, args.bins, levels)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _out_dir(args, extra)
    io.write_cut_table(out / "fit_membership.csv", fv)
    print(("crisp " if fv.is_crisp else "") + repr(fv))
    return EXIT_OK


def cmd_ingest(args) -> int:
    extra = _read_config_file(args.config)
    out = _out_dir(args, extra)
    if args.map:
        pixmap = _load_map(args.map)
    elif args.synthesize:
        seed = 0 if args.seed is None else args.seed
        pixmap = synthesize_fiber_map(seed, args.width, args.height, args.fraction)
        io.write_pgm(out / "fiber_map.pgm", pixmap)
    else:
        raise ConfigError("ingest needs --map FILE or --synthesize")
    levels = _parse_levels(args.alphas) if args.alphas else DEFAULT_LEVELS
    try:
        ensemble = harmonic_coarsen(pixmap, args.element_px)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    mom = station_moments(ensemble)
    io.write_ensemble(out / "ensemble.csv", ensemble)
    io.write_csv(out / "station_moments.csv", "station-moments", ["x", *MOMENT_NAMES],
                 np.column_stack([ensemble.stations, mom]).tolist())
    fitted = [fit_membership(mom[:, j], args.bins, levels) for j in range(4)]
    io.dump_json(out / "moments.json", {"names": list(MOMENT_NAMES), "moments": [fv.to_dict() for fv in fitted]})
    print(f"volume fraction {pixmap.volume_fraction:.4f}, {ensemble.bars} bars x {ensemble.values.shape[1]} stations")
    for name, fv in zip(MOMENT_NAMES, fitted):
        print(f"  {name}: {fv!r}")
    return EXIT_OK


def cmd_kl_info(args) -> int:
    extra = _read_config_file(args.config)
    cells = args.nh or extra.get("nh", 170)
    length = args.length or extra.get("length", 1700.0)
    if cells < 2 or length <= 0:
        raise ConfigError("kl-info needs at least 2 cells and a positive length")
    try:
        spec = CovarianceSpec(args.exponent, args.correlation_length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t0 = time.perf_counter()
    kl = kl_decompose(midpoint_grid(length, cells), spec)
    m = kl_truncation_order(kl, args.fraction)
    elapsed = time.perf_counter() - t0
    total = float(kl.eigenvalues.sum())
    print(f"m={m}")
    print(f"retained_variance={kl.eigenvalues[:m].sum() / total:.6f}")
    print(f"eigenvalue_sum={total!r} trace={kl.trace!r}")
    print(f"seconds={elapsed:.3f}")
    if args.out:
        out = _out_dir(args, extra)
        io.write_eigenpairs(out / "eigenpairs.csv", kl, m)
    return EXIT_OK


def _common(p: argparse.ArgumentParser, study: bool = True, interaction: bool = True) -> None:
    p.add_argument("--config", help="JSON file with settings; flags override it")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--alphas", help="comma-separated alpha levels, from 0 to 1")
    p.add_argument("--workers", type=int, help="worker processes for the fuzzy points")
    if study:
        p.add_argument("--ms", type=int, help="Monte Carlo sample count")
        p.add_argument("--mf", type=int, help="points per interactive joint cut")
        p.add_argument("--nh", type=int, help="quadrature cells")
    if interaction:
        p.add_argument("--interaction", choices=["non", "full", "both"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzyuq", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example1", help="lognormal coefficient with fuzzy mean and spread")
    _common(p)
    p.set_defaults(func=cmd_example1)

    p = sub.add_parser("example2", help="fiber composite with fuzzy compliance moments")
    _common(p, interaction=False)
    p.add_argument("--map", help="binary PGM fiber map to derive the moments from")
    p.add_argument("--moments", help="moments.json written by the ingest command")
    p.add_argument("--u-cr", dest="u_cr", type=float, help="critical displacement in metres")
    p.set_defaults(func=cmd_example2)

    p = sub.add_parser("extend", help="fuzzy image of cut tables under an expression")
    _common(p, study=False)
    p.add_argument("--input", nargs="+", required=True, help="cut-table CSV files, one per variable")
    p.add_argument("--expr", help="expression in z1, z2, ... (default z1)")
    p.add_argument("--resolution", type=int, default=41)
    p.add_argument("--refine", action="store_true", help="polish extrema with a local search")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("fit", help="membership function from a column of values")
    _common(p, study=False)
    p.add_argument("--input", required=True)
    p.add_argument("--column")
    p.add_argument("--bins", type=int, default=20)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("ingest", help="fiber map to compliance moments and fitted memberships")
    _common(p, study=False)
    p.add_argument("--map")
    p.add_argument("--synthesize", action="store_true", help="generate a random fiber map")
    p.add_argument("--fraction", type=float, default=0.63)
    p.add_argument("--width", type=int, default=1700)
    p.add_argument("--height", type=int, default=500)
    p.add_argument("--element-px", dest="element_px", type=int, default=10)
    p.add_argument("--bins", type=int, default=20)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("kl-info", help="KL truncation order for a covariance on a midpoint grid")
    p.add_argument("--config")
    p.add_argument("--out", help="also write the retained eigenpairs here")
    p.add_argument("--nh", type=int, help="grid cells (default 170)")
    p.add_argument("--length", type=float, help="domain length in micrometres (default 1700)")
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--correlation-length", dest="correlation_length", type=float, default=20.0)
    p.add_argument("--fraction", type=float, default=0.9)
    p.set_defaults(func=cmd_kl_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, Infeasible, NonPositiveCoefficient, PackingFailure, DegenerateSpread,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # remaining precondition failures come from the settings
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
