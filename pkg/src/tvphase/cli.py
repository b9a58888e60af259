"""Command line interface.

Subcommands: bound, table1, phi, gen, classify, solve, statdim, phase,
pattern-phase.  Exit codes: 0 success, 2 validation error, 3 solver
failure, 64 usage error.

Option values resolve as: command-line flag, then JSON config file
(--config, keys mirror the long flag names with dashes as underscores),
then built-in default.  The master seed additionally honors the
TVPHASE_SEED environment variable ahead of everything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .bounds import (
    failure_probability_bound,
    minimize_psi,
    phi1,
    phi2,
    reference_bounds,
)
from .errors import SolverFailure, ValidationError
from .experiment import (
    PhaseGridConfig,
    crossing_estimate,
    pattern_experiment,
    run_grid,
    write_cells_csv,
)
from .manifest import RunManifest
from .patterns import (
    VariationPattern,
    classify,
    generate_pattern_signal,
    generate_random_support_signal,
    pattern_from_json,
    read_signal_csv,
    write_signal_csv,
)
from .statdim import (
    SubdiffSpec,
    bu_curve,
    default_t_grid,
    estimate_statdim,
)
from .tvsolve import SolveStatus, SolverOptions, TvProblem, solve_tv

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    """argparse that exits 64 on usage errors instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return obj


def _opt(args, config, key, default=None):
    """flag > config > default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in config:
        return config[key]
    return default


def _require(args, config, key, what):
    val = _opt(args, config, key)
    if val is None:
        raise ValidationError(f"missing required option: {what}")
    return val


def _resolve_seed(args, config):
    env = os.environ.get("TVPHASE_SEED")
    if env is not None and env.strip() != "":
        try:
            seed = int(env)
        except ValueError:
            raise ValidationError(f"TVPHASE_SEED must be an integer, got {env!r}")
    else:
        seed = int(_opt(args, config, "seed", 0))
    if seed < 0:
        raise ValidationError(f"seed must be >= 0, got {seed}")
    return seed


def _parse_int_values(text):
    """'4,10,20' or 'lo:hi:step' (hi inclusive)."""
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi, step = (int(p) for p in text.split(":"))
            if step < 1 or hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1, step))
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ValidationError(
            f"cannot parse integer list {text!r}; use 'a,b,c' or 'lo:hi:step'"
        )


def _parse_float_grid(text):
    """'0,0.5,1' or 'lo:hi:step' (hi inclusive up to rounding)."""
    text = str(text).strip()
    try:
        if ":" in text:
            lo, hi, step = (float(p) for p in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(round((hi - lo) / step)) + 1
            return lo + step * np.arange(count)
        return np.asarray([float(p) for p in text.split(",")])
    except ValueError:
        raise ValidationError(
            f"cannot parse grid {text!r}; use 'a,b,c' or 'lo:hi:step'"
        )


def _pattern_arg(source):
    """Pattern from inline JSON or from a path to a JSON file."""
    text = str(source).strip()
    if not text.startswith("{") and os.path.exists(text):
        with open(text, "r", encoding="utf-8") as fh:
            text = fh.read()
    return pattern_from_json(text)


def _read_vector(path):
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            cell = line.strip()
            if not cell:
                continue
            try:
                values.append(float(cell))
            except ValueError:
                if lineno == 0:
                    continue
                raise ValidationError(f"{path}: line {lineno + 1} is not a number")
    if not values:
        raise ValidationError(f"{path}: no numeric rows")
    return np.asarray(values)


def _read_matrix(path):
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            cells = text.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError:
                if lineno == 0:
                    continue
                raise ValidationError(f"{path}: line {lineno + 1} is not numeric")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValidationError(f"{path}: ragged row at line {lineno + 1}")
            rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: no numeric rows")
    return np.asarray(rows)


def _print_json(obj):
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _write_json(obj, directory, name):
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")
    return path


def _start_manifest(args, config, command, cfg, seed):
    """Manifest + hash when files will be written, else (None, '')."""
    out_dir = _opt(args, config, "out")
    if not out_dir:
        return None, "", None
    manifest = RunManifest(command=command, config=cfg, master_seed=seed)
    os.makedirs(out_dir, exist_ok=True)
    return manifest, manifest.hash, out_dir


# ---------------------------------------------------------------- commands

def _cmd_bound(args, config):
    pattern = VariationPattern(
        n=int(_require(args, config, "n", "--n")),
        s1_plus=int(_opt(args, config, "s1p", 0)),
        s1_minus=int(_opt(args, config, "s1m", 0)),
        s2=int(_opt(args, config, "s2", 0)),
        s3=int(_opt(args, config, "s3", 0)),
    )
    result = minimize_psi(pattern)
    record = result.to_json_dict()
    m = _opt(args, config, "m")
    if m is not None:
        record["m"] = float(m)
        record["failure_probability_lower_bound"] = failure_probability_bound(
            float(m), result.m_hat
        )
    manifest, mhash, out_dir = _start_manifest(
        args, config, "bound", pattern.to_json_dict(), None
    )
    if out_dir:
        record["manifest_hash"] = mhash
        _write_json(record, out_dir, "bound.json")
        manifest.write(out_dir)
    _print_json(record)
    return 0


def _table_rows():
    for res in reference_bounds():
        p = res.pattern
        yield {
            "n": p.n,
            "s": p.support_size,
            "s1_plus": p.s1_plus,
            "s1_minus": p.s1_minus,
            "s2": p.s2,
            "s3": p.s3,
            "m_hat": res.m_hat,
            "t_star": "" if res.at_infinity else repr(res.t_star),
            "at_infinity": "true" if res.at_infinity else "false",
        }


def _cmd_table1(args, config):
    manifest, mhash, out_dir = _start_manifest(args, config, "table1", {}, None)
    cols = ["n", "s", "s1_plus", "s1_minus", "s2", "s3", "m_hat", "t_star", "at_infinity"]
    header = cols + (["manifest_hash"] if mhash else [])
    lines = [",".join(header)]
    for row in _table_rows():
        cells = [repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols]
        if mhash:
            cells.append(mhash)
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if out_dir:
        with open(os.path.join(out_dir, "table1.csv"), "w", encoding="utf-8") as fh:
            fh.write(text)
        manifest.write(out_dir)
    sys.stdout.write(text)
    return 0


def _cmd_phi(args, config):
    t = float(_require(args, config, "t", "--t"))
    a = _opt(args, config, "a")
    b = _opt(args, config, "b")
    a = t if a is None else float(a)
    b = t if b is None else float(b)
    _print_json(
        {
            "t": t,
            "a": a,
            "b": b,
            "phi1": phi1(a, b),
            "phi2_t": phi2(t),
            "phi2_2t": phi2(2.0 * t),
        }
    )
    return 0


def _cmd_gen(args, config):
    seed = _resolve_seed(args, config)
    rng = np.random.default_rng(seed)
    pattern_src = _opt(args, config, "pattern_json")
    n = _opt(args, config, "n")
    s = _opt(args, config, "s")
    if pattern_src is not None:
        pattern = _pattern_arg(pattern_src)
        signal = generate_pattern_signal(pattern, rng)
    elif n is not None and s is not None:
        signal = generate_random_support_signal(int(n), int(s), rng)
    else:
        raise ValidationError("gen needs either --pattern-json or both --n and --s")
    cls = classify(signal)
    record = {
        "n": signal.n,
        "s": len(cls.support),
        "seed": seed,
        "pattern": cls.pattern.to_json_dict(),
        "support": list(cls.support),
        "signs": list(cls.signs),
    }
    manifest, mhash, out_dir = _start_manifest(args, config, "gen", record, seed)
    if out_dir:
        write_signal_csv(signal, os.path.join(out_dir, "signal.csv"))
        record["manifest_hash"] = mhash
        record["signal_csv"] = "signal.csv"
        _write_json(record, out_dir, "gen.json")
        manifest.write(out_dir)
        _print_json(record)
    else:
        sys.stdout.write("value\n")
        for v in signal.values:
            sys.stdout.write(f"{float(v)!r}\n")
    return 0


def _cmd_classify(args, config):
    path = _require(args, config, "signal", "--signal")
    cls = classify(read_signal_csv(path))
    p = cls.pattern
    _print_json(
        {
            "n": cls.n,
            "s": len(cls.support),
            "s1_plus": p.s1_plus,
            "s1_minus": p.s1_minus,
            "s2": p.s2,
            "s3": p.s3,
            "support": list(cls.support),
            "signs": list(cls.signs),
            "sets": {
                "s1_plus": sorted(cls.s1_plus_set),
                "s1_minus": sorted(cls.s1_minus_set),
                "s2": sorted(cls.s2_set),
                "s2_prime": sorted(cls.s2_prime_set),
                "s3": sorted(cls.s3_set),
                "s4": sorted(cls.s4_set),
            },
        }
    )
    return 0


def _cmd_solve(args, config):
    matrix_path = _require(args, config, "matrix", "--matrix")
    rhs_path = _require(args, config, "rhs", "--rhs")
    A = _read_matrix(matrix_path)
    y = _read_vector(rhs_path)
    options = SolverOptions(
        feas_tol=float(_opt(args, config, "feas_tol", 1e-9)),
        gap_tol=float(_opt(args, config, "gap_tol", 1e-9)),
    )
    sol = solve_tv(TvProblem(A, y), options)
    record = {
        "status": sol.status.value,
        "objective": sol.objective,
        "feas_residual": sol.feas_residual,
        "gap": sol.gap,
        "message": sol.message,
        "m": int(A.shape[0]),
        "n": int(A.shape[1]),
    }
    cfg = {"matrix": str(matrix_path), "rhs": str(rhs_path)}
    manifest, mhash, out_dir = _start_manifest(args, config, "solve", cfg, None)
    if out_dir:
        write_signal_csv(sol.x_hat, os.path.join(out_dir, "x_hat.csv"))
        record["manifest_hash"] = mhash
        record["x_csv"] = "x_hat.csv"
        _write_json(record, out_dir, "solve.json")
        manifest.write(out_dir)
    else:
        record["x_hat"] = [float(v) for v in sol.x_hat]
    _print_json(record)
    return 0 if sol.status is SolveStatus.OPTIMAL else 3


def _cmd_statdim(args, config):
    seed = _resolve_seed(args, config)
    rng = np.random.default_rng(seed)
    pattern_src = _opt(args, config, "pattern_json")
    n = _opt(args, config, "n")
    s = _opt(args, config, "s")
    if pattern_src is not None:
        pattern = _pattern_arg(pattern_src)
        spec = SubdiffSpec.from_pattern(pattern, rng)
    elif n is not None and s is not None:
        signal = generate_random_support_signal(int(n), int(s), rng)
        spec = SubdiffSpec.from_signal(signal)
        pattern = classify(signal).pattern
    else:
        raise ValidationError("statdim needs either --pattern-json or both --n and --s")

    trials = int(_opt(args, config, "trials", 1000))
    curve_trials = int(_opt(args, config, "curve_trials", 200))
    grid_text = _opt(args, config, "t_grid")
    t_grid = default_t_grid() if grid_text is None else _parse_float_grid(grid_text)

    est = estimate_statdim(spec, trials, rng)
    curve = bu_curve(spec, t_grid, curve_trials, rng)
    best = min(curve, key=lambda p: p.mean)
    record = {
        "n": spec.n,
        "pattern": pattern.to_json_dict(),
        "support": list(spec.support),
        "signs": list(spec.signs),
        "seed": seed,
        "m_hat": minimize_psi(pattern).m_hat,
        "delta_hat": est.value,
        "delta_halfwidth": est.halfwidth,
        "trials": est.trials,
        "flagged": est.flagged,
        "bu_hat": best.mean,
        "bu_t": best.t,
        "bu_halfwidth": best.halfwidth,
        "curve_trials": curve_trials,
        "curve_flagged": curve[0].flagged,
    }
    cfg = {"pattern": pattern.to_json_dict(), "trials": trials, "curve_trials": curve_trials}
    manifest, mhash, out_dir = _start_manifest(args, config, "statdim", cfg, seed)
    if out_dir:
        record["manifest_hash"] = mhash
        record["curve_csv"] = "statdim_curve.csv"
        with open(os.path.join(out_dir, "statdim_curve.csv"), "w", encoding="utf-8") as fh:
            fh.write("t,mean,halfwidth,trials,flagged,manifest_hash\n")
            for p in curve:
                fh.write(
                    f"{p.t!r},{p.mean!r},{p.halfwidth!r},{p.trials},{p.flagged},{mhash}\n"
                )
        _write_json(record, out_dir, "statdim.json")
        manifest.write(out_dir)
    _print_json(record)
    return 0


def _grid_crossings(cells, s_values, level, seed):
    out = {}
    for s in s_values:
        rows = sorted((c for c in cells if c.s == s), key=lambda c: c.m)
        est = crossing_estimate(
            [c.m for c in rows],
            [c.successes for c in rows],
            [c.trials for c in rows],
            level=level,
            seed=seed,
        )
        out[str(s)] = {
            "m_cross": est.m_cross,
            "std": None if est.std != est.std else est.std,  # NaN -> null
            "valid_boot": est.valid_boot,
            "n_boot": est.n_boot,
        }
    return out


def _cmd_phase(args, config):
    seed = _resolve_seed(args, config)
    cfg = PhaseGridConfig(
        n=int(_require(args, config, "n", "--n")),
        s_values=_parse_int_values(_require(args, config, "s_values", "--s-values")),
        m_values=_parse_int_values(_require(args, config, "m_values", "--m-values")),
        trials_per_cell=int(_opt(args, config, "trials", 50)),
        master_seed=seed,
        bound_draws=int(_opt(args, config, "bound_draws", 300)),
    )
    workers = int(_opt(args, config, "workers", 1))
    out_dir = _require(args, config, "out", "--out")
    manifest = RunManifest(
        command="phase",
        config={
            "n": cfg.n,
            "s_values": list(cfg.s_values),
            "m_values": list(cfg.m_values),
            "trials_per_cell": cfg.trials_per_cell,
            "bound_draws": cfg.bound_draws,
        },
        master_seed=seed,
    )
    os.makedirs(out_dir, exist_ok=True)

    def progress(cell):
        print(
            f"cell s={cell.s} m={cell.m}: {cell.successes}/{cell.trials} recovered"
            f" ({cell.wall_ms:.0f} ms)",
            file=sys.stderr,
        )

    result = run_grid(
        cfg,
        out_dir=out_dir,
        workers=workers,
        resume=bool(getattr(args, "resume", False)),
        progress=progress,
        manifest_hash=manifest.hash,
    )
    summary = {
        "manifest_hash": manifest.hash,
        "cells_csv": "cells.csv",
        "bounds_csv": "bounds.csv",
        "cells": len(result.cells),
        "crossings": _grid_crossings(result.cells, cfg.s_values, 0.5, seed),
        "bounds": [
            {
                "s": b.s,
                "mean_m_hat": b.mean_m_hat,
                "std_m_hat": b.std_m_hat,
                "cai_lower": b.cai_lower_raw,
                "cai_clamped": b.cai_clamped,
            }
            for b in result.bounds
        ],
    }
    _write_json(summary, out_dir, "summary.json")
    manifest.write(out_dir)
    _print_json(summary)
    return 0


def _cmd_pattern_phase(args, config):
    seed = _resolve_seed(args, config)
    pattern = _pattern_arg(_require(args, config, "pattern_json", "--pattern-json"))
    m_values = _parse_int_values(_require(args, config, "m_values", "--m-values"))
    trials = int(_opt(args, config, "trials", 50))
    workers = int(_opt(args, config, "workers", 1))
    cells = pattern_experiment(pattern, m_values, trials, seed, workers=workers)
    est = crossing_estimate(
        [c.m for c in cells],
        [c.successes for c in cells],
        [c.trials for c in cells],
        seed=seed,
    )
    record = {
        "pattern": pattern.to_json_dict(),
        "m_hat": minimize_psi(pattern).m_hat,
        "trials": trials,
        "seed": seed,
        "m_cross": est.m_cross,
        "m_cross_std": None if est.std != est.std else est.std,
        "cells": [c.to_dict() for c in cells],
    }
    cfg = {"pattern": pattern.to_json_dict(), "m_values": list(m_values), "trials": trials}
    manifest, mhash, out_dir = _start_manifest(args, config, "pattern-phase", cfg, seed)
    if out_dir:
        write_cells_csv(cells, os.path.join(out_dir, "pattern_cells.csv"), mhash)
        record["manifest_hash"] = mhash
        record["cells_csv"] = "pattern_cells.csv"
        _write_json(record, out_dir, "pattern_phase.json")
        manifest.write(out_dir)
    _print_json(record)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> _Parser:
    parser = _Parser(prog="tvphase", description=__doc__)
    parser.add_argument("--version", action="version", version=f"tvphase {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file with default option values")
        p.set_defaults(func=func)
        return p

    p = add("bound", _cmd_bound, "minimized closed-form bound for a variation pattern")
    p.add_argument("--n", type=int)
    p.add_argument("--s1p", type=int, help="consecutive same-sign pairs")
    p.add_argument("--s1m", type=int, help="consecutive opposite-sign pairs")
    p.add_argument("--s2", type=int, help="isolated-boundary variations")
    p.add_argument("--s3", type=int, help="variations touching an end (0..2)")
    p.add_argument("--m", type=float, help="also bound the failure probability at m")
    p.add_argument("--out", help="directory for bound.json + manifest")

    p = add("table1", _cmd_table1, "bounds for the eight reference patterns (CSV)")
    p.add_argument("--out", help="directory for table1.csv + manifest")

    p = add("phi", _cmd_phi, "evaluate the clamped-moment functions at t (and a, b)")
    p.add_argument("--t", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)

    p = add("gen", _cmd_gen, "draw a gradient-sparse signal")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int, help="number of uniform-position jumps")
    p.add_argument("--pattern-json", dest="pattern_json", help="inline JSON or path")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for signal.csv, gen.json + manifest")

    p = add("classify", _cmd_classify, "variation classification of a signal CSV")
    p.add_argument("--signal", help="single-column CSV")

    p = add("solve", _cmd_solve, "TV-minimization recovery from a matrix and measurements")
    p.add_argument("--matrix", help="measurement matrix A, CSV, row-major")
    p.add_argument("--rhs", help="measurement vector y, single-column CSV")
    p.add_argument("--feas-tol", dest="feas_tol", type=float)
    p.add_argument("--gap-tol", dest="gap_tol", type=float)
    p.add_argument("--out", help="directory for x_hat.csv, solve.json + manifest")

    p = add("statdim", _cmd_statdim, "Monte Carlo statistical-dimension estimate")
    p.add_argument("--pattern-json", dest="pattern_json", help="inline JSON or path")
    p.add_argument("--n", type=int, help="with --s: classify a random-support signal")
    p.add_argument("--s", type=int)
    p.add_argument("--trials", type=int, help="samples for delta_hat (default 1000)")
    p.add_argument(
        "--curve-trials", dest="curve_trials", type=int, help="samples per grid t (default 200)"
    )
    p.add_argument("--t-grid", dest="t_grid", help="'lo:hi:step' or comma list (default 0:4:0.1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for statdim.json, curve CSV + manifest")

    p = add("phase", _cmd_phase, "recovery phase diagram over an (s, m) grid")
    p.add_argument("--n", type=int)
    p.add_argument("--s-values", dest="s_values", help="'4,10,20' or 'lo:hi:step'")
    p.add_argument("--m-values", dest="m_values", help="'5:100:5' or comma list")
    p.add_argument("--trials", type=int, help="trials per cell (default 50)")
    p.add_argument("--bound-draws", dest="bound_draws", type=int, help="default 300")
    p.add_argument("--workers", type=int, help="processes for cells (default 1)")
    p.add_argument("--resume", action="store_true", help="continue an interrupted run")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (required)")

    p = add("pattern-phase", _cmd_pattern_phase, "success curve over m for one pattern")
    p.add_argument("--pattern-json", dest="pattern_json", help="inline JSON or path")
    p.add_argument("--m-values", dest="m_values", help="'5:60:5' or comma list")
    p.add_argument("--trials", type=int, help="trials per m (default 50)")
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for pattern_cells.csv + manifest")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(getattr(args, "config", None))
        return args.func(args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
