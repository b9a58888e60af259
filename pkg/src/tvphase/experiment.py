"""Phase-diagram experiments: recovery trials on an (s, m) grid.

Each trial draws a random gradient-sparse signal, measures it with a fresh
Gaussian matrix, solves the recovery LP, and scores exact recovery.  Cells
are independently seeded through SeedSequence entropy (master seed, stream
tag, s, m, trial index), so any subset of cells can be recomputed in any
order, serially or across processes, with identical results.

Alongside the empirical success rates, the grid carries the two analytic
quantities the experiment is designed to compare against: the minimized
closed-form bound averaged over freshly drawn patterns at each sparsity,
and the square-root-scale alternative bound.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import cai_lower, minimize_psi
from .errors import DimensionError, ParameterError, ValidationError
from .patterns import (
    VariationPattern,
    classify,
    generate_pattern_signal,
    generate_random_support_signal,
)
from .tvsolve import SolveStatus, SolverOptions, TvProblem, check_recovery, solve_tv

__all__ = [
    "PhaseGridConfig",
    "TrialOutcome",
    "PhaseCell",
    "SparsityBound",
    "GridResult",
    "CrossingEstimate",
    "run_trial",
    "run_cell",
    "bound_summary",
    "run_grid",
    "pattern_experiment",
    "isotonic_fit",
    "crossing_estimate",
    "write_cells_csv",
    "write_bounds_csv",
]

_TAG_GRID = 1
_TAG_BOUND = 2
_TAG_PATTERN = 3

_STATE_NAME = "run_state.json"


def _seed_rng(*parts) -> np.random.Generator:
    material = []
    for p in parts:
        p = int(p)
        if p < 0:
            raise ParameterError(f"seed components must be >= 0, got {p}")
        material.append(p)
    return np.random.default_rng(np.random.SeedSequence(material))


@dataclass(frozen=True)
class PhaseGridConfig:
    n: int
    s_values: tuple[int, ...]
    m_values: tuple[int, ...]
    trials_per_cell: int = 50
    master_seed: int = 0
    bound_draws: int = 300
    solver: SolverOptions = field(default_factory=SolverOptions)

    def validate(self) -> "PhaseGridConfig":
        if self.n < 3:
            raise DimensionError(f"need n >= 3, got {self.n}")
        if not self.s_values or not self.m_values:
            raise ParameterError("s_values and m_values must be nonempty")
        for s in self.s_values:
            if not 0 <= s <= self.n - 1:
                raise ParameterError(f"s={s} outside 0..{self.n - 1}")
        for m in self.m_values:
            if not 1 <= m <= self.n:
                raise ParameterError(f"m={m} outside 1..{self.n}")
        if self.trials_per_cell < 1:
            raise ParameterError("trials_per_cell must be >= 1")
        if self.master_seed < 0:
            raise ParameterError("master_seed must be >= 0")
        if self.bound_draws < 1:
            raise ParameterError("bound_draws must be >= 1")
        self.solver.validate()
        return self

    def fingerprint(self) -> str:
        payload = {
            "n": self.n,
            "s_values": list(self.s_values),
            "m_values": list(self.m_values),
            "trials_per_cell": self.trials_per_cell,
            "master_seed": self.master_seed,
            "bound_draws": self.bound_draws,
            "solver": {
                "feas_tol": self.solver.feas_tol,
                "gap_tol": self.solver.gap_tol,
                "dual_tol": self.solver.dual_tol,
                "presolve": self.solver.presolve,
                "time_limit": self.solver.time_limit,
            },
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    flagged: bool
    m_hat: float
    pattern: VariationPattern
    residual: float


@dataclass(frozen=True)
class PhaseCell:
    n: int
    s: int
    m: int
    trials: int
    successes: int
    flagged: int
    mean_m_hat: float
    mean_cai_lower: float
    wall_ms: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "m": self.m,
            "trials": self.trials,
            "successes": self.successes,
            "flagged": self.flagged,
            "mean_m_hat": self.mean_m_hat,
            "mean_cai_lower": self.mean_cai_lower,
            "wall_ms": self.wall_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseCell":
        return cls(
            n=int(d["n"]),
            s=int(d["s"]),
            m=int(d["m"]),
            trials=int(d["trials"]),
            successes=int(d["successes"]),
            flagged=int(d["flagged"]),
            mean_m_hat=float(d["mean_m_hat"]),
            mean_cai_lower=float(d["mean_cai_lower"]),
            wall_ms=float(d["wall_ms"]),
        )


@dataclass(frozen=True)
class SparsityBound:
    """Closed-form bound averaged over sampled patterns at one sparsity."""

    n: int
    s: int
    draws: int
    mean_m_hat: float
    std_m_hat: float
    cai_lower_raw: float
    cai_clamped: bool

    @property
    def cai_lower_floor(self) -> float:
        return max(0.0, self.cai_lower_raw)


@dataclass(frozen=True)
class GridResult:
    config: PhaseGridConfig
    cells: list[PhaseCell]
    bounds: list[SparsityBound]


@dataclass(frozen=True)
class CrossingEstimate:
    """Smallest grid m whose isotonic success rate reaches the level."""

    m_cross: float | None
    std: float
    level: float
    valid_boot: int
    n_boot: int


def run_trial(n, s, m, trial_seed, options: SolverOptions | None = None) -> TrialOutcome:
    """One recovery trial; trial_seed is an int or a sequence of ints."""
    rng = np.random.default_rng(np.random.SeedSequence(trial_seed))
    signal = generate_random_support_signal(n, s, rng)
    pattern = classify(signal).pattern
    A = rng.standard_normal((m, n))
    y = A @ signal.values
    sol = solve_tv(TvProblem(A, y), options)
    flagged = sol.status is not SolveStatus.OPTIMAL
    residual = float(np.linalg.norm(signal.values - sol.x_hat))
    success = (not flagged) and check_recovery(signal.values, sol.x_hat)
    return TrialOutcome(
        success=success,
        flagged=flagged,
        m_hat=minimize_psi(pattern).m_hat,
        pattern=pattern,
        residual=residual,
    )


def run_cell(n, s, m, trials, master_seed, options: SolverOptions | None = None) -> PhaseCell:
    """Aggregate `trials` independently seeded trials for one (s, m) cell."""
    t0 = time.perf_counter()
    successes = flagged = 0
    m_hats = np.empty(trials)
    for k in range(trials):
        out = run_trial(n, s, m, (master_seed, _TAG_GRID, s, m, k), options)
        successes += out.success
        flagged += out.flagged
        m_hats[k] = out.m_hat
    wall_ms = (time.perf_counter() - t0) * 1e3
    return PhaseCell(
        n=n,
        s=s,
        m=m,
        trials=trials,
        successes=successes,
        flagged=flagged,
        mean_m_hat=float(m_hats.mean()),
        mean_cai_lower=max(0.0, cai_lower(n, s)),
        wall_ms=wall_ms,
    )


def bound_summary(n, s, draws, master_seed) -> SparsityBound:
    """Mean/std of the minimized bound over freshly drawn supports at sparsity s."""
    vals = np.empty(draws)
    for j in range(draws):
        rng = _seed_rng(master_seed, _TAG_BOUND, s, j)
        pattern = classify(generate_random_support_signal(n, s, rng)).pattern
        vals[j] = minimize_psi(pattern).m_hat
    raw = cai_lower(n, s)
    return SparsityBound(
        n=n,
        s=s,
        draws=draws,
        mean_m_hat=float(vals.mean()),
        std_m_hat=float(vals.std(ddof=1)) if draws > 1 else 0.0,
        cai_lower_raw=raw,
        cai_clamped=raw < 0,
    )


def _cell_task(args):
    n, s, m, trials, master_seed, options = args
    return run_cell(n, s, m, trials, master_seed, options)


def _load_state(out_dir, fingerprint):
    path = os.path.join(out_dir, _STATE_NAME)
    if not os.path.exists(path):
        raise ValidationError(f"resume requested but {path} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        state = json.load(fh)
    if state.get("fingerprint") != fingerprint:
        raise ValidationError(
            "resume requested but the existing run state was produced by a "
            "different configuration"
        )
    return {
        (c["s"], c["m"]): PhaseCell.from_dict(c) for c in state.get("cells", [])
    }


def _save_state(out_dir, fingerprint, done):
    path = os.path.join(out_dir, _STATE_NAME)
    tmp = path + ".tmp"
    cells = [done[key].to_dict() for key in sorted(done)]
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"fingerprint": fingerprint, "cells": cells}, fh, indent=1)
    os.replace(tmp, path)


def run_grid(
    config: PhaseGridConfig,
    *,
    out_dir=None,
    workers: int = 1,
    resume: bool = False,
    progress=None,
    manifest_hash: str = "",
) -> GridResult:
    """Run every (s, m) cell plus per-s bound summaries.

    With out_dir set, completed cells are checkpointed to run_state.json
    after every cell and the final tables land in cells.csv / bounds.csv;
    resume=True picks up a matching interrupted run.  workers > 1 spreads
    cells over processes (results are identical to the serial run).
    """
    config.validate()
    fingerprint = config.fingerprint()
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    done = {}
    if resume:
        if not out_dir:
            raise ValidationError("resume requires out_dir")
        done = _load_state(out_dir, fingerprint)

    pending = [
        (s, m)
        for s in config.s_values
        for m in config.m_values
        if (s, m) not in done
    ]

    def record(cell: PhaseCell):
        done[(cell.s, cell.m)] = cell
        if out_dir:
            _save_state(out_dir, fingerprint, done)
        if progress is not None:
            progress(cell)

    if workers > 1 and pending:
        tasks = [
            (config.n, s, m, config.trials_per_cell, config.master_seed, config.solver)
            for s, m in pending
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell in pool.map(_cell_task, tasks):
                record(cell)
    else:
        for s, m in pending:
            record(
                run_cell(
                    config.n, s, m, config.trials_per_cell, config.master_seed, config.solver
                )
            )

    cells = [done[key] for key in sorted(done)]
    bounds = [
        bound_summary(config.n, s, config.bound_draws, config.master_seed)
        for s in config.s_values
    ]
    if out_dir:
        write_cells_csv(cells, os.path.join(out_dir, "cells.csv"), manifest_hash)
        write_bounds_csv(bounds, os.path.join(out_dir, "bounds.csv"), manifest_hash)
    return GridResult(config=config, cells=cells, bounds=bounds)


def _pattern_cell_task(args):
    pattern, m, trials, master_seed, options = args
    return _pattern_cell(pattern, m, trials, master_seed, options)


def _pattern_cell(pattern, m, trials, master_seed, options) -> PhaseCell:
    t0 = time.perf_counter()
    m_hat = minimize_psi(pattern).m_hat
    successes = flagged = 0
    for k in range(trials):
        rng = _seed_rng(master_seed, _TAG_PATTERN, m, k)
        signal = generate_pattern_signal(pattern, rng)
        A = rng.standard_normal((m, signal.n))
        sol = solve_tv(TvProblem(A, A @ signal.values), options)
        ok = sol.status is SolveStatus.OPTIMAL
        flagged += not ok
        successes += ok and check_recovery(signal.values, sol.x_hat)
    wall_ms = (time.perf_counter() - t0) * 1e3
    return PhaseCell(
        n=pattern.n,
        s=pattern.support_size,
        m=m,
        trials=trials,
        successes=successes,
        flagged=flagged,
        mean_m_hat=m_hat,
        mean_cai_lower=max(0.0, cai_lower(pattern.n, pattern.support_size)),
        wall_ms=wall_ms,
    )


def pattern_experiment(
    pattern: VariationPattern,
    m_values,
    trials: int,
    master_seed: int = 0,
    *,
    options: SolverOptions | None = None,
    workers: int = 1,
) -> list[PhaseCell]:
    """Success curve over m for one fixed variation pattern.

    Each trial draws a fresh layout realizing the pattern.  trials = 0 is
    allowed and returns an empty list.
    """
    pattern.validate()
    m_values = [int(m) for m in m_values]
    for m in m_values:
        if not 1 <= m <= pattern.n:
            raise ParameterError(f"m={m} outside 1..{pattern.n}")
    if trials < 0:
        raise ParameterError("trials must be >= 0")
    if trials == 0 or not m_values:
        return []
    options = options or SolverOptions()
    tasks = [(pattern, m, trials, master_seed, options) for m in m_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_pattern_cell_task, tasks))
    return [_pattern_cell_task(t) for t in tasks]


def isotonic_fit(values, weights=None) -> np.ndarray:
    """Weighted least-squares nondecreasing fit (pool adjacent violators)."""
    y = np.asarray(values, dtype=float).ravel()
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float).ravel()
    if w.shape != y.shape:
        raise DimensionError("weights must match values")
    if y.size == 0:
        return y.copy()
    if np.any(w <= 0):
        raise ParameterError("weights must be positive")
    vals, wts, lens = [], [], []
    for v, wi in zip(y, w):
        cv, cw, cl = float(v), float(wi), 1
        while vals and vals[-1] > cv:
            pv, pw, pl = vals.pop(), wts.pop(), lens.pop()
            cv = (pv * pw + cv * cw) / (pw + cw)
            cw += pw
            cl += pl
        vals.append(cv)
        wts.append(cw)
        lens.append(cl)
    return np.repeat(vals, lens)


def crossing_estimate(
    m_values,
    successes,
    trials,
    *,
    level: float = 0.5,
    n_boot: int = 200,
    seed: int = 0,
) -> CrossingEstimate:
    """Empirical transition location with a parametric-bootstrap spread.

    The success rates are first made nondecreasing in m by isotonic
    regression; the crossing is the smallest grid m at or above the level.
    Bootstrap replicates redraw successes from Binomial(trials, fitted rate)
    per cell; replicates that never reach the level are dropped and counted
    in valid_boot.
    """
    ms = np.asarray(m_values, dtype=int).ravel()
    succ = np.asarray(successes, dtype=int).ravel()
    tr = np.broadcast_to(np.asarray(trials, dtype=int), ms.shape).copy()
    if not (ms.shape == succ.shape == tr.shape) or ms.size == 0:
        raise DimensionError("m_values, successes, trials must align and be nonempty")
    if np.any(np.diff(ms) <= 0):
        raise ParameterError("m_values must be strictly increasing")
    if np.any(tr < 1) or np.any(succ < 0) or np.any(succ > tr):
        raise ParameterError("need 0 <= successes <= trials with trials >= 1")
    if not 0 < level < 1:
        raise ParameterError("level must lie in (0, 1)")

    def crossing(rates):
        idx = np.flatnonzero(rates >= level)
        return float(ms[idx[0]]) if idx.size else None

    iso = isotonic_fit(succ / tr, tr)
    point = crossing(iso)

    rng = _seed_rng(seed, 31)
    hits = []
    for _ in range(n_boot):
        sim = rng.binomial(tr, iso)
        c = crossing(isotonic_fit(sim / tr, tr))
        if c is not None:
            hits.append(c)
    std = float(np.std(hits, ddof=1)) if len(hits) >= 2 else math.nan
    return CrossingEstimate(
        m_cross=point, std=std, level=level, valid_boot=len(hits), n_boot=n_boot
    )


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_cells_csv(cells, path, manifest_hash: str = "") -> None:
    cols = ["n", "s", "m", "trials", "successes", "flagged", "mean_m_hat", "mean_cai_lower", "wall_ms"]
    with open(path, "w", encoding="utf-8") as fh:
        header = cols + (["manifest_hash"] if manifest_hash else [])
        fh.write(",".join(header) + "\n")
        for cell in cells:
            d = cell.to_dict()
            row = [_fmt(d[c]) for c in cols]
            if manifest_hash:
                row.append(manifest_hash)
            fh.write(",".join(row) + "\n")


def write_bounds_csv(bounds, path, manifest_hash: str = "") -> None:
    cols = ["n", "s", "draws", "mean_m_hat", "std_m_hat", "cai_lower", "cai_clamped"]
    with open(path, "w", encoding="utf-8") as fh:
        header = cols + (["manifest_hash"] if manifest_hash else [])
        fh.write(",".join(header) + "\n")
        for b in bounds:
            row = [
                str(b.n),
                str(b.s),
                str(b.draws),
                repr(b.mean_m_hat),
                repr(b.std_m_hat),
                repr(b.cai_lower_raw),
                "true" if b.cai_clamped else "false",
            ]
            if manifest_hash:
                row.append(manifest_hash)
            fh.write(",".join(row) + "\n")
