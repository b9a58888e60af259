"""Monte Carlo estimation of the statistical dimension of the TV descent cone.

For a fixed gradient support S with signs sigma, the squared distance of a
standard Gaussian g to the t-dilated subdifferential is the value of

    min_z  || g - t D' z ||^2,   z_i = sigma_i on S,  |z_i| <= 1 off S,

with D the forward-difference matrix.  Expanding the rows, this is the
box-constrained tridiagonal QP handled by the kernels module.  The
statistical dimension estimate averages min_{t in [0, t_max]} dist^2 over
Gaussian draws (golden section per draw, the QP is convex in t); the upper
estimate B_u evaluates the mean at each point of a fixed t grid and takes
the smallest mean, so by construction delta_hat <= B_u up to noise.

Samples whose inner QP did not converge within the sweep cap are excluded
from the averages and reported in the ``flagged`` counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import golden_min, mean_halfwidth, spawn_rngs
from .errors import DimensionError, ParameterError, SolverFailure
from .kernels import cd_sweeps
from .patterns import GradientSparseSignal, VariationPattern, classify, generate_pattern_signal

__all__ = [
    "SubdiffSpec",
    "DistanceSample",
    "StatdimEstimate",
    "BuCurvePoint",
    "project_distance",
    "clamp_term_bound",
    "estimate_statdim",
    "bu_curve",
    "estimate_Bu",
    "default_t_grid",
    "T_MAX",
]

#: Golden-section search interval for the dilation.
T_MAX = 20.0

DEFAULT_MAX_SWEEPS = 20000
DEFAULT_DECREASE_TOL = 1e-12
DEFAULT_KKT_TOL = 1e-8

#: Treat dilations below this as t = 0 (the QP objective is ||g||^2 there).
_T_FLOOR = 1e-12


@dataclass(frozen=True)
class SubdiffSpec:
    """Gradient support and signs pinning the subdifferential face."""

    n: int
    support: tuple[int, ...]
    signs: tuple[int, ...]

    def validate(self) -> "SubdiffSpec":
        if self.n < 3:
            raise DimensionError(f"need n >= 3, got n={self.n}")
        if len(self.support) != len(self.signs):
            raise DimensionError("support and signs must have equal length")
        prev = 0
        for i in self.support:
            if not 1 <= i <= self.n - 1:
                raise ParameterError(f"support index {i} outside 1..{self.n - 1}")
            if i <= prev:
                raise ParameterError("support must be strictly increasing")
            prev = i
        for s in self.signs:
            if s not in (-1, 1):
                raise ParameterError(f"signs must be +-1, got {s}")
        return self

    @classmethod
    def from_signal(cls, signal: GradientSparseSignal) -> "SubdiffSpec":
        c = classify(signal)
        return cls(n=c.n, support=c.support, signs=c.signs).validate()

    @classmethod
    def from_pattern(cls, pattern: VariationPattern, rng: np.random.Generator) -> "SubdiffSpec":
        """Fix one random support/sign layout realizing the pattern."""
        return cls.from_signal(generate_pattern_signal(pattern, rng))

    def arrays(self):
        """(z_template, free) arrays for the kernel: signs preset, rest free."""
        m = self.n - 1
        z = np.zeros(m)
        free = np.ones(m, dtype=np.uint8)
        for i, s in zip(self.support, self.signs):
            z[i - 1] = float(s)
            free[i - 1] = 0
        return z, free


@dataclass(frozen=True)
class DistanceSample:
    """One QP solve: squared distance at dilation t."""

    t: float
    dist_sq: float
    sweeps: int
    converged: bool


@dataclass(frozen=True)
class StatdimEstimate:
    """Mean of per-sample minimized distances with a 95% half-width."""

    value: float
    halfwidth: float
    trials: int
    flagged: int


@dataclass(frozen=True)
class BuCurvePoint:
    """Mean squared distance at one grid dilation."""

    t: float
    mean: float
    halfwidth: float
    trials: int
    flagged: int


def _check_gaussian(g, n):
    arr = np.asarray(g, dtype=float)
    if arr.shape != (n,):
        raise DimensionError(f"g must have shape ({n},), got {arr.shape}")
    return arr


def project_distance(
    g,
    t: float,
    spec: SubdiffSpec,
    *,
    z0=None,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    decrease_tol: float = DEFAULT_DECREASE_TOL,
    kkt_tol: float = DEFAULT_KKT_TOL,
) -> DistanceSample:
    """Squared distance of g to the t-dilated subdifferential face.

    z0, when given, warm-starts the free coordinates (support entries are
    reset to their signs regardless).
    """
    spec.validate()
    g = _check_gaussian(g, spec.n)
    if not (t >= 0 and math.isfinite(t)):
        raise ParameterError(f"dilation t must be finite and >= 0, got {t!r}")
    z, free = spec.arrays()
    if z0 is not None:
        z0 = np.asarray(z0, dtype=float)
        if z0.shape != z.shape:
            raise DimensionError(f"z0 must have shape {z.shape}, got {z0.shape}")
        mask = free.astype(bool)
        z[mask] = np.clip(z0[mask], -1.0, 1.0)
    if t <= _T_FLOOR:
        return DistanceSample(t=float(t), dist_sq=float(g @ g), sweeps=0, converged=True)
    obj, sweeps, conv = cd_sweeps(g, float(t), z, free, int(max_sweeps), decrease_tol, kkt_tol)
    return DistanceSample(t=float(t), dist_sq=float(obj), sweeps=int(sweeps), converged=bool(conv))


def clamp_term_bound(g, t: float, spec: SubdiffSpec) -> float:
    """Closed-form per-coordinate lower bound on the squared distance.

    Every coordinate of the residual is bounded by clamping against the
    worst admissible z, which decouples the coordinates; averaging this
    bound over Gaussian g recovers psi(t) exactly, which is what makes the
    closed-form bound an expectation identity rather than a heuristic.
    """
    spec.validate()
    g = _check_gaussian(g, spec.n)
    if not (t >= 0 and math.isfinite(t)):
        raise ParameterError(f"dilation t must be finite and >= 0, got {t!r}")
    n = spec.n
    m = n - 1
    sigma = np.zeros(m)
    in_s = np.zeros(m, dtype=bool)
    for i, s in zip(spec.support, spec.signs):
        sigma[i - 1] = float(s)
        in_s[i - 1] = True

    def hinge_sq(v, c):
        return np.square(np.maximum(np.abs(v) - c, 0.0))

    # interior coordinates k = 2..n-1 see the pair (z_{k-1}, z_k)
    gk = g[1:-1]
    here, prev = in_s[1:], in_s[:-1]
    sig_here, sig_prev = sigma[1:], sigma[:-1]
    interior = np.where(
        here & prev,
        np.square(gk + t * (sig_here - sig_prev)),
        np.where(
            here,
            hinge_sq(gk + t * sig_here, t),
            np.where(prev, hinge_sq(gk - t * sig_prev, t), hinge_sq(gk, 2.0 * t)),
        ),
    )
    first = (g[0] + t * sigma[0]) ** 2 if in_s[0] else float(hinge_sq(g[0], t))
    last = (g[-1] - t * sigma[-1]) ** 2 if in_s[-1] else float(hinge_sq(g[-1], t))
    return float(interior.sum() + first + last)


def _min_over_t(g, z, free, t_max, xtol, max_sweeps, decrease_tol, kkt_tol):
    """Golden-section minimum of dist^2 over t, warm-starting z across evals."""
    ok = True

    def f(t):
        nonlocal ok
        if t <= _T_FLOOR:
            return float(g @ g)
        obj, _, conv = cd_sweeps(g, t, z, free, max_sweeps, decrease_tol, kkt_tol)
        if not conv:
            ok = False
        return obj

    _, best = golden_min(f, 0.0, t_max, xtol=xtol)
    best = min(best, float(g @ g))
    return best, ok


def estimate_statdim(
    spec: SubdiffSpec,
    trials: int,
    rng: np.random.Generator,
    *,
    t_max: float = T_MAX,
    xtol: float = 1e-5,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    decrease_tol: float = DEFAULT_DECREASE_TOL,
    kkt_tol: float = DEFAULT_KKT_TOL,
) -> StatdimEstimate:
    """Average of min_t dist^2(g, t * subdifferential) over Gaussian draws.

    Per-sample generators are spawned up front, so estimates depend only on
    the incoming generator state and trial count, not on evaluation order.
    """
    spec.validate()
    if trials < 1:
        raise ParameterError(f"need trials >= 1, got {trials}")
    z_template, free = spec.arrays()
    z = np.empty_like(z_template)
    mins = np.empty(trials)
    kept = np.ones(trials, dtype=bool)
    for i, child in enumerate(spawn_rngs(rng, trials)):
        g = child.standard_normal(spec.n)
        z[:] = z_template
        mins[i], kept[i] = _min_over_t(
            g, z, free, t_max, xtol, max_sweeps, decrease_tol, kkt_tol
        )
    flagged = int(trials - kept.sum())
    if flagged == trials:
        raise SolverFailure("every sample hit the sweep cap; estimate undefined")
    value, half = mean_halfwidth(mins[kept])
    return StatdimEstimate(value=value, halfwidth=half, trials=trials, flagged=flagged)


def default_t_grid() -> np.ndarray:
    """Grid t = 0, 0.1, ..., 4.0 used by the CLI for B_u curves."""
    return np.linspace(0.0, 4.0, 41)


def bu_curve(
    spec: SubdiffSpec,
    t_grid,
    trials: int,
    rng: np.random.Generator,
    *,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    decrease_tol: float = DEFAULT_DECREASE_TOL,
    kkt_tol: float = DEFAULT_KKT_TOL,
) -> list[BuCurvePoint]:
    """Mean squared distance at every grid dilation, shared samples across t.

    Samples with any non-converged solve are dropped from every grid point,
    keeping the per-t means comparable.
    """
    spec.validate()
    if trials < 1:
        raise ParameterError(f"need trials >= 1, got {trials}")
    grid = np.asarray(t_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ParameterError("t grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ParameterError("t grid must be finite and >= 0")
    grid = np.unique(grid)

    z_template, free = spec.arrays()
    z = np.empty_like(z_template)
    vals = np.empty((trials, grid.size))
    kept = np.ones(trials, dtype=bool)
    for i, child in enumerate(spawn_rngs(rng, trials)):
        g = child.standard_normal(spec.n)
        z[:] = z_template
        for k, t in enumerate(grid):
            if t <= _T_FLOOR:
                vals[i, k] = float(g @ g)
                continue
            obj, _, conv = cd_sweeps(g, t, z, free, max_sweeps, decrease_tol, kkt_tol)
            vals[i, k] = obj
            if not conv:
                kept[i] = False
    flagged = int(trials - kept.sum())
    if flagged == trials:
        raise SolverFailure("every sample hit the sweep cap; curve undefined")
    points = []
    for k, t in enumerate(grid):
        mean, half = mean_halfwidth(vals[kept, k])
        points.append(
            BuCurvePoint(t=float(t), mean=mean, halfwidth=half, trials=trials, flagged=flagged)
        )
    return points


def estimate_Bu(spec: SubdiffSpec, t_grid, trials: int, rng: np.random.Generator) -> float:
    """Smallest per-t mean over the grid; upper estimate for the statistical
    dimension (and so for the minimized closed-form bound)."""
    return min(p.mean for p in bu_curve(spec, t_grid, trials, rng))
