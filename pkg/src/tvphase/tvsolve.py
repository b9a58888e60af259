"""Equality-constrained TV minimization via a certified linear program.

The recovery problem

    min_x ||D x||_1   subject to   A x = y,

with D the forward-difference matrix, becomes a standard-form LP in the
variables (x, u):

    min 1'u   s.t.   A x = y,   D x - u <= 0,   -D x - u <= 0,   u >= 0.

HiGHS solves the LP; the reported optimum is then certified independently
from the returned multipliers: primal feasibility, duality gap, and dual
stationarity must all clear their tolerances, otherwise the solution is
degraded to MaxIter status.  Equality rows are normalized before the solve
so the tolerances mean the same thing at any measurement scale.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import DimensionError, ParameterError

__all__ = [
    "SolveStatus",
    "SolverOptions",
    "TvProblem",
    "TvSolution",
    "difference_matrix",
    "tv_norm",
    "solve_tv",
    "check_recovery",
]


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    MAXITER = "MaxIter"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SolverOptions:
    """Certification tolerances and backend knobs."""

    feas_tol: float = 1e-9
    gap_tol: float = 1e-9
    dual_tol: float = 1e-7
    presolve: bool = True
    time_limit: float | None = None

    def validate(self) -> "SolverOptions":
        for name in ("feas_tol", "gap_tol", "dual_tol"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0")
        return self


@dataclass(frozen=True)
class TvProblem:
    """Measurements y = A x of a signal to be recovered."""

    A: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        y = np.asarray(self.y, dtype=float).ravel()
        if A.ndim != 2:
            raise DimensionError(f"A must be a matrix, got ndim={A.ndim}")
        m, n = A.shape
        if n < 3:
            raise DimensionError(f"need n >= 3 columns, got {n}")
        if m < 1:
            raise DimensionError("need at least one measurement row")
        if y.shape != (m,):
            raise DimensionError(f"y must have length {m}, got {y.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
            raise ParameterError("A and y must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass(frozen=True)
class TvSolution:
    x_hat: np.ndarray = field(repr=False)
    objective: float
    feas_residual: float
    gap: float
    status: SolveStatus
    message: str = ""


def difference_matrix(n: int) -> np.ndarray:
    """Forward-difference matrix D of shape (n-1, n): (D x)_i = x_{i+1} - x_i."""
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    return np.eye(n - 1, n, k=1) - np.eye(n - 1, n)


def tv_norm(x) -> float:
    """Total variation seminorm, sum of |x_{i+1} - x_i|."""
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < 2:
        raise DimensionError("tv_norm needs at least 2 samples")
    return float(np.abs(np.diff(arr)).sum())


def _certify(res, c, A_eq, b_eq, A_ub, n, options):
    """Duality gap and dual stationarity from the returned multipliers."""
    pobj = float(c @ res.x)
    lam = np.asarray(res.eqlin.marginals, dtype=float)
    mu = np.asarray(res.ineqlin.marginals, dtype=float)
    dobj = float(b_eq @ lam)  # b_ub = 0 contributes nothing
    gap = abs(pobj - dobj)
    rc = c - A_eq.T @ lam - A_ub.T @ mu
    dres = max(
        float(np.abs(rc[:n]).max()),  # x is free: stationarity must be exact
        float(max(0.0, -rc[n:].min())),  # u >= 0: reduced costs must be >= 0
    )
    problems = []
    if gap > options.gap_tol * max(1.0, abs(pobj)):
        problems.append(f"duality gap {gap:.3e}")
    if dres > options.dual_tol:
        problems.append(f"dual residual {dres:.3e}")
    return gap, dres, problems


def solve_tv(problem: TvProblem, options: SolverOptions | None = None) -> TvSolution:
    """Solve the recovery LP and certify the result.

    Status is OPTIMAL only when the backend reports success and the
    certificate holds; an uncertified or iteration-capped answer comes back
    as MAXITER with the best iterate, and an infeasible problem as
    INFEASIBLE with x_hat = 0.
    """
    options = (options or SolverOptions()).validate()
    A, y = problem.A, problem.y
    m, n = A.shape
    k = n - 1

    row_norms = np.linalg.norm(A, axis=1)
    scale = 1.0 / np.maximum(row_norms, np.finfo(float).tiny)
    As = A * scale[:, None]
    ys = y * scale

    D = difference_matrix(n)
    c = np.concatenate([np.zeros(n), np.ones(k)])
    A_eq = np.hstack([As, np.zeros((m, k))])
    A_ub = np.vstack([np.hstack([D, -np.eye(k)]), np.hstack([-D, -np.eye(k)])])
    b_ub = np.zeros(2 * k)
    bounds = [(None, None)] * n + [(0.0, None)] * k

    lp_options = {
        "presolve": options.presolve,
        "primal_feasibility_tolerance": min(1e-10, options.feas_tol),
        "dual_feasibility_tolerance": min(1e-10, options.gap_tol),
    }
    if options.time_limit is not None:
        lp_options["time_limit"] = options.time_limit

    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq,
        b_eq=ys,
        bounds=bounds,
        method="highs",
        options=lp_options,
    )

    if res.status == 2:
        return TvSolution(
            x_hat=np.zeros(n),
            objective=np.inf,
            feas_residual=np.inf,
            gap=np.inf,
            status=SolveStatus.INFEASIBLE,
            message=res.message,
        )

    if res.x is None:
        return TvSolution(
            x_hat=np.zeros(n),
            objective=np.inf,
            feas_residual=np.inf,
            gap=np.inf,
            status=SolveStatus.MAXITER,
            message=f"no iterate returned: {res.message}",
        )

    x_hat = np.asarray(res.x[:n], dtype=float)
    feas = float(np.abs(A @ x_hat - y).max() / (1.0 + np.abs(y).max()))
    objective = tv_norm(x_hat)

    if res.status != 0:
        return TvSolution(
            x_hat=x_hat,
            objective=objective,
            feas_residual=feas,
            gap=np.inf,
            status=SolveStatus.MAXITER,
            message=res.message,
        )

    gap, dres, problems = _certify(res, c, A_eq, ys, A_ub, n, options)
    if feas > options.feas_tol:
        problems.insert(0, f"primal residual {feas:.3e}")
    if problems:
        return TvSolution(
            x_hat=x_hat,
            objective=objective,
            feas_residual=feas,
            gap=gap,
            status=SolveStatus.MAXITER,
            message="certification failed: " + ", ".join(problems),
        )
    return TvSolution(
        x_hat=x_hat,
        objective=objective,
        feas_residual=feas,
        gap=gap,
        status=SolveStatus.OPTIMAL,
        message="certified",
    )


def check_recovery(x_true, x_hat, tol: float = 1e-6) -> bool:
    """Exact-recovery test: ||x_true - x_hat||_2 <= tol."""
    a = np.asarray(x_true, dtype=float).ravel()
    b = np.asarray(x_hat, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.linalg.norm(a - b) <= tol)
