"""Recovery LP: reformulation, certification, oracle agreement."""

import numpy as np
import pytest

from tvphase import (
    DimensionError,
    ParameterError,
    SolveStatus,
    SolverOptions,
    TvProblem,
    check_recovery,
    difference_matrix,
    generate_random_support_signal,
    solve_tv,
    tv_norm,
)
from oracles import tv_lp_enumeration_oracle


def _instance(rng, n, s, m):
    x = generate_random_support_signal(n, s, rng).values
    A = rng.standard_normal((m, n))
    return x, TvProblem(A, A @ x)


def test_difference_matrix():
    D = difference_matrix(4)
    x = np.array([1.0, 3.0, 2.0, 2.0])
    assert D.shape == (3, 4)
    assert np.array_equal(D @ x, np.diff(x))
    with pytest.raises(DimensionError):
        difference_matrix(1)


def test_tv_norm():
    assert tv_norm([1.0, 3.0, 2.0]) == pytest.approx(3.0)
    assert tv_norm(np.ones(5)) == 0.0
    with pytest.raises(DimensionError):
        tv_norm([1.0])


def test_problem_validation():
    with pytest.raises(DimensionError):
        TvProblem(np.zeros((3, 2)), np.zeros(3))
    with pytest.raises(DimensionError):
        TvProblem(np.zeros((3, 5)), np.zeros(4))
    with pytest.raises(DimensionError):
        TvProblem(np.zeros(5), np.zeros(5))
    with pytest.raises(ParameterError):
        TvProblem(np.full((2, 4), np.nan), np.zeros(2))


def test_solver_options_validation():
    with pytest.raises(ParameterError):
        SolverOptions(feas_tol=0.0).validate()
    SolverOptions().validate()


def test_solve_matches_enumeration_oracle():
    rng = np.random.default_rng(60)
    for _ in range(25):
        n = int(rng.integers(4, 9))
        m = int(rng.integers(2, n))
        s = int(rng.integers(0, min(3, n - 1)))
        x, prob = _instance(rng, n, s, m)
        sol = solve_tv(prob)
        assert sol.status is SolveStatus.OPTIMAL, sol.message
        want, _ = tv_lp_enumeration_oracle(prob.A, prob.y)
        assert sol.objective == pytest.approx(want, abs=1e-7)


def test_solve_certificate_fields():
    rng = np.random.default_rng(61)
    for _ in range(15):
        n = int(rng.integers(10, 65))
        m = int(rng.integers(max(2, n // 4), n))
        x, prob = _instance(rng, n, 3, m)
        sol = solve_tv(prob)
        assert sol.status is SolveStatus.OPTIMAL, sol.message
        assert sol.gap <= 1e-9 * max(1.0, abs(sol.objective))
        assert sol.feas_residual <= 1e-9
        # reported residual is recomputed from x_hat, not trusted from the backend
        manual = np.abs(prob.A @ sol.x_hat - prob.y).max() / (1.0 + np.abs(prob.y).max())
        assert sol.feas_residual == pytest.approx(manual, rel=1e-12, abs=1e-18)


def test_exact_recovery_with_enough_measurements():
    rng = np.random.default_rng(62)
    x, prob = _instance(rng, 40, 2, 35)
    sol = solve_tv(prob)
    assert sol.status is SolveStatus.OPTIMAL
    assert check_recovery(x, sol.x_hat)
    assert sol.objective <= tv_norm(x) + 1e-9  # never above the truth's TV


def test_undersampled_solve_is_optimal_but_not_recovery():
    rng = np.random.default_rng(63)
    x, prob = _instance(rng, 60, 12, 6)
    sol = solve_tv(prob)
    assert sol.status is SolveStatus.OPTIMAL
    assert not check_recovery(x, sol.x_hat)
    assert sol.objective <= tv_norm(x) + 1e-9


def test_infeasible_problem_detected():
    A = np.vstack([np.ones(5), np.ones(5)])
    y = np.array([1.0, 2.0])  # same row, different targets
    sol = solve_tv(TvProblem(A, y))
    assert sol.status is SolveStatus.INFEASIBLE
    assert not np.isfinite(sol.gap)


def test_check_recovery():
    assert check_recovery([1.0, 2.0], [1.0, 2.0 + 1e-7])
    assert not check_recovery([1.0, 2.0], [1.0, 2.1])
    with pytest.raises(DimensionError):
        check_recovery([1.0], [1.0, 2.0])


def test_solution_objective_is_tv_of_x_hat():
    rng = np.random.default_rng(64)
    x, prob = _instance(rng, 25, 4, 18)
    sol = solve_tv(prob)
    assert sol.objective == pytest.approx(tv_norm(sol.x_hat), abs=1e-12)
