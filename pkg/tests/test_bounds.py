"""Closed-form bound: moment functions, psi, minimization, auxiliary bounds."""

import math

import numpy as np
import pytest

from tvphase import (
    ParameterError,
    VariationPattern,
    cai_lower,
    cai_upper,
    classify,
    failure_probability_bound,
    generate_random_support_signal,
    minimize_psi,
    phi1,
    phi2,
    psi,
    psi_limit,
    psi_terms,
    reference_bounds,
    reference_patterns,
)
from tvphase.bounds import clamp_sq_moment, gauss_tail
from oracles import J_quad, cai_bounds_mp, failure_floor_mp, phi1_quad, phi2_quad

# frozen before implementation, from the quadrature oracles
PHI2_AT_1 = 0.15067956668754157
PHI1_AT_11 = 0.5057687267145199

# reference minimized bounds, frozen from the pre-implementation prototype
REFERENCE_M_HAT = [
    10.0,
    32.043978,
    31.737346,
    32.584011,
    12.328657,
    10.0,
    16.529759,
    25.542463,
]


def test_frozen_moment_values():
    assert phi2(1.0) == pytest.approx(PHI2_AT_1, abs=1e-15)
    assert phi1(1.0, 1.0) == pytest.approx(PHI1_AT_11, abs=1e-15)


def test_gauss_tail_basics():
    assert gauss_tail(0.0) == pytest.approx(0.5, abs=1e-16)
    assert gauss_tail(40.0) == 0.0  # underflows cleanly, no 1 - cdf cancellation
    assert gauss_tail(-40.0) == pytest.approx(1.0, abs=1e-15)


def test_clamp_sq_moment_against_quadrature():
    for c in (-3.0, -1.0, -0.2, 0.0, 0.7, 2.5, 6.0):
        assert clamp_sq_moment(c) == pytest.approx(J_quad(c), abs=1e-12)


def test_phi_functions_against_quadrature():
    for t in np.linspace(0.0, 8.0, 17):
        assert phi2(t) == pytest.approx(phi2_quad(t), abs=1e-10)
        assert phi1(t, t) == pytest.approx(phi1_quad(t, t), abs=1e-10)
    assert phi1(0.3, 1.7) == pytest.approx(phi1_quad(0.3, 1.7), abs=1e-10)
    assert phi1(2.0, 0.5) == pytest.approx(phi1_quad(2.0, 0.5), abs=1e-10)


def test_phi_special_values():
    assert phi2(0.0) == pytest.approx(1.0, abs=1e-15)
    assert phi1(0.0, 1.0) == pytest.approx(phi2(1.0), abs=1e-15)
    assert phi2(8.0) < 1e-13
    # phi1(t, t) decreases to 1/2
    assert phi1(10.0, 10.0) == pytest.approx(0.5, abs=1e-12)


def test_phi_domain_errors():
    with pytest.raises(ParameterError):
        phi2(-0.1)
    with pytest.raises(ParameterError):
        phi1(-1.0, 1.0)
    with pytest.raises(ParameterError):
        phi1(1.0, math.nan)


def test_phi_vectorized():
    t = np.array([0.0, 0.5, 1.0])
    assert np.allclose(phi2(t), [phi2(v) for v in t], atol=1e-15)
    assert np.allclose(phi1(t, t), [phi1(v, v) for v in t], atol=1e-15)


def _random_patterns(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(10, 1001))
        s = int(rng.integers(0, min(n - 1, 40)))
        sig = generate_random_support_signal(n, s, rng)
        out.append(classify(sig).pattern)
    return out


def test_psi_at_zero_equals_n():
    for p in _random_patterns(40, 11):
        assert abs(psi(0.0, p) - p.n) <= 1e-9, p


def test_psi_matches_term_sum_and_is_convex():
    grid = np.linspace(0.0, 6.0, 61)
    for p in _random_patterns(8, 5):
        vals = psi(grid, p)
        assert np.all(np.isfinite(vals))
        for t in (0.0, 0.4, 2.0):
            assert psi_terms(t, p)["total"] == pytest.approx(psi(t, p), abs=1e-12)
        second = np.diff(vals, 2)
        assert second.min() > -1e-8, p  # convex along the grid


def test_psi_limit_and_infinite_argument():
    flat = VariationPattern(100, 9, 0, 2, 0)
    assert psi_limit(flat) == pytest.approx(10.0)
    assert psi(math.inf, flat) == pytest.approx(10.0)
    assert psi(1.0, flat) > psi(2.0, flat) > 10.0  # decreasing toward the limit

    steep = VariationPattern(100, 0, 9, 2, 0)
    assert psi_limit(steep) == math.inf
    assert psi(math.inf, steep) == math.inf

    edge = VariationPattern(100, 9, 0, 1, 1)
    assert psi_limit(edge) == math.inf


def test_psi_rejects_negative_t():
    with pytest.raises(ParameterError):
        psi(-0.5, VariationPattern(10))


def test_minimize_psi_reference_rows():
    results = reference_bounds()
    for res, expected in zip(results, REFERENCE_M_HAT):
        assert res.m_hat == pytest.approx(expected, abs=5e-3)
    assert results[0].at_infinity and results[5].at_infinity
    assert not results[1].at_infinity
    for res in results:
        assert res.pattern.support_size == 10
        assert 0.0 <= res.m_hat <= res.pattern.n
        total = res.terms["total"]
        assert total == pytest.approx(res.m_hat, abs=1e-9)


def test_minimize_psi_matches_dense_grid():
    grid = np.linspace(0.0, 20.0, 20001)
    for p in _random_patterns(6, 23) + [VariationPattern(100, 0, 9, 2, 0)]:
        res = minimize_psi(p)
        dense = min(float(psi(grid, p).min()), psi_limit(p))
        assert res.m_hat <= dense + 1e-9
        # the grid itself only locates the minimum to ~curvature * (step/2)^2
        assert res.m_hat >= dense - 1e-4, p


def test_minimize_psi_boundary_minimum():
    # spanning full-support pattern: psi = n + 2 t^2 + 4 s1m t^2 terms, min at 0
    p = VariationPattern(5, 0, 3, 0, 2)
    res = minimize_psi(p)
    assert res.m_hat == pytest.approx(5.0, abs=1e-9)
    assert res.t_star == pytest.approx(0.0, abs=1e-6)


def test_at_infinity_terms():
    res = minimize_psi(VariationPattern(100, 9, 0, 2, 0))
    assert res.at_infinity
    assert res.terms["consecutive_same"] == 9.0
    assert res.terms["individual"] == 1.0
    assert res.terms["interior_null"] == 0.0
    assert res.to_json_dict()["t_star"] is None


def test_reference_patterns_all_validate():
    for p in reference_patterns():
        assert p.n == 100
        p.validate()


def test_cai_bounds_match_mpmath():
    lo, hi = cai_bounds_mp(200, 10)
    assert cai_lower(200, 10) == pytest.approx(lo, rel=1e-14)
    assert cai_lower(200, 10) == pytest.approx(1.7984014294607396, abs=1e-13)
    assert cai_upper(200, 10) == pytest.approx(hi, rel=1e-14)
    lo2, hi2 = cai_bounds_mp(1000, 3)
    assert cai_lower(1000, 3) == pytest.approx(lo2, rel=1e-14)
    assert cai_upper(1000, 3) == pytest.approx(hi2, rel=1e-14)


def test_cai_lower_negative_for_tiny_supports():
    assert cai_lower(10, 0) < 0
    assert cai_lower(10, 1) < 0


def test_failure_probability_bound():
    assert failure_probability_bound(0.0, 32.0) == pytest.approx(
        failure_floor_mp(0, 32), abs=1e-14
    )
    assert failure_probability_bound(0.0, 32.0) == pytest.approx(
        0.4586588670535492, abs=1e-14
    )
    assert failure_probability_bound(31.0, 32.0) == 0.0  # floor clamps
    with pytest.raises(ParameterError):
        failure_probability_bound(33.0, 32.0)
    with pytest.raises(ParameterError):
        failure_probability_bound(-1.0, 32.0)
    with pytest.raises(ParameterError):
        failure_probability_bound(0.0, 0.0)


def test_failure_probability_monotone_in_gap():
    vals = [failure_probability_bound(m, 40.0) for m in (0, 10, 20, 30, 39)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
