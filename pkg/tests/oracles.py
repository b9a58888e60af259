"""Independent reference implementations used only by the tests.

Each oracle recomputes a quantity through a route that shares no code (and
ideally no method) with the package: quadrature instead of closed forms,
exhaustive enumeration instead of classification logic or LP duality,
interval reasoning instead of algebraic case analysis, and the classic
minimax identity instead of pool-adjacent-violators.
"""

import itertools
import math

import numpy as np
from scipy.integrate import quad

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _pdf(x):
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def J_quad(c):
    """E (g - c)_+^2 by adaptive quadrature."""
    upper = max(c, 0.0) + 16.0
    val, _ = quad(lambda x: (x - c) ** 2 * _pdf(x), c, upper, epsabs=1e-13, epsrel=1e-13)
    return val


def phi2_quad(z):
    """E (|g| - z)_+^2 by quadrature (two symmetric lobes)."""
    return 2.0 * J_quad(z)


def phi1_quad(a, b):
    """E (|g + a| - b)_+^2 by quadrature over the two active regions."""
    return J_quad(b - a) + J_quad(a + b)


def brute_variation_counts(d):
    """Literal set-builder classification of a difference vector.

    Returns (s1_plus, s1_minus, s2, s2_prime, s3, s4) with s2 and s2' kept
    separate; indices are 1-based as in the definitions.
    """
    d = list(d)
    n = len(d) + 1
    S = {i for i in range(1, n) if d[i - 1] != 0}

    def sgn(i):
        return (d[i - 1] > 0) - (d[i - 1] < 0)

    s1p = sum(1 for i in range(2, n) if i in S and i - 1 in S and sgn(i) == sgn(i - 1))
    s1m = sum(1 for i in range(2, n) if i in S and i - 1 in S and sgn(i) != sgn(i - 1))
    s2 = sum(1 for i in range(2, n) if i in S and i - 1 not in S)
    s2p = sum(1 for i in range(2, n) if i not in S and i - 1 in S)
    s3 = sum(1 for i in (1, n - 1) if i in S)
    s4 = sum(1 for i in range(2, n) if i not in S and i - 1 not in S)
    return s1p, s1m, s2, s2p, s3, s4


def projection_objective(g, t, z):
    """sum_k (g_k + t (z_k - z_{k-1}))^2 with z_0 = z_n = 0."""
    g = np.asarray(g, dtype=float)
    zp = np.concatenate([[0.0], np.asarray(z, dtype=float), [0.0]])
    r = g + t * (zp[1:] - zp[:-1])
    return float(r @ r)


def grid_projection_oracle(g, t, support, signs, step=1e-3):
    """Exhaustive grid search over the free coordinates of z.

    support/signs are 1-based; free coordinates sweep [-1, 1] in the given
    step.  Only intended for at most two free coordinates.
    """
    g = np.asarray(g, dtype=float)
    m = g.size - 1
    z = np.zeros(m)
    fixed = set()
    for i, s in zip(support, signs):
        z[i - 1] = float(s)
        fixed.add(i - 1)
    free = [j for j in range(m) if j not in fixed]
    if len(free) > 2:
        raise ValueError("grid oracle supports at most 2 free coordinates")
    axis = np.arange(-1.0, 1.0 + step / 2, step)
    if not free:
        return projection_objective(g, t, z)
    # residual entry k sees z_j with weight +1 at k == j, -1 at k == j + 1;
    # sweep the free values on a broadcast grid, one residual entry at a time
    zp = np.concatenate([[0.0], z, [0.0]])
    base = g + t * (zp[1:] - zp[:-1])
    if len(free) == 1:
        grids = [axis]
    else:
        grids = [axis[:, None], axis[None, :]]
    obj = 0.0
    for k in range(g.size):
        rk = base[k]
        for j, grid in zip(free, grids):
            if k == j:
                rk = rk + t * grid
            elif k == j + 1:
                rk = rk - t * grid
        obj = obj + rk * rk
    return float(np.min(obj))


def clamp_bound_oracle(g, t, support, signs):
    """Per-coordinate interval bound on the projection objective.

    Coordinate k of the residual is g_k + t (z_k - z_{k-1}); with each z
    ranging over its admissible interval, z_k - z_{k-1} ranges over an
    interval [lo, hi], and min of the square over an interval is 0 when it
    straddles 0.  Summing the per-coordinate minima lower-bounds the joint
    minimum because the coupling is ignored.
    """
    g = np.asarray(g, dtype=float)
    n = g.size
    iv = {0: (0.0, 0.0), n: (0.0, 0.0)}
    for i in range(1, n):
        iv[i] = (-1.0, 1.0)
    for i, s in zip(support, signs):
        iv[i] = (float(s), float(s))
    total = 0.0
    for k in range(1, n + 1):
        lo_k, hi_k = iv[k]
        lo_p, hi_p = iv[k - 1]
        lo = g[k - 1] + t * (lo_k - hi_p)
        hi = g[k - 1] + t * (hi_k - lo_p)
        if lo <= 0.0 <= hi:
            total += 0.0
        else:
            total += min(lo * lo, hi * hi)
    return total


def tv_lp_enumeration_oracle(A, y):
    """Exact TV-LP optimum by enumerating zero patterns of the gradient.

    For m < n generic measurements, some optimum has at least n - m zero
    differences, so checking every square system [A; D_Z] x = [y; 0] with
    |Z| = n - m finds the optimal objective.  Returns (objective, x).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m, n = A.shape
    if not 1 <= m < n:
        raise ValueError("oracle needs 1 <= m < n")
    D = np.eye(n - 1, n, k=1) - np.eye(n - 1, n)
    best_obj, best_x = math.inf, None
    rhs = np.concatenate([y, np.zeros(n - m)])
    for Z in itertools.combinations(range(n - 1), n - m):
        M = np.vstack([A, D[list(Z)]])
        try:
            x = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        obj = float(np.abs(np.diff(x)).sum())
        if obj < best_obj:
            best_obj, best_x = obj, x
    return best_obj, best_x


def isotonic_minimax_oracle(y, w):
    """Weighted isotonic regression via the classic minimax identity:
    fit_i = max_{j <= i} min_{k >= j} weighted mean of y[j..k]."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    n = y.size
    out = np.empty(n)
    for i in range(n):
        best = -math.inf
        for j in range(i + 1):
            worst = math.inf
            for k in range(j, n):
                avg = float((y[j : k + 1] * w[j : k + 1]).sum() / w[j : k + 1].sum())
                worst = min(worst, avg)
            best = max(best, worst)
        out[i] = best
    return out


def cai_bounds_mp(n, s):
    """High-precision evaluation of the square-root-scale bounds."""
    import mpmath as mp

    mp.mp.dps = 50
    n, s = mp.mpf(n), mp.mpf(s)
    lower = 9 * mp.sqrt(s * n) / (50 * mp.pi) - mp.mpf(12) / (5 * mp.pi)
    upper = mp.sqrt(32) * (2 * mp.sqrt(5) + mp.sqrt(10)) ** 2 * mp.sqrt(n * s) * mp.log(2 * n) + 1
    return float(lower), float(upper)


def failure_floor_mp(m, m_hat):
    import mpmath as mp

    mp.mp.dps = 50
    val = 1 - 4 * mp.exp(-((mp.mpf(m_hat) - m) ** 2) / (16 * mp.mpf(m_hat)))
    return float(max(0, val))
