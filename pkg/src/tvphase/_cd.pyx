# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Cyclic coordinate descent for the box-constrained tridiagonal QP

    min_z  sum_k (g_k + t (z_k - z_{k-1}))^2,   z_0 = z_n = 0,

where coordinates marked fixed stay at their preset value (+-1 on the
gradient support) and free coordinates are clamped to [-1, 1].  Each update
is the exact per-coordinate minimizer.  Iteration stops once the objective
decrease per sweep falls to decrease_tol and the KKT residual of the free
coordinates is at most kkt_tol; hitting max_sweeps first reports
converged = 0.
"""

from libc.math cimport fabs, INFINITY


def cd_sweeps(double[::1] g, double t, double[::1] z,
              const unsigned char[::1] free, Py_ssize_t max_sweeps,
              double decrease_tol, double kkt_tol):
    """Run sweeps in place on z; return (objective, sweeps_used, converged)."""
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t m = z.shape[0]
    cdef Py_ssize_t j, k, sweep
    cdef double inv2t, zl, zr, v, obj, prev_obj, prev_z, r, r_next, grad, kkt, viol

    if m != n - 1 or free.shape[0] != m:
        raise ValueError("expected len(z) == len(free) == len(g) - 1")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")

    if t <= 0.0:
        obj = 0.0
        for k in range(n):
            obj += g[k] * g[k]
        return obj, 0, 1

    inv2t = 0.5 / t
    prev_obj = INFINITY
    for sweep in range(1, max_sweeps + 1):
        for j in range(m):
            if free[j]:
                zl = z[j - 1] if j > 0 else 0.0
                zr = z[j + 1] if j < m - 1 else 0.0
                v = (g[j + 1] - g[j]) * inv2t + 0.5 * (zl + zr)
                if v > 1.0:
                    v = 1.0
                elif v < -1.0:
                    v = -1.0
                z[j] = v

        obj = 0.0
        prev_z = 0.0
        for k in range(n):
            v = z[k] if k < m else 0.0
            r = g[k] + t * (v - prev_z)
            obj += r * r
            prev_z = v

        if prev_obj - obj <= decrease_tol:
            kkt = 0.0
            prev_z = 0.0
            r = g[0] + t * z[0]
            for j in range(m):
                v = z[j + 1] if j < m - 1 else 0.0
                r_next = g[j + 1] + t * (v - z[j])
                if free[j]:
                    grad = 2.0 * t * (r - r_next)
                    if z[j] >= 1.0:
                        viol = grad if grad > 0.0 else 0.0
                    elif z[j] <= -1.0:
                        viol = -grad if grad < 0.0 else 0.0
                    else:
                        viol = fabs(grad)
                    if viol > kkt:
                        kkt = viol
                r = r_next
            if kkt <= kkt_tol:
                return obj, sweep, 1
        prev_obj = obj

    return obj, max_sweeps, 0
