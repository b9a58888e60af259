"""Pure-numpy fallback for the projection kernel.

Same QP, same stopping rule as the compiled version, but sweeps run in
red/black order (all even free coordinates, then all odd) so each half-sweep
vectorizes: a coordinate couples only to its two neighbors, which sit in the
other parity class.  The iterates differ from the cyclic order, the unique
minimizer does not.
"""

import numpy as np


def cd_sweeps(g, t, z, free, max_sweeps, decrease_tol, kkt_tol):
    """Run sweeps in place on z; return (objective, sweeps_used, converged)."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    m = z.shape[0]
    if m != n - 1 or len(free) != m:
        raise ValueError("expected len(z) == len(free) == len(g) - 1")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")

    if t <= 0.0:
        return float(g @ g), 0, 1

    free_idx = np.flatnonzero(np.asarray(free, dtype=bool))
    halves = (free_idx[free_idx % 2 == 0], free_idx[free_idx % 2 == 1])
    gd = (g[1:] - g[:-1]) / (2.0 * t)
    zp = np.zeros(m + 2)
    zp[1:-1] = z

    prev_obj = np.inf
    obj = np.inf
    for sweep in range(1, max_sweeps + 1):
        for idx in halves:
            zp[idx + 1] = np.clip(gd[idx] + 0.5 * (zp[idx] + zp[idx + 2]), -1.0, 1.0)
        r = g + t * (zp[1:] - zp[:-1])
        obj = float(r @ r)
        if prev_obj - obj <= decrease_tol:
            grad = 2.0 * t * (r[:-1] - r[1:])
            zf = zp[1:-1][free_idx]
            gf = grad[free_idx]
            viol = np.where(
                zf >= 1.0,
                np.maximum(gf, 0.0),
                np.where(zf <= -1.0, np.maximum(-gf, 0.0), np.abs(gf)),
            )
            if viol.size == 0 or float(viol.max()) <= kkt_tol:
                z[:] = zp[1:-1]
                return obj, sweep, 1
        prev_obj = obj

    z[:] = zp[1:-1]
    return obj, max_sweeps, 0
