"""Small shared helpers: scalar minimization and deterministic RNG splitting."""

import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, lo, hi, xtol=1e-8):
    """Minimize a unimodal scalar function on [lo, hi] by golden section.

    Returns ``(x, f(x))`` for the best probed point.  The exact endpoints are
    never evaluated; for a convex f whose minimum sits on the boundary the
    returned x lands within xtol of it.
    """
    if not hi > lo:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def spawn_rngs(rng, k):
    """Split a Generator into k independent child Generators.

    Children are spawned from the generator's seed sequence up front, so the
    i-th child is the same no matter in which order samples are later drawn.
    Repeated calls on the same generator advance its spawn counter and yield
    fresh, non-overlapping children.
    """
    bg = rng.bit_generator
    seed_seq = getattr(bg, "seed_seq", None)
    if seed_seq is None:  # numpy < 1.22 kept it private
        seed_seq = bg._seed_seq
    return [np.random.default_rng(child) for child in seed_seq.spawn(int(k))]


def mean_halfwidth(values):
    """Sample mean and normal-approximation 95% half-width (1.96 sigma / sqrt(k))."""
    arr = np.asarray(values, dtype=float)
    k = arr.size
    if k == 0:
        return math.nan, math.nan
    mean = float(arr.mean())
    if k == 1:
        return mean, math.inf
    half = 1.96 * float(arr.std(ddof=1)) / math.sqrt(k)
    return mean, half
