"""Closed-form lower bound on the number of measurements for TV recovery.

Everything here reduces to second moments of clamped Gaussians.  With g
standard normal and phi/Q its density and upper tail,

    J(c)      = E (g - c)_+^2            = (1 + c^2) Q(c) - c phi(c)
    phi2(z)   = E (|g| - z)_+^2          = 2 J(z)
    phi1(a,b) = E (|g + a| - b)_+^2      = J(b - a) + J(a + b)

For a signal of size n whose variation counts are (s1_plus, s1_minus, s2,
s3), the expected squared distance of a standard Gaussian to the dilated
subdifferential of the TV seminorm is

    psi(t) = s1_plus
           + s1_minus * (1 + 4 t^2)
           + s2 * phi1(t, t)
           + (n - 2 - s1 - s2) * phi2(2 t)
           + s3 * (1 + t^2)
           + (2 - s3) * phi2(t),

and m_hat = inf_{t >= 0} psi(t) lower-bounds the phase transition: with m
Gaussian measurements, m <= m_hat, recovery fails with probability at least
1 - 4 exp(-(m_hat - m)^2 / (16 m_hat)).

psi is convex in t with psi(0) = n.  The infimum either is attained at a
finite t or, exactly when s1_minus = 0 and s3 = 0, approached as t -> inf
with limit s1_plus + s2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from ._util import golden_min
from .errors import ParameterError
from .patterns import VariationPattern

__all__ = [
    "gauss_tail",
    "clamp_sq_moment",
    "phi1",
    "phi2",
    "psi",
    "psi_terms",
    "psi_limit",
    "minimize_psi",
    "BoundResult",
    "cai_lower",
    "cai_upper",
    "failure_probability_bound",
    "reference_patterns",
    "reference_bounds",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: Search interval for the dilation t; psi is flat to double precision well
#: before this point for every realizable pattern.
T_MAX = 20.0


def gauss_tail(z):
    """Upper tail Q(z) = P(g > z) of a standard normal, stable for large z."""
    return 0.5 * erfc(np.asarray(z, dtype=float) / _SQRT2)


def _gauss_pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def clamp_sq_moment(c):
    """J(c) = E (g - c)_+^2 for standard normal g, valid for any real c."""
    c = np.asarray(c, dtype=float)
    return (1.0 + np.square(c)) * gauss_tail(c) - c * _gauss_pdf(c)


def _as_nonneg(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be finite and >= 0, got {x!r}")
    return arr


def phi2(z):
    """E (|g| - z)_+^2 for z >= 0.  phi2(0) = 1, decreasing to 0."""
    arr = _as_nonneg(z, "z")
    out = 2.0 * clamp_sq_moment(arr)
    return float(out) if out.ndim == 0 else out


def phi1(a, b):
    """E (|g + a| - b)_+^2 for a, b >= 0.

    phi1(0, b) = phi2(b); phi1(t, t) -> 1/2 as t grows (the shifted lobe
    contributes J(0) = 1/2, the far lobe vanishes).
    """
    a_arr = _as_nonneg(a, "a")
    b_arr = _as_nonneg(b, "b")
    out = clamp_sq_moment(b_arr - a_arr) + clamp_sq_moment(a_arr + b_arr)
    return float(out) if out.ndim == 0 else out


def _term_counts(pattern: VariationPattern):
    n, s1p, s1m = pattern.n, pattern.s1_plus, pattern.s1_minus
    s2, s3 = pattern.s2, pattern.s3
    interior_null = n - 2 - s1p - s1m - s2
    return s1p, s1m, s2, interior_null, s3, 2 - s3


def _psi_values(t, pattern: VariationPattern):
    s1p, s1m, s2, s4, s3, edge = _term_counts(pattern)
    t = np.asarray(t, dtype=float)
    tt = np.square(t)
    return (
        s1p * np.ones_like(t),
        s1m * (1.0 + 4.0 * tt),
        s2 * phi1(t, t) if s2 else np.zeros_like(t),
        s4 * phi2(2.0 * t) if s4 else np.zeros_like(t),
        s3 * (1.0 + tt),
        edge * phi2(t) if edge else np.zeros_like(t),
    )


def psi(t, pattern: VariationPattern):
    """Expected squared distance to the t-dilated subdifferential.

    Accepts scalar or array t >= 0.  t = inf is allowed and returns the
    limit (+inf when it is not finite).
    """
    pattern.validate()
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(np.isnan(t_arr)):
        raise ParameterError(f"dilation t must be >= 0, got {t!r}")
    if np.any(np.isinf(t_arr)):
        if t_arr.ndim == 0:
            return psi_limit(pattern)
        out = np.where(np.isinf(t_arr), psi_limit(pattern), 0.0)
        finite = ~np.isinf(t_arr)
        out[finite] = sum(_psi_values(t_arr[finite], pattern))
        return out
    out = sum(_psi_values(t_arr, pattern))
    return float(out) if out.ndim == 0 else out


def psi_terms(t, pattern: VariationPattern) -> dict:
    """Per-class contributions at a scalar t (inf allowed), plus the total."""
    pattern.validate()
    t = float(t)
    if math.isinf(t):
        s1p, s1m, s2, _, s3, _ = _term_counts(pattern)
        vals = (
            float(s1p),
            math.inf if s1m else 0.0,
            0.5 * s2,
            0.0,
            math.inf if s3 else 0.0,
            0.0,
        )
    else:
        vals = tuple(float(v) for v in _psi_values(t, pattern))
    keys = (
        "consecutive_same",
        "consecutive_opposite",
        "individual",
        "interior_null",
        "tail_end",
        "end_null",
    )
    out = dict(zip(keys, vals))
    out["total"] = sum(vals)
    return out


def psi_limit(pattern: VariationPattern) -> float:
    """lim_{t -> inf} psi(t): s1_plus + s2/2 when s1_minus = s3 = 0, else inf."""
    pattern.validate()
    if pattern.s1_minus == 0 and pattern.s3 == 0:
        return pattern.s1_plus + 0.5 * pattern.s2
    return math.inf


@dataclass(frozen=True)
class BoundResult:
    """Minimized bound: m_hat = psi(t_star), with t_star = inf when the
    infimum is only approached in the limit."""

    pattern: VariationPattern
    m_hat: float
    t_star: float
    terms: dict

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.t_star)

    def to_json_dict(self) -> dict:
        return {
            "pattern": self.pattern.to_json_dict(),
            "m_hat": self.m_hat,
            "t_star": None if self.at_infinity else self.t_star,
            "at_infinity": self.at_infinity,
            "terms": dict(self.terms),
        }


def minimize_psi(pattern: VariationPattern, *, t_max: float = T_MAX, xtol: float = 1e-8) -> BoundResult:
    """Minimize psi over t >= 0 by golden section plus the explicit limit.

    psi is convex, so golden section on [0, t_max] locates any interior
    minimum to value accuracy far below 1e-6; the t -> inf limit is compared
    explicitly.  The result is clamped into [0, n] (psi(0) = n bounds it,
    up to the last floating-point ulp near a boundary minimum).
    """
    pattern.validate()
    s1p, s1m, s2, s4, s3, edge = _term_counts(pattern)

    def objective(t):
        tt = t * t
        val = s1p + s1m * (1.0 + 4.0 * tt) + s3 * (1.0 + tt)
        if s2:
            val += s2 * phi1(t, t)
        if s4:
            val += s4 * phi2(2.0 * t)
        if edge:
            val += edge * phi2(t)
        return val

    t_int, f_int = golden_min(objective, 0.0, t_max, xtol=xtol)
    limit = psi_limit(pattern)
    if limit <= f_int:
        m_hat, t_star = limit, math.inf
    else:
        m_hat, t_star = f_int, t_int
    m_hat = min(max(m_hat, 0.0), float(pattern.n))
    return BoundResult(pattern=pattern, m_hat=m_hat, t_star=t_star, terms=psi_terms(t_star, pattern))


def cai_lower(n: int, s: int) -> float:
    """Alternative square-root-scale lower bound, 9 sqrt(s n) / (50 pi) - 12 / (5 pi).

    Can be negative for small s n; callers clamp if they need a usable floor.
    """
    return 9.0 * math.sqrt(float(s) * float(n)) / (50.0 * math.pi) - 12.0 / (5.0 * math.pi)


def cai_upper(n: int, s: int) -> float:
    """Matching upper-scale estimate sqrt(32) (2 sqrt(5) + sqrt(10))^2 sqrt(n s) log(2n) + 1."""
    coeff = math.sqrt(32.0) * (2.0 * math.sqrt(5.0) + math.sqrt(10.0)) ** 2
    return coeff * math.sqrt(float(n) * float(s)) * math.log(2.0 * n) + 1.0


def failure_probability_bound(m: float, m_hat: float) -> float:
    """Guaranteed failure probability with m <= m_hat Gaussian measurements.

    Returns max(0, 1 - 4 exp(-(m_hat - m)^2 / (16 m_hat))).
    """
    if not (math.isfinite(m_hat) and m_hat > 0):
        raise ParameterError(f"need m_hat > 0, got {m_hat!r}")
    if not (0 <= m <= m_hat):
        raise ParameterError(f"need 0 <= m <= m_hat = {m_hat}, got m = {m!r}")
    return max(0.0, 1.0 - 4.0 * math.exp(-((m_hat - m) ** 2) / (16.0 * m_hat)))


def reference_patterns() -> list[VariationPattern]:
    """Eight patterns at n = 100 spanning the qualitative regimes.

    All have support size 10; they differ in how the ten variations split
    into consecutive same/opposite pairs, isolated jumps, and end effects.
    Served by the `table1` CLI subcommand.
    """
    rows = [
        (9, 0, 2, 0),
        (0, 9, 2, 0),
        (0, 8, 2, 2),
        (0, 9, 1, 1),
        (9, 0, 1, 1),
        (0, 0, 20, 0),
        (0, 1, 17, 1),
        (4, 5, 2, 0),
    ]
    return [VariationPattern(100, *row).validate() for row in rows]


def reference_bounds() -> list[BoundResult]:
    """minimize_psi over the reference patterns, in order."""
    return [minimize_psi(p) for p in reference_patterns()]
