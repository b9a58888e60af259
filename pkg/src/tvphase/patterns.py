"""Gradient-sparse signals and their variation taxonomy.

A signal x in R^n is gradient-sparse when its forward difference

    d_i = x_{i+1} - x_i,   i = 1..n-1   (1-based)

has few nonzero entries.  The support S = {i : d_i != 0} induces a
classification of positions that drives the recovery bound:

* ``S1+`` / ``S1-``: i in S with i-1 in S and equal / opposite sign of d,
* ``S2``: i in S, 2 <= i <= n-1, with i-1 not in S,
* ``S2'``: i not in S, 2 <= i <= n-1, with i-1 in S,
* ``S3``: support touching an end, S intersected with {1, n-1},
* ``S4``: i not in S, 2 <= i <= n-1, with i-1 not in S.

The four classes S1+/S1-, S2, S2', S4 partition the interior positions
{2..n-1}, so their sizes add up to n-2.  S3 is counted on top of that: the
indices 1 and n-1 can land in S1/S2 classes and in S3 simultaneously.

Only the counts (s1_plus, s1_minus, s2 = |S2|+|S2'|, s3 = |S3|) enter the
bound; they are carried by :class:`VariationPattern`.  Each maximal run of
consecutive support indices contributes exactly 2 to s2 + s3, which gives
the parity and capacity rules enforced by :meth:`VariationPattern.validate`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, PatternInfeasibleError

__all__ = [
    "GradientSparseSignal",
    "VariationPattern",
    "SupportClassification",
    "gradient",
    "classify",
    "generate_random_support_signal",
    "generate_pattern_signal",
    "write_signal_csv",
    "read_signal_csv",
    "pattern_to_json",
    "pattern_from_json",
]


@dataclass(frozen=True)
class GradientSparseSignal:
    """A finite 1-D signal stored as an immutable float vector."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True).ravel()
        if arr.size < 3:
            raise DimensionError(f"signal needs n >= 3 samples, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("signal contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.size

    def gradient(self) -> np.ndarray:
        """Forward differences d_i = x_{i+1} - x_i, length n-1."""
        return np.diff(self.values)

    @property
    def support(self) -> tuple[int, ...]:
        """1-based indices of nonzero forward differences."""
        return tuple(int(i) + 1 for i in np.flatnonzero(self.gradient()))


@dataclass(frozen=True)
class VariationPattern:
    """Counts (s1_plus, s1_minus, s2, s3) of the variation classes at size n."""

    n: int
    s1_plus: int = 0
    s1_minus: int = 0
    s2: int = 0
    s3: int = 0

    @property
    def s1(self) -> int:
        return self.s1_plus + self.s1_minus

    @property
    def num_runs(self) -> int:
        """Number of maximal support runs: each contributes 2 to s2 + s3."""
        return (self.s2 + self.s3) // 2

    @property
    def support_size(self) -> int:
        """|S| = s1 + number of runs (each run of length L holds L-1 pairs)."""
        return self.s1 + self.num_runs

    def validate(self) -> "VariationPattern":
        """Check that some signal of size n realizes these counts.

        Raises :class:`ParameterError` for out-of-domain counts and
        :class:`PatternInfeasibleError` for structurally impossible
        combinations.  The checks are exact: a tuple passing here is
        realizable by at least one support/sign layout.
        """
        for name in ("n", "s1_plus", "s1_minus", "s2", "s3"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise ParameterError(f"{name} must be an integer, got {v!r}")
        if self.n < 3:
            raise DimensionError(f"need n >= 3, got n={self.n}")
        if min(self.s1_plus, self.s1_minus, self.s2, self.s3) < 0:
            raise ParameterError(f"negative variation count in {self}")
        if self.s3 > 2:
            raise ParameterError(f"s3 counts ends of {{1, n-1}}, so s3 <= 2; got {self.s3}")
        if (self.s2 + self.s3) % 2 != 0:
            raise PatternInfeasibleError(
                f"s2 + s3 = {self.s2 + self.s3} is odd; every support run "
                "contributes exactly two boundary variations"
            )
        if self.s1 + self.s2 > self.n - 2:
            raise PatternInfeasibleError(
                f"s1 + s2 = {self.s1 + self.s2} exceeds the {self.n - 2} "
                "interior positions"
            )
        runs = self.num_runs
        if runs == 0 and self.s1 > 0:
            raise PatternInfeasibleError(
                "consecutive pairs (s1 > 0) require at least one support run"
            )
        if self.s3 == 2 and runs == 1 and self.s1 != self.n - 2:
            raise PatternInfeasibleError(
                "a single run touching both ends spans every position, "
                f"forcing s1 = n - 2 = {self.n - 2}; got s1 = {self.s1}"
            )
        return self

    def to_json_dict(self) -> dict:
        return {
            "n": int(self.n),
            "s1_plus": int(self.s1_plus),
            "s1_minus": int(self.s1_minus),
            "s2": int(self.s2),
            "s3": int(self.s3),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "VariationPattern":
        try:
            p = cls(
                n=int(d["n"]),
                s1_plus=int(d.get("s1_plus", 0)),
                s1_minus=int(d.get("s1_minus", 0)),
                s2=int(d.get("s2", 0)),
                s3=int(d.get("s3", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed pattern object: {d!r}") from exc
        return p.validate()


@dataclass(frozen=True)
class SupportClassification:
    """Full classification of a signal's gradient support (1-based indices)."""

    n: int
    support: tuple[int, ...]
    signs: tuple[int, ...]
    s1_plus_set: frozenset[int] = field(repr=False)
    s1_minus_set: frozenset[int] = field(repr=False)
    s2_set: frozenset[int] = field(repr=False)
    s2_prime_set: frozenset[int] = field(repr=False)
    s3_set: frozenset[int] = field(repr=False)
    s4_set: frozenset[int] = field(repr=False)

    @property
    def pattern(self) -> VariationPattern:
        return VariationPattern(
            n=self.n,
            s1_plus=len(self.s1_plus_set),
            s1_minus=len(self.s1_minus_set),
            s2=len(self.s2_set) + len(self.s2_prime_set),
            s3=len(self.s3_set),
        )


def gradient(signal) -> np.ndarray:
    """Forward differences of a signal (array or GradientSparseSignal)."""
    if isinstance(signal, GradientSparseSignal):
        return signal.gradient()
    arr = np.asarray(signal, dtype=float).ravel()
    if arr.size < 3:
        raise DimensionError(f"signal needs n >= 3 samples, got {arr.size}")
    return np.diff(arr)


def classify(signal, *, atol: float = 0.0) -> SupportClassification:
    """Classify every gradient position of a signal.

    A difference counts as support when |d_i| > atol (default: exact
    nonzero).  The interior classes partition {2..n-1}; ends land in S3 on
    top of their interior class.
    """
    d = gradient(signal)
    n = d.size + 1
    in_s = np.abs(d) > atol
    sgn = np.sign(d)

    s1p, s1m, s2, s2p, s4 = set(), set(), set(), set(), set()
    for i in range(2, n):  # 1-based interior position, pairs d_{i-1}, d_i
        here, prev = in_s[i - 1], in_s[i - 2]
        if here and prev:
            (s1p if sgn[i - 1] == sgn[i - 2] else s1m).add(i)
        elif here:
            s2.add(i)
        elif prev:
            s2p.add(i)
        else:
            s4.add(i)
    s3 = {i for i in (1, n - 1) if in_s[i - 1]}

    support = tuple(int(i) + 1 for i in np.flatnonzero(in_s))
    signs = tuple(int(sgn[i - 1]) for i in support)
    return SupportClassification(
        n=n,
        support=support,
        signs=signs,
        s1_plus_set=frozenset(s1p),
        s1_minus_set=frozenset(s1m),
        s2_set=frozenset(s2),
        s2_prime_set=frozenset(s2p),
        s3_set=frozenset(s3),
        s4_set=frozenset(s4),
    )


def generate_random_support_signal(n: int, s: int, rng: np.random.Generator) -> GradientSparseSignal:
    """Draw a piecewise-constant signal with s jumps at uniform positions.

    The s support positions are sampled uniformly without replacement from
    {1..n-1}; the s+1 level values are standard normal, redrawn in the
    (measure-zero) event that two adjacent levels coincide.
    """
    if n < 3:
        raise DimensionError(f"need n >= 3, got n={n}")
    if not 0 <= s <= n - 1:
        raise ParameterError(f"need 0 <= s <= n-1 = {n - 1}, got s={s}")
    support0 = np.sort(rng.choice(n - 1, size=s, replace=False))
    levels = rng.standard_normal(s + 1)
    while s > 0 and np.any(np.diff(levels) == 0.0):
        levels = rng.standard_normal(s + 1)
    marks = np.zeros(n, dtype=int)
    marks[support0 + 1] = 1
    x = levels[np.cumsum(marks)]
    return GradientSparseSignal(x)


def _plan_runs(pattern: VariationPattern, rng: np.random.Generator):
    """Lay out support runs as (start, length) in 1-based gradient positions.

    Runs are separated by gaps of at least 2 so that every non-edge run
    contributes one S2 and one S2' position; the first run absorbs all the
    consecutive pairs.  s3 >= 1 pins the first run to the left end, s3 = 2
    also pins the last run to the right end.
    """
    runs = pattern.num_runs
    if runs == 0:
        return []
    lengths = [pattern.s1 + 1] + [1] * (runs - 1)
    left_edge = pattern.s3 >= 1
    right_edge = pattern.s3 == 2
    gaps = [0 if left_edge else 1] + [2] * (runs - 1) + [0 if right_edge else 1]
    slack = (pattern.n - 1) - (sum(lengths) + sum(gaps))
    if slack < 0:
        raise PatternInfeasibleError(
            f"{pattern}: layout with run gaps >= 2 needs "
            f"{sum(lengths) + sum(gaps)} gradient positions, have {pattern.n - 1}"
        )
    adjustable = [
        i for i in range(runs + 1)
        if not (i == 0 and left_edge) and not (i == runs and right_edge)
    ]
    if slack > 0 and adjustable:
        extra = rng.multinomial(slack, np.full(len(adjustable), 1.0 / len(adjustable)))
        for i, e in zip(adjustable, extra):
            gaps[i] += int(e)

    layout = []
    pos = 1 + gaps[0]
    for k, length in enumerate(lengths):
        if k > 0:
            pos += gaps[k]
        layout.append((pos, length))
        pos += length
    return layout


def generate_pattern_signal(pattern: VariationPattern, rng: np.random.Generator) -> GradientSparseSignal:
    """Draw a signal whose classification reproduces the given counts exactly.

    Jump magnitudes are uniform on [0.5, 1.5]; the sign sequence inside the
    pair-carrying run is a random shuffle of s1_plus same-sign and s1_minus
    opposite-sign transitions.  The layout keeps runs two apart, so some
    valid patterns at very small n are rejected as infeasible here even
    though a tighter packing would realize them.
    """
    pattern.validate()
    d = np.zeros(pattern.n - 1)
    for start, length in _plan_runs(pattern, rng):
        rel = np.concatenate([
            np.ones(pattern.s1_plus, dtype=int),
            -np.ones(pattern.s1_minus, dtype=int),
        ]) if length > 1 else np.empty(0, dtype=int)
        rng.shuffle(rel)
        sign = int(rng.choice((-1, 1)))
        for j in range(length):
            if j > 0:
                sign *= int(rel[j - 1])
            d[start - 1 + j] = sign * rng.uniform(0.5, 1.5)
    x = rng.standard_normal() + np.concatenate([[0.0], np.cumsum(d)])
    out = GradientSparseSignal(x)
    got = classify(out).pattern
    if got != pattern:
        raise RuntimeError(f"layout bug: asked for {pattern}, produced {got}")
    return out


def write_signal_csv(signal: GradientSparseSignal, path) -> None:
    """Write one value per line under a 'value' header."""
    values = signal.values if isinstance(signal, GradientSparseSignal) else np.asarray(signal, float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("value\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")


def read_signal_csv(path) -> GradientSparseSignal:
    """Read a single-column CSV; a leading non-numeric header line is skipped."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                if lineno == 0:
                    continue
                raise ParameterError(f"{path}: line {lineno + 1} is not a number: {text!r}")
    return GradientSparseSignal(np.asarray(values))


def pattern_to_json(pattern: VariationPattern) -> str:
    return json.dumps(pattern.to_json_dict())


def pattern_from_json(source) -> VariationPattern:
    """Parse a pattern from a JSON string or an already-decoded dict."""
    if isinstance(source, dict):
        return VariationPattern.from_json_dict(source)
    try:
        obj = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"invalid pattern JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParameterError(f"pattern JSON must be an object, got {type(obj).__name__}")
    return VariationPattern.from_json_dict(obj)
