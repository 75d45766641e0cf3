"""Winning-price CDFs built from atoms and reciprocal segments a/(b - x).

A ``PiecewiseCdf`` stores atoms explicitly and each segment as the exact
CDF value a/(b - x) on [lo, hi].  Evaluating F at x adds the atoms at or
below x to the continuous increments of the segments, so a valid object
satisfies F(lo) = a/(b - lo) at every segment start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, ParameterError, RangeError

CDF_TOL = 1e-12


@dataclass(frozen=True)
class ReciprocalSegment:
    a: float
    b: float
    lo: float
    hi: float

    def __post_init__(self):
        a, b, lo, hi = (float(self.a), float(self.b), float(self.lo), float(self.hi))
        if not (a > 0 and b > 0):
            raise InvalidInputError(f"segment needs a > 0 and b > 0, got a={a}, b={b}")
        if not (0 <= lo <= hi < b):
            raise InvalidInputError(f"segment needs 0 <= lo <= hi < b, got [{lo}, {hi}], b={b}")
        if a / (b - hi) > 1 + CDF_TOL:
            raise InvalidInputError(f"segment exceeds 1 at hi: a/(b-hi) = {a / (b - hi)}")
        for name, val in zip("ab", (a, b)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def value(self, x: float) -> float:
        return self.a / (self.b - x)

    @property
    def start(self) -> float:
        return self.value(self.lo)

    @property
    def end(self) -> float:
        return self.value(self.hi)

    def _clip(self, lo: float, hi: float) -> tuple[float, float] | None:
        l, r = max(lo, self.lo), min(hi, self.hi)
        return (l, r) if l < r else None

    def mass(self, lo: float = -math.inf, hi: float = math.inf) -> float:
        """Continuous probability on [lo, hi] within this segment."""
        iv = self._clip(lo, hi)
        return 0.0 if iv is None else self.value(iv[1]) - self.value(iv[0])

    def moment(self, lo: float = -math.inf, hi: float = math.inf) -> float:
        """Integral of x dF over [lo, hi] within this segment."""
        iv = self._clip(lo, hi)
        if iv is None:
            return 0.0
        l, r = iv
        a, b = self.a, self.b
        return a * b * (1.0 / (b - r) - 1.0 / (b - l)) + a * math.log((b - r) / (b - l))

    def survival_integral(self) -> float:
        """Integral of (1 - F) over [lo, hi]."""
        a, b, l, r = self.a, self.b, self.lo, self.hi
        return (r - l) + a * math.log((b - r) / (b - l))


@dataclass(frozen=True)
class PiecewiseCdf:
    atoms: Mapping[float, float]
    segments: tuple[ReciprocalSegment, ...]
    top: float

    def __post_init__(self):
        atoms = {float(x): float(m) for x, m in dict(self.atoms).items() if float(m) != 0.0}
        segs = tuple(sorted(self.segments, key=lambda s: s.lo))
        top = float(self.top)
        if any(m < 0 for m in atoms.values()):
            raise InvalidInputError("atom masses must be non-negative")
        if any(not 0 <= x <= top for x in atoms):
            raise InvalidInputError(f"atoms must lie in [0, top={top}]")
        for s, t in zip(segs, segs[1:]):
            if t.lo < s.hi:
                raise InvalidInputError("segments overlap")
        if segs and segs[-1].hi > top:
            raise InvalidInputError("segment extends past top")
        for s in segs:
            if any(s.lo < x < s.hi for x in atoms):
                raise InvalidInputError("atom inside a segment's interior")
        object.__setattr__(self, "atoms", dict(sorted(atoms.items())))
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "top", top)
        for s in segs:
            if abs(self.eval(s.lo) - s.start) > 1e-10:
                raise InvalidInputError(
                    f"segment on [{s.lo}, {s.hi}] starts at {s.start} but the CDF there is {self.eval(s.lo)}"
                )
        if abs(self.eval(top) - 1.0) > 1e-10:
            raise InvalidInputError(f"CDF at top is {self.eval(top)}, not 1")

    @classmethod
    def from_segments(cls, segments: Sequence[ReciprocalSegment], top: float | None = None,
                      atoms: Mapping[float, float] | None = None) -> "PiecewiseCdf":
        """Build a CDF whose atoms are the jumps implied by the segments.

        Explicit ``atoms`` are placed first; remaining jumps are inferred at
        segment starts, and any missing mass goes to an atom at ``top``.
        """
        segs = sorted(segments, key=lambda s: s.lo)
        top = float(segs[-1].hi if top is None else top)
        out = {float(x): float(m) for x, m in (atoms or {}).items()}
        for s in segs:
            below = _cumulative_level(out, segs, s.lo)
            jump = s.start - below
            if jump > CDF_TOL:
                out[s.lo] = out.get(s.lo, 0.0) + jump
            elif jump < -1e-10:
                raise InvalidInputError(f"segment at {s.lo} starts below the CDF level {below}")
        final = _cumulative_level(out, segs, top)
        if final < 1.0 - CDF_TOL:
            out[top] = out.get(top, 0.0) + (1.0 - final)
        return cls(out, tuple(segs), top)

    def eval(self, x: float) -> float:
        """Right-continuous F(x) for x in [0, top]."""
        x = float(x)
        if not (0.0 <= x <= self.top) or math.isnan(x):
            raise RangeError(f"x={x} outside [0, {self.top}]")
        return min(1.0, _cumulative_level(self.atoms, self.segments, x))

    __call__ = eval

    def inverse(self, p: float) -> float:
        """Generalized inverse inf{x : F(x) >= p}; flat regions return their left end."""
        p = float(p)
        if not (0.0 <= p <= 1.0):
            raise RangeError(f"p={p} outside [0, 1]")
        if p == 0.0:
            return 0.0
        for kind, x0, x1, c0, c1, seg in self._pieces():
            if c1 >= p:
                if kind == "atom" or p <= c0:
                    return x0
                return min(x1, max(x0, seg.b - seg.a / p))
        return self.top

    def _pieces(self):
        """(kind, x0, x1, level before, level after, segment) in price order."""
        items = [(x, 0, m) for x, m in self.atoms.items()] + [(s.lo, 1, s) for s in self.segments]
        items.sort(key=lambda t: (t[0], t[1]))
        level = 0.0
        out = []
        for x, kind, obj in items:
            if kind == 0:
                out.append(("atom", x, x, level, level + obj, None))
                level += obj
            else:
                out.append(("segment", obj.lo, obj.hi, obj.start, obj.end, obj))
                level = obj.end
        return out

    def expected_value(self) -> float:
        """Mean price as the integral of (1 - F) over [0, top], in closed form."""
        total = 0.0
        x_prev = 0.0
        level = 0.0
        for kind, x0, x1, c0, c1, seg in self._pieces():
            total += (x0 - x_prev) * (1.0 - level)
            if kind == "segment":
                total += seg.survival_integral()
            x_prev, level = x1, c1
        total += (self.top - x_prev) * (1.0 - level)
        return total

    def continuous_mass(self, lo: float, hi: float) -> float:
        return math.fsum(s.mass(lo, hi) for s in self.segments)

    def continuous_moment(self, lo: float, hi: float) -> float:
        return math.fsum(s.moment(lo, hi) for s in self.segments)

    def quantile_integral(self, u1: float, u2: float) -> float:
        """Integral of F^{-1}(u) du over [u1, u2] (the mean price paid on a quantile band)."""
        if not 0.0 <= u1 <= u2 <= 1.0 + CDF_TOL:
            raise RangeError(f"quantile band [{u1}, {u2}] not inside [0, 1]")
        total = 0.0
        for kind, x0, x1, c0, c1, seg in self._pieces():
            w1, w2 = max(u1, c0), min(u2, c1)
            if w2 <= w1:
                continue
            if kind == "atom":
                total += x0 * (w2 - w1)
            else:
                total += seg.b * (w2 - w1) - seg.a * math.log(w2 / w1)
        return total

    def breakpoints(self) -> list[float]:
        pts = {0.0, self.top, *self.atoms}
        for s in self.segments:
            pts.update((s.lo, s.hi))
        return sorted(pts)

    def samples(self, count: int) -> np.ndarray:
        """``count`` equally spaced (x, F(x)) rows on [0, top]."""
        if count < 2:
            raise InvalidInputError("need at least two samples")
        xs = np.linspace(0.0, self.top, count)
        return np.column_stack([xs, [self.eval(x) for x in xs]])

    def to_dict(self) -> dict:
        return {
            "atoms": [{"x": x, "mass": m} for x, m in self.atoms.items()],
            "segments": [{"a": s.a, "b": s.b, "lo": s.lo, "hi": s.hi} for s in self.segments],
            "top": self.top,
        }


def _cumulative_level(atoms: Mapping[float, float], segs: Iterable[ReciprocalSegment], x: float) -> float:
    level = math.fsum(m for p, m in atoms.items() if p <= x)
    for s in segs:
        if s.lo <= x:
            level += s.value(min(x, s.hi)) - s.start
    return level


def point_mass(x: float = 0.0) -> PiecewiseCdf:
    return PiecewiseCdf({float(x): 1.0}, (), float(x))


def expected_value(cdf: PiecewiseCdf) -> float:
    return cdf.expected_value()


def reciprocal_mean(a: float, b: float) -> float:
    """Mean of G(x) = a/(b - x) on [0, b - a] with its atom a/b at zero."""
    if not 0 < a <= b:
        raise ParameterError(f"need 0 < a <= b, got a={a}, b={b}")
    return b - a + a * math.log(a / b)


def reciprocal_cdf(a: float, b: float) -> PiecewiseCdf:
    if not 0 < a <= b:
        raise ParameterError(f"need 0 < a <= b, got a={a}, b={b}")
    if a == b:
        return point_mass(0.0)
    return PiecewiseCdf.from_segments([ReciprocalSegment(a, b, 0.0, b - a)])


def min_envelope(alpha: float, beta: float, v: float) -> PiecewiseCdf:
    """F(x) = min(alpha/(1 - x), beta/(v - x)) up to max(v - beta, 1 - alpha)."""
    alpha, beta, v = float(alpha), float(beta), float(v)
    if not (0 < alpha <= 1 and 0 < beta <= v <= 1):
        raise ParameterError(f"need 0 < alpha <= 1 and 0 < beta <= v <= 1, got {alpha}, {beta}, {v}")
    if min(alpha, beta / v) > 1:
        raise ParameterError("envelope starts above 1")
    if beta >= v * alpha:
        if alpha == 1.0:
            return point_mass(0.0)
        return PiecewiseCdf.from_segments([ReciprocalSegment(alpha, 1.0, 0.0, 1.0 - alpha)])
    top = max(v - beta, 1.0 - alpha)
    theta = (v * alpha - beta) / (alpha - beta)
    if theta >= v - beta:
        return PiecewiseCdf.from_segments([ReciprocalSegment(beta, v, 0.0, v - beta)], top)
    segs = [ReciprocalSegment(beta, v, 0.0, theta), ReciprocalSegment(alpha, 1.0, theta, 1.0 - alpha)]
    return PiecewiseCdf.from_segments(segs, top)


def envelope_crossover(alpha: float, beta: float, v: float) -> float:
    return (v * alpha - beta) / (alpha - beta)


def sup_deviation_utility(cdf: PiecewiseCdf, value: float) -> float:
    """sup over x in [0, top] of (value - x) F(x), ties counted for the deviator.

    On a segment (value - x) a/(b - x) is monotone (its derivative has the
    sign of b - value), and between pieces F is flat, so the supremum is
    attained at a breakpoint.
    """
    value = float(value)
    if not value > 0:
        raise InvalidInputError("value must be positive")
    return max((value - x) * cdf.eval(x) for x in cdf.breakpoints())
