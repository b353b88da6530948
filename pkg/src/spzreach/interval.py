"""Scalar interval arithmetic used for range bounding of expressions."""
from __future__ import annotations

from dataclasses import dataclass


class IntervalDivisionError(ArithmeticError):
    """Raised when dividing by an interval that contains zero."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(float(v), float(v))

    @staticmethod
    def of(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval.point(x)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, v, tol: float = 0.0) -> bool:
        return self.lo - tol <= v <= self.hi + tol

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other) -> "Interval":
        o = Interval.of(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        return self + (-Interval.of(other))

    def __rsub__(self, other) -> "Interval":
        return Interval.of(other) - self

    def __mul__(self, other) -> "Interval":
        o = Interval.of(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(p), max(p))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Interval":
        """Integer power with the tight even-power rule."""
        if k < 0 or int(k) != k:
            raise ValueError("interval powers must be non-negative integers")
        k = int(k)
        if k == 0:
            return Interval(1.0, 1.0)
        a, b = self.lo**k, self.hi**k
        if k % 2:
            return Interval(a, b)
        if self.lo >= 0:
            return Interval(a, b)
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(0.0, max(a, b))

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise IntervalDivisionError(f"division by an interval containing zero: [{self.lo}, {self.hi}]")
        return Interval(1.0 / self.hi, 1.0 / self.lo)

    def __truediv__(self, other) -> "Interval":
        return self * Interval.of(other).reciprocal()

    def __rtruediv__(self, other) -> "Interval":
        return Interval.of(other) * self.reciprocal()

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"
