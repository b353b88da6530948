"""Companion set representations: zonotopes, intervals, polytopes, Taylor models."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry


@dataclass(frozen=True)
class IntervalVector:
    """Axis-aligned box ``[lo, hi]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float)).reshape(-1)
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float)).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("interval bounds have different shapes")
        if np.any(lo > hi):
            raise ValueError("interval lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "IntervalVector":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls(x, x)

    @classmethod
    def zeros(cls, n: int) -> "IntervalVector":
        return cls(np.zeros(n), np.zeros(n))

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def volume(self) -> float:
        return float(np.prod(self.width))

    def __add__(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(self.lo + other.lo, self.hi + other.hi)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def contains_interval(self, other: "IntervalVector") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))

    def hull(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def corners(self) -> np.ndarray:
        n = self.dim
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n, indexing="ij")).reshape(n, -1).T
        return self.center + signs * self.radius

    def to_zonotope(self) -> "Zonotope":
        return Zonotope(self.center, np.diag(self.radius))

    def __repr__(self) -> str:
        return f"IntervalVector(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


@dataclass(frozen=True)
class Zonotope:
    """Zonotope ``<c, G>`` = { c + G beta | beta in [-1, 1]^l }."""

    c: np.ndarray
    G: np.ndarray

    # let ``ndarray @ Zonotope`` dispatch to __rmatmul__
    __array_ufunc__ = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float)).reshape(-1)
        G = np.asarray(self.G, dtype=float)
        G = G.reshape(len(c), -1) if G.size else np.zeros((len(c), 0))
        if not np.all(np.isfinite(c)):
            raise ValueError("zonotope center must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "G", G)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    @property
    def order(self) -> float:
        return self.G.shape[1] / self.dim

    def interval(self) -> IntervalVector:
        r = np.abs(self.G).sum(axis=1)
        return IntervalVector(self.c - r, self.c + r)

    def support(self, d) -> float:
        d = np.asarray(d, dtype=float)
        return float(d @ self.c + np.abs(d @ self.G).sum())

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        return geometry.zonotope_contains(self.c, self.G, points, tol)

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        beta = rng.uniform(-1, 1, size=(k, self.G.shape[1]))
        return self.c + beta @ self.G.T

    def __add__(self, other: "Zonotope") -> "Zonotope":
        return Zonotope(self.c + other.c, np.hstack([self.G, other.G]))

    def __rmatmul__(self, M) -> "Zonotope":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return Zonotope(M @ self.c, M @ self.G)

    def polygon(self) -> np.ndarray:
        """Counter-clockwise vertices of a planar zonotope."""
        if self.dim != 2:
            raise ValueError("polygon() requires a 2-D zonotope")
        G = self.G[:, np.any(self.G != 0, axis=0)]
        if G.shape[1] == 0:
            return self.c.reshape(1, 2)
        # orient generators into the upper half plane and sort by angle
        G = np.where((G[1] < 0) | ((G[1] == 0) & (G[0] < 0)), -G, G)
        angles = np.arctan2(G[1], G[0])
        G = G[:, np.argsort(angles, kind="stable")]
        start = self.c - G.sum(axis=1)
        pts = [start]
        for g in (2 * G).T:
            pts.append(pts[-1] + g)
        for g in (2 * G).T:
            pts.append(pts[-1] - g)
        return geometry.convex_hull_2d(np.array(pts[:-1]))


@dataclass(frozen=True)
class Polytope:
    """Polytope in vertex representation; rows of ``V`` are the vertices."""

    V: np.ndarray

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.V, dtype=float))
        if V.shape[0] < 1:
            raise ValueError("a polytope needs at least one vertex")
        if not np.all(np.isfinite(V)):
            raise ValueError("polytope vertices must be finite")
        object.__setattr__(self, "V", V)

    @property
    def dim(self) -> int:
        return self.V.shape[1]

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        return geometry.polytope_contains(self.V, points, tol)

    def interval(self) -> IntervalVector:
        return IntervalVector(self.V.min(axis=0), self.V.max(axis=0))


@dataclass(frozen=True)
class SupportValue:
    direction: np.ndarray
    bound: float


@dataclass(frozen=True)
class TaylorModel:
    """Vector of polynomials plus an interval remainder over a box domain.

    ``coefficients[i]`` and ``exponents[i]`` describe output dimension ``i``:
    ``w_i(x) = sum_j coefficients[i][j] * prod_k x_k ** exponents[i][k, j]``.
    """

    coefficients: Sequence[np.ndarray]
    exponents: Sequence[np.ndarray]
    remainder: IntervalVector
    domain: IntervalVector

    def __post_init__(self):
        s = self.domain.dim
        coeffs, exps = [], []
        if len(self.coefficients) != len(self.exponents):
            raise ValueError("coefficients and exponents differ in length")
        if len(self.coefficients) != self.remainder.dim:
            raise ValueError("remainder dimension does not match polynomial count")
        for b, e in zip(self.coefficients, self.exponents):
            b = np.atleast_1d(np.asarray(b, dtype=float))
            e = np.asarray(e, dtype=float).reshape(s, len(b)) if len(b) else np.zeros((s, 0))
            if np.any(e < 0) or not np.all(np.equal(np.mod(e, 1), 0)):
                raise ValueError("Taylor model exponents must be non-negative integers")
            coeffs.append(b)
            exps.append(e.astype(np.int64))
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "exponents", exps)

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def evaluate(self, x, y=None) -> np.ndarray:
        """Evaluate polynomials at domain points ``x`` (k, s) plus remainder ``y``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty((len(x), self.dim))
        for i, (b, e) in enumerate(zip(self.coefficients, self.exponents)):
            out[:, i] = np.prod(x[:, :, None] ** e[None], axis=1) @ b
        if y is not None:
            out = out + y
        return out
