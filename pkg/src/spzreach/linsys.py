"""Linear-flow operators with verified truncation remainders."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .convert import interval_enclose
from .ops import linear_map
from .sets import IntervalVector, Zonotope
from .spz import SparsePolyZonotope

DEFAULT_ETA = 6
ROUNDOFF_GUARD = 4.0


class FlowError(ArithmeticError):
    """The exponential series bound does not converge for the given step size."""


@dataclass(frozen=True)
class IntervalMatrix:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_2d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_2d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape:
            raise ValueError("interval matrix bounds have different shapes")
        if np.any(lo > hi):
            raise ValueError("interval matrix lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, center, radius) -> "IntervalMatrix":
        center = np.atleast_2d(np.asarray(center, dtype=float))
        radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
        return cls(center - radius, center + radius)

    @property
    def shape(self):
        return self.lo.shape

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def radius(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def contains(self, M, tol: float = 0.0) -> bool:
        M = np.asarray(M, dtype=float)
        return bool(np.all(self.lo - tol <= M) and np.all(M <= self.hi + tol))

    def __sub__(self, M) -> "IntervalMatrix":
        M = np.asarray(M, dtype=float)
        return IntervalMatrix(self.lo - M, self.hi - M)

    def mul_box(self, box: IntervalVector) -> IntervalVector:
        """Enclosure of ``{M x | M in self, x in box}``."""
        Mc, Mr = self.center, self.radius
        xc, xr = box.center, box.radius
        c = Mc @ xc
        r = np.abs(Mc) @ xr + Mr @ np.abs(xc) + Mr @ xr
        return IntervalVector(c - r, c + r)

    def mul_point(self, x) -> IntervalVector:
        return self.mul_box(IntervalVector.point(x))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class LinearFlow:
    """Operators of ``x' = A x + v`` over one step ``dt``.

    ``eAdt`` encloses e^{A dt}; ``Gamma`` encloses the integral of e^{As}
    over [0, dt]; ``Gamma_abs`` bounds the integral of |e^{As}| entrywise;
    ``Gamma_tau`` encloses the integral of e^{As} over [0, t] for every t in
    [0, dt]; ``F`` encloses e^{At} - I - (t/dt)(e^{A dt} - I) for t in [0, dt].
    """

    A: np.ndarray
    dt: float
    eta: int
    eAdt: IntervalMatrix
    Gamma: IntervalMatrix
    Gamma_abs: np.ndarray
    Gamma_tau: IntervalMatrix
    F: IntervalMatrix
    remainder: float


def exp_remainder(a: float, eta: int) -> float:
    """Bound on the tail sum_{i > eta} a^i / i! for ``0 <= a < eta + 2``."""
    if a == 0:
        return 0.0
    return a ** (eta + 1) / factorial(eta + 1) / (1.0 - a / (eta + 2))


def flow_operators(A, dt: float, eta: int = DEFAULT_ETA) -> LinearFlow:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if not dt > 0:
        raise ValueError("time step must be positive")
    if eta < 2:
        raise ValueError("series order must be at least 2")
    a = float(np.abs(A * dt).sum(axis=1).max()) if n else 0.0
    if a >= eta + 2:
        raise FlowError(
            f"||A dt||_inf = {a:.4g} violates the series bound (< {eta + 2}); choose a smaller dt"
        )
    # series tail plus a guard for round-off in the truncated sums
    eps = exp_remainder(a, eta)
    if a > 0:
        eps += ROUNDOFF_GUARD * (eta + 2) * np.finfo(float).eps * np.exp(a)

    powers = [np.eye(n)]
    abs_powers = [np.eye(n)]
    absA = np.abs(A)
    for _ in range(eta):
        powers.append(powers[-1] @ A)
        abs_powers.append(abs_powers[-1] @ absA)

    T = sum(powers[i] * dt**i / factorial(i) for i in range(eta + 1))
    G = sum(powers[i] * dt ** (i + 1) / factorial(i + 1) for i in range(eta + 1))
    G_abs = sum(abs_powers[i] * dt ** (i + 1) / factorial(i + 1) for i in range(eta + 1)) + eps * dt

    tau_lo = np.zeros((n, n))
    tau_hi = np.zeros((n, n))
    for i in range(eta + 1):
        term = powers[i] * dt ** (i + 1) / factorial(i + 1)
        tau_lo += np.minimum(term, 0.0)
        tau_hi += np.maximum(term, 0.0)

    F_lo = np.zeros((n, n))
    F_hi = np.zeros((n, n))
    for i in range(2, eta + 1):
        kappa = (i ** (-i / (i - 1)) - i ** (-1 / (i - 1))) * dt**i
        term = kappa * powers[i] / factorial(i)
        F_lo += np.minimum(term, 0.0)
        F_hi += np.maximum(term, 0.0)

    return LinearFlow(
        A=A,
        dt=float(dt),
        eta=eta,
        eAdt=IntervalMatrix.around(T, eps),
        Gamma=IntervalMatrix.around(G, eps * dt),
        Gamma_abs=G_abs,
        Gamma_tau=IntervalMatrix(tau_lo - eps * dt, tau_hi + eps * dt),
        F=IntervalMatrix(F_lo - eps, F_hi + eps),
        remainder=eps,
    )


def _as_box(V) -> IntervalVector:
    if isinstance(V, IntervalVector):
        return V
    if isinstance(V, Zonotope):
        return V.interval()
    return interval_enclose(V)


def _box_spz(box: IntervalVector) -> SparsePolyZonotope:
    GI = np.diag(box.radius)
    GI = GI[:, box.radius > 0]
    return SparsePolyZonotope(box.center.reshape(-1, 1), GI, np.zeros((0, 1), dtype=np.int64), np.zeros(0))


def input_reach_box(flow: LinearFlow, V) -> IntervalVector:
    """Box enclosing the end-of-step response to inputs varying inside ``V``."""
    box = _as_box(V)
    c = flow.Gamma.mul_point(box.center)
    r = flow.Gamma_abs @ box.radius
    return IntervalVector(c.lo - r, c.hi + r)


def input_reach(flow: LinearFlow, V) -> SparsePolyZonotope:
    """Enclosure of int_0^dt e^{A(dt - s)} v(s) ds for any v(s) in ``V``.

    The input set is boxed; its center is mapped through ``Gamma`` and its
    radius through ``Gamma_abs``, which bounds the time-varying part.
    """
    return _box_spz(input_reach_box(flow, V))


def input_reach_tau(flow: LinearFlow, V) -> IntervalVector:
    """Box enclosing the input response at every time in [0, dt]."""
    box = _as_box(V)
    c = flow.Gamma_tau.mul_point(box.center)
    r = flow.Gamma_abs @ box.radius
    return IntervalVector(c.lo - r, c.hi + r)


def interval_mat_mul_set(M: IntervalMatrix, pz: SparsePolyZonotope) -> SparsePolyZonotope:
    """Enclosure of ``{M x | M in M, x in pz}``.

    The center matrix is applied exactly; the radius matrix times the
    absolute interval hull of ``pz`` adds independent generators.
    """
    out = linear_map(M.center, pz)
    if not np.any(M.radius):
        return out
    hull = interval_enclose(pz)
    mag = np.maximum(np.abs(hull.lo), np.abs(hull.hi))
    r = M.radius @ mag
    extra = np.diag(r)[:, r > 0]
    return out.replace(GI=np.hstack([out.GI, extra]))


def interval_mat_mul_zono(M: IntervalMatrix, z: Zonotope) -> Zonotope:
    out = M.center @ z
    if not np.any(M.radius):
        return out
    hull = z.interval()
    mag = np.maximum(np.abs(hull.lo), np.abs(hull.hi))
    r = M.radius @ mag
    return Zonotope(out.c, np.hstack([out.G, np.diag(r)[:, r > 0]]))
