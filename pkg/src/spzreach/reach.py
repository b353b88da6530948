"""Reachability of nonlinear ODEs by conservative polynomialization.

Each step abstracts f by its second-order Taylor expansion around the
center of the current set.  The quadratic part acting on the current set is
kept as a polynomial input that shares factors with the state, so the
propagated set stays dependent on the initial factors.  Everything else
(in-step variation, inputs, third-order remainder) is bounded by intervals
that are found with an enlarge-and-check fixed point.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dynamics
from .convert import interval_enclose, zono_enclose
from .dynamics import NonlinearSystem
from .linsys import (
    DEFAULT_ETA,
    LinearFlow,
    flow_operators,
    input_reach,
    input_reach_tau,
    interval_mat_mul_set,
    interval_mat_mul_zono,
)
from .ops import cartesian_product_zono, exact_add, minkowski_sum_zono, quad_map, translate
from .reduce import reduce, restructure, vol_ratio
from .sets import IntervalVector, Zonotope
from .spz import SparsePolyZonotope

log = logging.getLogger(__name__)


class FixedPointError(RuntimeError):
    """The linearization-error loop did not settle within the iteration limit."""


@dataclass(frozen=True)
class ReachConfig:
    dt: float
    t_f: float
    lam: float = 0.1
    rho_d: float = 50.0
    mu_d: float = 1.0
    p_d: int = 50
    eta: int = DEFAULT_ETA
    max_iter: int = 10
    reduction: str = "girard"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_f > 0:
            raise ValueError("t_f must be positive")
        if abs(self.steps * self.dt - self.t_f) > 1e-9 * max(1.0, self.t_f):
            raise ValueError(f"t_f = {self.t_f} is not a multiple of dt = {self.dt}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    @property
    def steps(self) -> int:
        return int(round(self.t_f / self.dt))


@dataclass
class StepResult:
    step: int
    t_start: float
    t_end: float
    R_start: SparsePolyZonotope
    R_tau: SparsePolyZonotope
    iterations: int
    vol_ratio: float
    restructured: bool
    order_reduced: float
    psi: IntervalVector

    def tau_hull(self) -> IntervalVector:
        return interval_enclose(self.R_tau)


@dataclass
class ReachResult:
    steps: list = field(default_factory=list)
    final: SparsePolyZonotope | None = None
    wall_time: float = 0.0

    @property
    def restructure_count(self) -> int:
        return sum(s.restructured for s in self.steps)

    @property
    def iterations(self) -> np.ndarray:
        return np.array([s.iterations for s in self.steps])


def enlarge(psi: IntervalVector, lam: float) -> IntervalVector:
    """Scale an interval about its center by ``1 + lam``."""
    if not lam > 0:
        raise ValueError("enlargement factor must be positive")
    c, r = psi.center, psi.radius * (1.0 + lam)
    return IntervalVector(c - r, c + r)


def post_delta(R_ts: SparsePolyZonotope, psi_bar: IntervalVector, flow: LinearFlow) -> Zonotope:
    """Zonotope containing x(t) - x(t_s) for t in [t_s, t_s + dt].

    Homogeneous part: the segment towards (e^{A dt} - I) x plus curvature;
    inhomogeneous part: the input response box over the whole step.
    """
    n = R_ts.n
    Z = zono_enclose(R_ts)
    Y = interval_mat_mul_zono(flow.eAdt - np.eye(n), Z)
    # conv({0}, <c, G>) is inside <c/2, [c/2, G]>
    hull0 = Zonotope(0.5 * Y.c, np.hstack([0.5 * Y.c.reshape(-1, 1), Y.G]))
    curv = flow.F.mul_box(Z.interval())
    inp = input_reach_tau(flow, psi_bar)
    box = curv + inp
    G = np.hstack([hull0.G, np.diag(box.radius)])
    G = G[:, np.any(G != 0, axis=0)]
    return Zonotope(hull0.c + box.center, G)


def var_inputs(Zz: Zonotope, RzDelta: Zonotope, Udelta: IntervalVector, B, D) -> IntervalVector:
    """Interval of the abstraction inputs caused by in-step variation.

    With a = (x(t_s) - x*, 0) and d = (x(t) - x(t_s), u - u*), the quadratic
    term splits as q(a) / 2 + (a + d/2)^T D d; the first part is handled
    exactly, this returns ``B U^Delta`` plus a bound on the second.
    """
    B = np.asarray(B, dtype=float)
    n = D.shape[0]
    d = IntervalVector(
        np.concatenate([RzDelta.interval().lo, Udelta.lo]),
        np.concatenate([RzDelta.interval().hi, Udelta.hi]),
    )
    quad = dynamics.quadratic_interval(D, Zz.interval(), d)
    if B.size:
        c = B @ Udelta.center
        r = np.abs(B) @ Udelta.radius
        bu = IntervalVector(c - r, c + r)
    else:
        bu = IntervalVector.zeros(n)
    return bu + quad


def lagrange_remainder(R_tau: SparsePolyZonotope, sys: NonlinearSystem, z_star, U: IntervalVector) -> IntervalVector:
    hull = interval_enclose(R_tau)
    box = IntervalVector(np.concatenate([hull.lo, U.lo]), np.concatenate([hull.hi, U.hi]))
    return dynamics.lagrange_remainder(sys, box, z_star)


def post(R_ts: SparsePolyZonotope, flow: LinearFlow, V_ts: SparsePolyZonotope, Vdelta: IntervalVector, L: IntervalVector) -> SparsePolyZonotope:
    """e^{A dt} R (+) Gamma V with exact addition, plus the response to Vdelta + L."""
    F1 = interval_mat_mul_set(flow.eAdt, R_ts)
    F2 = interval_mat_mul_set(flow.Gamma, V_ts)
    rest = input_reach(flow, Vdelta + L)
    z = Zonotope(rest.G[:, 0], rest.GI)
    return minkowski_sum_zono(exact_add(F1, F2), z)


def _point_zonotope(m: int) -> Zonotope:
    return Zonotope(np.zeros(m), np.zeros((m, 0)))


def reach_analyze(
    sys: NonlinearSystem,
    X0: SparsePolyZonotope,
    U: IntervalVector | None,
    cfg: ReachConfig,
    on_step: Callable[[StepResult], None] | None = None,
) -> ReachResult:
    n, m = sys.n, sys.m
    if X0.n != n:
        raise ValueError(f"initial set has dimension {X0.n}, system has {n} states")
    if U is None:
        U = IntervalVector(np.zeros(m), np.zeros(m))
    if U.dim != m:
        raise ValueError(f"input set has dimension {U.dim}, system has {m} inputs")

    started = time.perf_counter()
    result = ReachResult()
    R = X0
    psi = IntervalVector.zeros(n)
    U_s = _point_zonotope(m)

    for s in range(cfg.steps):
        t0, t1 = s * cfg.dt, (s + 1) * cfg.dt
        x_star = interval_enclose(R).center
        u_star = U.center
        tay = sys.taylor(np.concatenate([x_star, u_star]))
        flow = flow_operators(tay.A, cfg.dt, cfg.eta)

        R_d = translate(R, -x_star)
        U_delta = IntervalVector(U.lo - u_star, U.hi - u_star)
        R_dU = cartesian_product_zono(R_d, U_s) if m else R_d
        V = translate(quad_map(R_dU, 0.5 * tay.D), tay.w - tay.A @ x_star)
        Zr = zono_enclose(R_d)
        Zz = Zonotope(np.concatenate([Zr.c, np.zeros(m)]), np.vstack([Zr.G, np.zeros((m, Zr.G.shape[1]))]))
        V_box = interval_enclose(V)

        for it in range(1, cfg.max_iter + 1):
            psi_bar = enlarge(psi, cfg.lam)
            R_delta = post_delta(R, psi_bar, flow)
            V_delta = var_inputs(Zz, R_delta, U_delta, tay.B, tay.D)
            R_tau = minkowski_sum_zono(R, R_delta)
            L = lagrange_remainder(R_tau, sys, tay.z_star, U)
            psi = V_box + V_delta + L
            if psi_bar.contains_interval(psi):
                break
        else:
            raise FixedPointError(
                f"linearization error did not settle in {cfg.max_iter} iterations at step {s} "
                f"(t = {t0:g}); try a smaller dt or a larger lam"
            )

        R_next = reduce(post(R, flow, V, V_delta, L), cfg.rho_d, cfg.reduction)
        order_reduced = R_next.order
        ratio = vol_ratio(R_next)
        restructured = ratio > cfg.mu_d
        if restructured:
            R_next = restructure(R_next, cfg.p_d)
        if not np.all(np.isfinite(R_next.G)) or not np.all(np.isfinite(R_next.GI)):
            raise FloatingPointError(f"reachable set became non-finite at step {s}")

        rec = StepResult(s, t0, t1, R, R_tau, it, ratio, restructured, order_reduced, psi)
        result.steps.append(rec)
        if on_step is not None:
            on_step(rec)
        log.debug("step %d t=%g iterations=%d order=%.2f", s, t1, it, order_reduced)
        R = R_next

    result.final = R
    result.wall_time = time.perf_counter() - started
    return result


def dependency_example(dt: float = 1.0, eta: int = 10):
    """One post step of x' = -x + x^2 from {alpha}: exact-addition and zonotope variants.

    Returns ``(exact, zono)`` where ``exact`` is F1 (+) F2 computed with
    exact addition and ``zono`` the same sum after enclosing F2 by a
    zonotope and adding with the Minkowski sum.
    """
    sys = dynamics.parse_model("system quad\nstates x\ndynamics\nx' = -x + x^2\n")
    R0 = SparsePolyZonotope(np.array([[1.0]]), None, np.array([[1]]))
    tay = sys.taylor(np.zeros(1))
    flow = flow_operators(tay.A, dt, eta)
    V = translate(quad_map(R0, 0.5 * tay.D), tay.w)
    F1 = interval_mat_mul_set(flow.eAdt, R0)
    F2 = interval_mat_mul_set(flow.Gamma, V)
    exact = exact_add(F1, F2)
    zono = minkowski_sum_zono(F1, zono_enclose(F2))
    return exact, zono


def dependent_range(pz: SparsePolyZonotope, grid: int = 200001) -> tuple[float, float]:
    """Range of the dependent part of a one-factor, one-dimensional SPZ on a dense grid."""
    if pz.n != 1 or pz.p > 1:
        raise ValueError("dependent_range expects a 1-D set with at most one factor")
    alpha = np.linspace(-1.0, 1.0, grid).reshape(-1, 1) if pz.p else np.zeros((1, 0))
    vals = pz.monomials(alpha) @ pz.G[0]
    return float(vals.min()), float(vals.max())


__all__ = [
    "FixedPointError",
    "ReachConfig",
    "ReachResult",
    "StepResult",
    "dependency_example",
    "dependent_range",
    "enlarge",
    "lagrange_remainder",
    "post",
    "post_delta",
    "reach_analyze",
    "var_inputs",
]
