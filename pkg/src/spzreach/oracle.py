"""Simulation oracle: integrate sampled trajectories and check them against reachable sets."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .dynamics import NonlinearSystem
from .sets import IntervalVector
from .spz import SparsePolyZonotope


@dataclass
class OracleReport:
    trajectories: int
    checks: int = 0
    violations: list = field(default_factory=list)
    max_excess: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "trajectories": self.trajectories,
            "checks": self.checks,
            "violations": len(self.violations),
            "max_excess": self.max_excess,
            "first_violation": self.violations[0] if self.violations else None,
        }


def sample_initial(X0: SparsePolyZonotope, k: int, rng: np.random.Generator, vertices: float = 0.5) -> np.ndarray:
    """``k`` initial states; about half use extreme factor values."""
    pts, _, _ = X0.sample(rng, k, vertices=vertices)
    return np.atleast_2d(pts)


def sample_inputs(U: IntervalVector, steps: int, k: int, rng: np.random.Generator, vertices: float = 0.5) -> np.ndarray:
    """Piecewise-constant inputs, shape (steps, k, m)."""
    m = U.dim
    u = rng.uniform(U.lo, U.hi, size=(steps, k, m))
    if m and vertices > 0:
        mask = rng.random((steps, k)) < vertices
        corner = np.where(rng.random((steps, k, m)) < 0.5, U.lo, U.hi)
        u[mask] = corner[mask]
    return u


def simulate(
    sys: NonlinearSystem,
    x0: np.ndarray,
    dt: float,
    steps: int,
    inputs: np.ndarray | None = None,
    samples_per_step: int = 4,
    rtol: float = 1e-10,
    atol: float = 1e-10,
):
    """Integrate all trajectories at once, step by step.

    Returns ``(times, states)`` with ``times`` of shape (steps, s + 1) and
    ``states`` of shape (steps, s + 1, k, n), where s = ``samples_per_step``
    and both ends of every step are included.
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    k, n = x0.shape
    m = sys.m
    times = np.empty((steps, samples_per_step + 1))
    states = np.empty((steps, samples_per_step + 1, k, n))
    y = x0.copy()
    for s in range(steps):
        t0, t1 = s * dt, (s + 1) * dt
        u = np.zeros((m, k)) if inputs is None else inputs[s].T

        def rhs(_t, flat, u=u):
            return sys.f(flat.reshape(k, n).T, u).T.ravel()

        t_eval = np.linspace(t0, t1, samples_per_step + 1)
        sol = solve_ivp(rhs, (t0, t1), y.ravel(), method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
        if not sol.success:
            raise FloatingPointError(f"trajectory integration failed at step {s}: {sol.message}")
        times[s] = sol.t
        states[s] = sol.y.T.reshape(-1, k, n)
        y = states[s, -1]
    return times, states


def check_hulls(hulls, states: np.ndarray, tol: float = 1e-9, report: OracleReport | None = None) -> OracleReport:
    """Check simulated states against one interval hull per step."""
    steps, _, k, _ = states.shape
    report = report or OracleReport(trajectories=k)
    for s in range(steps):
        box = hulls[s]
        pts = states[s].reshape(-1, states.shape[-1])
        excess = np.maximum(box.lo - pts, pts - box.hi).max(axis=1)
        report.checks += len(pts)
        report.max_excess = max(report.max_excess, float(excess.max()))
        bad = np.flatnonzero(excess > tol)
        for i in bad[:3]:
            report.violations.append({"step": s, "point": pts[i].tolist(), "excess": float(excess[i])})
    return report


def run_oracle(
    sys: NonlinearSystem,
    X0: SparsePolyZonotope,
    U: IntervalVector | None,
    hulls,
    dt: float,
    trajectories: int = 100,
    seed: int = 0,
    samples_per_step: int = 4,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    tol: float = 1e-9,
) -> OracleReport:
    """Simulate ``trajectories`` runs and check each step against ``hulls[step]``."""
    rng = np.random.default_rng(seed)
    steps = len(hulls)
    x0 = sample_initial(X0, trajectories, rng)
    inputs = sample_inputs(U, steps, trajectories, rng) if U is not None and sys.m else None
    _, states = simulate(sys, x0, dt, steps, inputs, samples_per_step, rtol, atol)
    return check_hulls(hulls, states, tol)
