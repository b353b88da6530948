"""Shared helpers for the test suite: random sets and independent membership oracles.

The oracles never call the enclosure routines under test.  Membership in
an SPZ is decided by substituting the factor values that produced a point
(these are known to the test) and solving a linear feasibility problem for
the remaining factors, which all enter linearly.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.optimize import linprog

from spzreach import SparsePolyZonotope, unique_id

SLACK = 1e-9


# -- random objects -------------------------------------------------------------

def random_spz(rng, n=None, h=None, q=None, p=None, max_exp=4, ids=None, scale=1.0) -> SparsePolyZonotope:
    n = int(rng.integers(1, 6)) if n is None else n
    h = int(rng.integers(1, 9)) if h is None else h
    q = int(rng.integers(0, 9)) if q is None else q
    if ids is not None:
        p = len(ids)
    p = int(rng.integers(1, 5)) if p is None else p
    G = scale * rng.normal(size=(n, h))
    GI = scale * rng.normal(size=(n, q))
    E = rng.integers(0, max_exp + 1, size=(p, h))
    # some zero and some linear exponents keep the structure varied
    E[rng.random((p, h)) < 0.3] = 0
    if ids is None:
        # fresh identifiers, in a random order
        ids = rng.permutation(unique_id(p))
    return SparsePolyZonotope(G, GI, E, ids)


def sample_factors(rng, pz: SparsePolyZonotope, k: int, vertices: float = 0.4):
    alpha = rng.uniform(-1, 1, size=(k, pz.p))
    beta = rng.uniform(-1, 1, size=(k, pz.q))
    mask = rng.random(k) < vertices
    alpha[mask] = np.sign(alpha[mask])
    beta[mask] = np.sign(beta[mask])
    return alpha, beta


def eval_direct(G, GI, E, alpha, beta) -> np.ndarray:
    """Definition of an SPZ written out with explicit loops over generators."""
    alpha = np.atleast_2d(alpha)
    beta = np.atleast_2d(beta)
    k = alpha.shape[0]
    n = G.shape[0]
    out = np.zeros((k, n))
    for j in range(G.shape[1]):
        mono = np.ones(k)
        for f in range(E.shape[0]):
            if E[f, j]:
                mono = mono * alpha[:, f] ** int(E[f, j])
        out += mono[:, None] * G[:, j]
    if GI.shape[1]:
        out += beta @ GI.T
    return out


def random_matrix(rng, n, dt, bound=2.0) -> np.ndarray:
    """Random system matrix with ||A dt||_inf <= bound."""
    A = rng.normal(size=(n, n))
    norm = np.abs(A).sum(axis=1).max() * dt
    return A * (bound * rng.uniform(0.2, 1.0) / norm)


def random_box(rng, n, scale=1.0):
    c = scale * rng.normal(size=n)
    r = scale * rng.uniform(0, 1, size=n)
    return c - r, c + r


# -- exact linear-flow solutions ---------------------------------------------------

def flow_pieces(A, h):
    """``(e^{A h}, int_0^h e^{A s} ds)`` from one augmented matrix exponential."""
    n = A.shape[0]
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = A
    M[:n, n:] = np.eye(n)
    X = expm(M * h)
    return X[:n, :n], X[:n, n:]


def piecewise_solution(A, dt, x0, inputs):
    """States of x' = A x + w(t) at the ends of equal sub-intervals of [0, dt].

    ``inputs`` has shape (pieces, k, n); returns an array (pieces + 1, k, n).
    """
    pieces = inputs.shape[0]
    Phi, Gam = flow_pieces(A, dt / pieces)
    states = [np.atleast_2d(x0)]
    for w in inputs:
        states.append(states[-1] @ Phi.T + w @ Gam.T)
    return np.array(states)


# -- membership oracles ---------------------------------------------------------------

def residual_zonotopes(R: SparsePolyZonotope, known: dict):
    """Zonotopes (per point) left after substituting known factor values.

    ``known`` maps identifiers to arrays of length k.  Factors that are not
    known and enter non-linearly are replaced by a zonotope over their
    monomials (constant, even and other monomials), which keeps the test
    a necessary condition for membership.
    """
    k = len(next(iter(known.values()))) if known else 1
    n = R.n
    is_known = np.array([int(i) in known for i in R.id], dtype=bool)
    mono = np.ones((k, R.h))
    for row in np.flatnonzero(is_known):
        vals = np.asarray(known[int(R.id[row])], dtype=float)
        mono *= vals[:, None] ** R.E[row][None, :]
    coef = mono[:, None, :] * R.G[None, :, :]  # (k, n, h)

    E_u = R.E[~is_known] if R.p else np.zeros((0, R.h), dtype=np.int64)
    nnz = (E_u != 0).sum(axis=0)
    const = nnz == 0
    linear = (nnz == 1) & (E_u.sum(axis=0) == 1)
    nonlinear = ~(const | linear)

    c = coef[:, :, const].sum(axis=2)
    gens = []
    unknown_rows = np.flatnonzero(np.any(E_u[:, linear] != 0, axis=1)) if linear.any() else []
    for r in unknown_rows:
        cols = linear & (E_u[r] == 1)
        gens.append(coef[:, :, cols].sum(axis=2)[:, :, None])
    if nonlinear.any():
        even = nonlinear & np.all(E_u % 2 == 0, axis=0)
        odd = nonlinear & ~even
        c = c + 0.5 * coef[:, :, even].sum(axis=2)
        gens.append(0.5 * coef[:, :, even])
        gens.append(coef[:, :, odd])
    gens.append(np.broadcast_to(R.GI, (k, n, R.q)))
    G = np.concatenate(gens, axis=2) if gens else np.zeros((k, n, 0))
    return c, G


def _solve_blocks(blocks):
    """Minimal l1 residual of each feasibility block ``A y = d, lo <= y <= hi``.

    All blocks go into one block-diagonal LP; the blocks do not interact, so
    the optimum of the joint problem is optimal for every block.
    """
    rows, cols, vals, d_parts, lo_parts, hi_parts, cost_parts, spans = [], [], [], [], [], [], [], []
    r0 = v0 = 0
    for A, d, lo, hi in blocks:
        A = np.asarray(A, dtype=float)
        r, v = A.shape
        # variables of this block: y (v), s_plus (r), s_minus (r)
        ri, ci = np.nonzero(A)
        eye = np.arange(r)
        rows += [r0 + ri, r0 + eye, r0 + eye]
        cols += [v0 + ci, v0 + v + eye, v0 + v + r + eye]
        vals += [A[ri, ci], np.ones(r), -np.ones(r)]
        d_parts.append(np.asarray(d, dtype=float))
        lo_parts += [np.full(v, lo), np.zeros(2 * r)]
        hi_parts += [np.full(v, hi), np.full(2 * r, np.inf)]
        cost_parts += [np.zeros(v), np.ones(2 * r)]
        spans.append((v0 + v, v0 + v + 2 * r))
        r0 += r
        v0 += v + 2 * r
    A_eq = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(r0, v0))
    bounds = np.column_stack([np.concatenate(lo_parts), np.concatenate(hi_parts)])
    res = linprog(np.concatenate(cost_parts), A_eq=A_eq, b_eq=np.concatenate(d_parts), bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    return np.array([res.x[a:b].sum() for a, b in spans])


def zonotope_members(c, G, x, slack=SLACK, chunk=2000) -> np.ndarray:
    """Batched exact membership of ``x[i]`` in ``<c[i], G[i]>``; dimensions may differ per entry."""
    out = np.empty(len(x), dtype=bool)
    for start in range(0, len(x), chunk):
        idx = range(start, min(start + chunk, len(x)))
        blocks = [(np.asarray(G[i], dtype=float), np.asarray(x[i]) - np.asarray(c[i]), -1.0, 1.0) for i in idx]
        res = _solve_blocks(blocks)
        for j, i in enumerate(idx):
            out[i] = res[j] <= slack * _scale(c[i], G[i])
    return out


def _scale(c, G) -> float:
    G = np.asarray(G)
    return 1.0 + float(np.abs(c).max()) + (float(np.abs(G).sum(axis=1).max()) if G.size else 0.0)


def polytope_members(V, x, slack=SLACK) -> np.ndarray:
    """Exact membership in the convex hull of the rows of ``V``."""
    V = np.atleast_2d(V)
    x = np.atleast_2d(x)
    A = np.vstack([V.T, np.ones((1, len(V)))])
    blocks = [(A, np.concatenate([xi, [1.0]]), 0.0, 1.0) for xi in x]
    res = _solve_blocks(blocks)
    return res <= slack * (1.0 + np.abs(V).max())


def spz_members(R: SparsePolyZonotope, x, known: dict, slack=SLACK) -> np.ndarray:
    c, G = residual_zonotopes(R, known)
    k = len(x)
    if c.shape[0] == 1 and k > 1:
        c = np.repeat(c, k, axis=0)
        G = np.repeat(G, k, axis=0)
    return zonotope_members(c, G, x, slack)


def finite_difference_error(system, z, h=1e-5) -> float:
    """Largest relative deviation of A, B and D from central differences at ``z``.

    A and B are differenced from f, D from the analytic Jacobian.
    """
    z = np.asarray(z, dtype=float)
    n, m = system.n, system.m
    bundle = system.taylor(z)
    J = np.hstack([bundle.A, bundle.B])
    J_fd = np.zeros((n, n + m))
    D_fd = np.zeros((n, n + m, n + m))
    for k in range(n + m):
        e = np.zeros(n + m)
        e[k] = h
        f = [system.f((z + s * e)[:n], (z + s * e)[n:]) for s in (1, -1)]
        J_fd[:, k] = (f[0] - f[1]) / (2 * h)
        Jp = [np.hstack([b.A, b.B]) for b in (system.taylor(z + e), system.taylor(z - e))]
        D_fd[:, :, k] = (Jp[0] - Jp[1]) / (2 * h)
    err_J = np.abs(J - J_fd) / (1 + np.abs(J_fd))
    err_D = np.abs(bundle.D - D_fd) / (1 + np.abs(D_fd))
    return float(max(err_J.max(), err_D.max()))
