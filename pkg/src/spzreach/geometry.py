"""Small computational-geometry helpers: convex hulls and membership tests."""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

# above this many candidate facets the zonotope test falls back to linear programming
MAX_ZONOTOPE_FACETS = 20000


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull vertices of planar points (monotone chain).

    Collinear points on the boundary are dropped.  Degenerate inputs return
    one or two points.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def hull_vertices(points: np.ndarray) -> np.ndarray:
    """Reduce a point cloud to (a superset of) its convex hull vertices.

    Exact for n <= 3; in higher dimensions the cloud is returned unchanged,
    which is still a valid vertex description of the same polytope.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[1]
    if len(pts) <= 1:
        return pts
    if n == 1:
        return np.unique(np.array([[pts.min()], [pts.max()]]), axis=0)
    if n == 2:
        return convex_hull_2d(pts)
    if n == 3:
        try:
            return pts[ConvexHull(pts).vertices]
        except (QhullError, ValueError):
            return np.unique(pts, axis=0)
    return np.unique(pts, axis=0)


def _lp_residual(A_eq: np.ndarray, b: np.ndarray, bounds, extra_eq=None) -> float:
    """Minimal l1 residual of ``A_eq x = b`` subject to variable bounds."""
    m, k = A_eq.shape
    # variables: x (k), s (m) with -s <= A x - b <= s
    c = np.concatenate([np.zeros(k), np.ones(m)])
    A_ub = np.block([[A_eq, -np.eye(m)], [-A_eq, -np.eye(m)]])
    b_ub = np.concatenate([b, -b])
    A_eq2 = b_eq2 = None
    if extra_eq is not None:
        A_eq2 = np.concatenate([extra_eq[0], np.zeros((extra_eq[0].shape[0], m))], axis=1)
        b_eq2 = extra_eq[1]
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=A_eq2,
        b_eq=b_eq2,
        bounds=list(bounds) + [(0, None)] * m,
        method="highs",
    )
    if res.status != 0:
        return np.inf
    return float(res.fun)


def zonotope_halfspaces(c: np.ndarray, G: np.ndarray):
    """Halfspace representation ``C x <= d`` of a full-dimensional zonotope.

    Returns ``None`` when the zonotope is degenerate or when the number of
    candidate facets exceeds :data:`MAX_ZONOTOPE_FACETS`.
    """
    n, l = G.shape
    if n == 1:
        r = np.abs(G).sum()
        return np.array([[1.0], [-1.0]]), np.array([c[0] + r, -c[0] + r])
    if l < n or np.linalg.matrix_rank(G) < n:
        return None
    if comb(l, n - 1) > MAX_ZONOTOPE_FACETS:
        return None
    normals = []
    for S in combinations(range(l), n - 1):
        M = G[:, S]
        d = np.array([(-1) ** i * np.linalg.det(np.delete(M, i, axis=0)) for i in range(n)])
        norm = np.linalg.norm(d)
        if norm > 1e-12 * max(1.0, np.abs(M).max() ** (n - 1)):
            normals.append(d / norm)
    C = np.array(normals)
    C = np.concatenate([C, -C])
    d = C @ c + np.abs(C @ G).sum(axis=1)
    return C, d


def zonotope_contains(c, G, points, tol: float = 1e-9) -> np.ndarray:
    """Exact membership of points in the zonotope ``<c, G>``, up to ``tol``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    G = np.asarray(G, dtype=float).reshape(len(c), -1)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if G.shape[1] == 0:
        return np.all(np.abs(pts - c) <= tol, axis=1)
    hs = zonotope_halfspaces(c, G)
    scale = 1.0 + np.abs(c).max() + np.abs(G).sum(axis=1).max()
    if hs is not None:
        C, d = hs
        return np.all(pts @ C.T <= d + tol * scale, axis=1)
    out = np.empty(len(pts), dtype=bool)
    bounds = [(-1.0, 1.0)] * G.shape[1]
    for i, x in enumerate(pts):
        out[i] = _lp_residual(G, x - c, bounds) <= tol * scale
    return out


def polytope_contains(V: np.ndarray, points, tol: float = 1e-9) -> np.ndarray:
    """Membership of points in the convex hull of the rows of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = V.shape[1]
    scale = 1.0 + np.abs(V).max()
    if len(V) == 1:
        return np.all(np.abs(pts - V[0]) <= tol * scale, axis=1)
    if n == 1:
        return (pts[:, 0] >= V.min() - tol * scale) & (pts[:, 0] <= V.max() + tol * scale)
    if n <= 3:
        try:
            hull = ConvexHull(V)
            A, b = hull.equations[:, :-1], hull.equations[:, -1]
            return np.all(pts @ A.T + b <= tol * scale, axis=1)
        except (QhullError, ValueError):
            pass
    out = np.empty(len(pts), dtype=bool)
    r = len(V)
    bounds = [(0.0, None)] * r
    ones = (np.ones((1, r)), np.ones(1))
    for i, x in enumerate(pts):
        out[i] = _lp_residual(V.T, x, bounds, extra_eq=ones) <= tol * scale
    return out
