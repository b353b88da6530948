"""Conversions into sparse polynomial zonotopes and enclosures by simpler sets."""
from __future__ import annotations

import warnings
from math import comb
from typing import Callable, Sequence

import numpy as np

from .geometry import hull_vertices
from .ids import unique_id
from .sets import IntervalVector, Polytope, SupportValue, TaylorModel, Zonotope
from .spz import SparsePolyZonotope, compact

POLYTOPE_VERTEX_CAP = 12
POLY_ENCLOSE_FACTOR_CAP = 16
RESIDUAL_SIGN_CAP = 10


# -- conversions ------------------------------------------------------------

def from_zonotope(z: Zonotope) -> SparsePolyZonotope:
    """Exact SPZ of a zonotope: the center becomes a constant monomial."""
    n, l = z.G.shape
    G = np.hstack([z.c.reshape(-1, 1), z.G])
    E = np.hstack([np.zeros((l, 1), dtype=np.int64), np.eye(l, dtype=np.int64)])
    return SparsePolyZonotope(G, None, E, unique_id(l))


def from_interval(iv: IntervalVector) -> SparsePolyZonotope:
    return from_zonotope(iv.to_zonotope())


def from_polytope(P: Polytope, cap: int = POLYTOPE_VERTEX_CAP) -> SparsePolyZonotope:
    """Exact SPZ of a polytope given by its vertices.

    Each vertex is a point SPZ with one (unused) fresh factor; the vertices
    are folded left to right with the convex hull of dependent-only SPZs.  The
    generator count doubles with every vertex, hence the warning above ``cap``.
    """
    from .ops import conv_hull_dependent

    V = P.V
    if len(V) > cap:
        warnings.warn(
            f"converting a polytope with {len(V)} vertices; the SPZ will have "
            f"on the order of 2^{len(V)} generators",
            RuntimeWarning,
            stacklevel=2,
        )

    def vertex(v):
        return SparsePolyZonotope(v.reshape(-1, 1), None, np.zeros((1, 1), dtype=np.int64), unique_id(1))

    result = vertex(V[0])
    for v in V[1:]:
        result = compact(conv_hull_dependent(result, vertex(v)))
    return result


def _expand_affine_power(c: float, r: float, e: int) -> np.ndarray:
    """Coefficients of (c + r a)^e in powers a^0 .. a^e."""
    return np.array([comb(e, j) * c ** (e - j) * r**j for j in range(e + 1)])


def from_taylor_model(tm: TaylorModel) -> SparsePolyZonotope:
    """Exact SPZ of the set described by a Taylor model over its domain.

    Every domain variable is rewritten as ``mid + rad * alpha`` and each
    polynomial is expanded in the new factors; the remainder interval becomes
    a constant offset plus one independent generator per dimension.
    """
    s = tm.domain.dim
    n = tm.dim
    mid, rad = tm.domain.center, tm.domain.radius

    cols: list[np.ndarray] = []
    exps: list[np.ndarray] = []
    for i, (b, E) in enumerate(zip(tm.coefficients, tm.exponents)):
        terms: dict[tuple, float] = {}
        for j, coeff in enumerate(b):
            poly = {(): coeff}
            for k in range(s):
                factor = _expand_affine_power(mid[k], rad[k], int(E[k, j]))
                poly = {key + (a,): val * f for key, val in poly.items() for a, f in enumerate(factor)}
            for key, val in poly.items():
                terms[key] = terms.get(key, 0.0) + val
        for key, val in terms.items():
            g = np.zeros(n)
            g[i] = val
            cols.append(g)
            exps.append(np.array(key, dtype=np.int64).reshape(s))

    const = tm.remainder.center.reshape(-1, 1)
    G_hat = np.array(cols).T if cols else np.zeros((n, 0))
    E_hat = np.array(exps).T if exps else np.zeros((s, 0), dtype=np.int64)
    G = np.hstack([const, G_hat])
    E = np.hstack([np.zeros((s, 1), dtype=np.int64), E_hat.reshape(s, -1)])
    GI = np.diag(tm.remainder.radius)
    return compact(SparsePolyZonotope(G, GI, E, unique_id(s)))


# -- range bounding -----------------------------------------------------------

def monomial_bounds(E: np.ndarray):
    """Interval hull of each monomial variable part over [-1, 1]^p.

    Constant monomials give {1}, monomials with only even exponents [0, 1],
    everything else [-1, 1].
    """
    E = np.asarray(E)
    h = E.shape[1]
    if E.shape[0] == 0:
        return np.ones(h), np.ones(h)
    constant = np.all(E == 0, axis=0)
    even = np.all(E % 2 == 0, axis=0) & ~constant
    lo = np.where(constant | even, np.where(constant, 1.0, 0.0), -1.0)
    hi = np.ones(h)
    return lo, hi


def _interval_range(g: np.ndarray, E: np.ndarray) -> tuple[float, float]:
    lo_m, hi_m = monomial_bounds(E)
    a, b = g * lo_m, g * hi_m
    return float(np.minimum(a, b).sum()), float(np.maximum(a, b).sum())


RANGE_BOUNDERS: dict[str, Callable[[np.ndarray, np.ndarray], tuple[float, float]]] = {
    "interval": _interval_range,
}


def range_bound(g, E, method: str = "interval") -> tuple[float, float]:
    """Enclosure of ``sum_i g_i prod_k alpha_k^E[k, i]`` over the unit box.

    ``method`` selects a registered bounding strategy; only interval
    arithmetic ships by default, other strategies can be added to
    :data:`RANGE_BOUNDERS`.
    """
    g = np.asarray(g, dtype=float).reshape(-1)
    E = np.asarray(E).reshape(-1, len(g)) if np.size(E) else np.zeros((0, len(g)), dtype=np.int64)
    return RANGE_BOUNDERS[method](g, E)


# -- enclosures -------------------------------------------------------------

def zono_enclose(pz: SparsePolyZonotope) -> Zonotope:
    """Zonotope enclosure; all-even monomials are enclosed by [0, 1]."""
    E = pz.E
    if pz.p == 0:
        constant = np.ones(pz.h, dtype=bool)
        even = np.zeros(pz.h, dtype=bool)
    else:
        constant = np.all(E == 0, axis=0)
        even = np.all(E % 2 == 0, axis=0) & ~constant
    rest = ~(constant | even)
    c = pz.G[:, constant].sum(axis=1) + 0.5 * pz.G[:, even].sum(axis=1)
    G = np.hstack([0.5 * pz.G[:, even], pz.G[:, rest], pz.GI])
    return Zonotope(c, G)


def interval_enclose(pz: SparsePolyZonotope, method: str = "interval") -> IntervalVector:
    """Interval hull enclosure from support values along the coordinate axes."""
    if method != "interval":
        lo, hi = np.empty(pz.n), np.empty(pz.n)
        for i in range(pz.n):
            lo[i], hi[i] = range_bound(pz.G[i], pz.E, method)
    else:
        lo_m, hi_m = monomial_bounds(pz.E)
        a, b = pz.G * lo_m, pz.G * hi_m
        lo, hi = np.minimum(a, b).sum(axis=1), np.maximum(a, b).sum(axis=1)
    r = np.abs(pz.GI).sum(axis=1)
    return IntervalVector(lo - r, hi + r)


def support_function(pz: SparsePolyZonotope, d, method: str = "interval") -> SupportValue:
    """Upper bound on ``max_{x in pz} d^T x``."""
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.shape[0] != pz.n:
        raise ValueError(f"direction has length {d.shape[0]}, expected {pz.n}")
    g = d @ pz.G
    g_i = d @ pz.GI
    _, u = range_bound(g, pz.E, method)
    return SupportValue(d, u + float(np.abs(g_i).sum()))


def template_polyhedron(pz: SparsePolyZonotope, directions: Sequence, method: str = "interval") -> list[SupportValue]:
    """Halfspaces ``d^T x <= s(d)`` enclosing ``pz`` for every template direction."""
    directions = [np.asarray(d, dtype=float) for d in directions]
    if not directions:
        raise ValueError("template needs at least one direction")
    return [support_function(pz, d, method) for d in directions]


def poly_enclose(pz: SparsePolyZonotope, cap: int = POLY_ENCLOSE_FACTOR_CAP) -> Polytope:
    """Polytope enclosure of an SPZ.

    Monomials with an exponent above one are moved into a zonotope.  The
    remaining multilinear part is evaluated at every sign pattern of its
    factors; a multilinear polynomial over a box reaches its extreme values
    in any direction at a box vertex, so the convex hull of these images,
    shifted by the vertices of the zonotope part, encloses the set.  With
    more than ``RESIDUAL_SIGN_CAP`` zonotope generators the interval hull
    corners of the zonotope part are used instead.
    """
    high = np.any(pz.E > 1, axis=0) if pz.p else np.zeros(pz.h, dtype=bool)
    low = ~high
    z = zono_enclose(SparsePolyZonotope(pz.G[:, high], None, pz.E[:, high], pz.id))

    E_low = pz.E[:, low]
    used = np.any(E_low != 0, axis=1) if pz.p else np.zeros(0, dtype=bool)
    E_low = E_low[used]
    p = E_low.shape[0]
    if p > cap:
        raise ValueError(
            f"polytope enclosure enumerates 2^{p} sign patterns (cap {cap}); reduce the set first"
        )
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * p, indexing="ij")).reshape(p, -1).T if p else np.zeros((1, 0))
    mono = np.prod(signs[:, :, None] ** E_low[None], axis=1) if p else np.ones((1, int(low.sum())))
    dep = mono @ pz.G[:, low].T + z.c

    R = np.hstack([pz.GI, z.G])
    R = R[:, np.any(R != 0, axis=0)]
    if R.shape[1] == 0:
        cand = dep
    else:
        if R.shape[1] <= RESIDUAL_SIGN_CAP:
            # the residual zonotope is the hull of its generator sign combinations
            m = R.shape[1]
            s = np.array(np.meshgrid(*[[-1.0, 1.0]] * m, indexing="ij")).reshape(m, -1)
            corners = hull_vertices((R @ s).T)
        else:
            corners = Zonotope(np.zeros(pz.n), R).interval().corners()
        cand = (dep[:, None, :] + corners[None, :, :]).reshape(-1, pz.n)
    return Polytope(hull_vertices(cand))
