"""Set operations on sparse polynomial zonotopes."""
from __future__ import annotations

import numpy as np

from .ids import unique_id
from .sets import Zonotope
from .spz import SparsePolyZonotope, compact, merge_id


def _check_same_dim(pz1, pz2) -> None:
    if pz1.n != pz2.n:
        raise ValueError(f"dimension mismatch: {pz1.n} vs {pz2.n}")


def _block_exponents(E1: np.ndarray, E2: np.ndarray) -> np.ndarray:
    p1, h1 = E1.shape
    p2, h2 = E2.shape
    E = np.zeros((p1 + p2, h1 + h2), dtype=np.int64)
    E[:p1, :h1] = E1
    E[p1:, h1:] = E2
    return E


def linear_map(M, pz: SparsePolyZonotope) -> SparsePolyZonotope:
    """Exact image ``M pz`` for a matrix (or scalar) ``M``."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        M = M * np.eye(pz.n)
    M = np.atleast_2d(M)
    if M.shape[1] != pz.n:
        raise ValueError(f"matrix has {M.shape[1]} columns, set has dimension {pz.n}")
    return SparsePolyZonotope(M @ pz.G, M @ pz.GI, pz.E, pz.id)


def translate(pz: SparsePolyZonotope, v) -> SparsePolyZonotope:
    """``pz + {v}`` as an extra constant monomial; identifiers are kept."""
    v = np.asarray(v, dtype=float).reshape(-1)
    return minkowski_sum_zono(pz, Zonotope(v, np.zeros((len(v), 0))))


def minkowski_sum(pz1: SparsePolyZonotope, pz2: SparsePolyZonotope) -> SparsePolyZonotope:
    """Minkowski sum; all factors get fresh identifiers (dependencies are dropped)."""
    _check_same_dim(pz1, pz2)
    return SparsePolyZonotope(
        np.hstack([pz1.G, pz2.G]),
        np.hstack([pz1.GI, pz2.GI]),
        _block_exponents(pz1.E, pz2.E),
        unique_id(pz1.p + pz2.p),
    )


def minkowski_sum_zono(pz: SparsePolyZonotope, z: Zonotope) -> SparsePolyZonotope:
    """Minkowski sum with a zonotope: center as constant monomial, generators as independent."""
    if z.dim != pz.n:
        raise ValueError(f"dimension mismatch: {pz.n} vs {z.dim}")
    G = np.hstack([z.c.reshape(-1, 1), pz.G])
    E = np.hstack([np.zeros((pz.p, 1), dtype=np.int64), pz.E])
    return SparsePolyZonotope(G, np.hstack([pz.GI, z.G]), E, pz.id)


def exact_add(pz1: SparsePolyZonotope, pz2: SparsePolyZonotope) -> SparsePolyZonotope:
    """Addition that keeps shared dependent factors aligned."""
    _check_same_dim(pz1, pz2)
    a, b = merge_id(pz1, pz2)
    return compact(
        SparsePolyZonotope(
            np.hstack([a.G, b.G]),
            np.hstack([a.GI, b.GI]),
            np.hstack([a.E, b.E]),
            a.id,
        )
    )


def cartesian_product(pz1: SparsePolyZonotope, pz2: SparsePolyZonotope) -> SparsePolyZonotope:
    n, m = pz1.n, pz2.n
    G = np.zeros((n + m, pz1.h + pz2.h))
    G[:n, : pz1.h] = pz1.G
    G[n:, pz1.h :] = pz2.G
    GI = np.zeros((n + m, pz1.q + pz2.q))
    GI[:n, : pz1.q] = pz1.GI
    GI[n:, pz1.q :] = pz2.GI
    return SparsePolyZonotope(G, GI, _block_exponents(pz1.E, pz2.E), unique_id(pz1.p + pz2.p))


def cartesian_product_zono(pz: SparsePolyZonotope, z: Zonotope) -> SparsePolyZonotope:
    """``pz x z``; the zonotope center enters as a constant monomial and ``pz`` keeps its ids."""
    n, m = pz.n, z.dim
    l = z.G.shape[1]
    G = np.zeros((n + m, 1 + pz.h))
    G[n:, 0] = z.c
    G[:n, 1:] = pz.G
    GI = np.zeros((n + m, pz.q + l))
    GI[:n, : pz.q] = pz.GI
    GI[n:, pz.q :] = z.G
    E = np.hstack([np.zeros((pz.p, 1), dtype=np.int64), pz.E])
    return SparsePolyZonotope(G, GI, E, pz.id)


def _as_quad_forms(Q, n: int) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 2:
        Q = Q[None]
    if Q.ndim != 3 or Q.shape[1:] != (n, n):
        raise ValueError(f"quadratic forms must have shape (m, {n}, {n}), got {Q.shape}")
    return Q


def _pair_products(G: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``M[i, j, l] = G_j^T Q_i G_l``; the products Q_i G are formed once."""
    QG = np.matmul(Q, G)
    return np.matmul(G.T, QG)


def quad_map_dependent(pz: SparsePolyZonotope, Q, do_compact: bool = True) -> SparsePolyZonotope:
    """Exact quadratic map ``x_i = s^T Q_i s`` of an SPZ without independent generators.

    With ``do_compact=False`` the literal h^2-column result is returned.
    Otherwise the symmetric pairs (j, l) and (l, j), which share a monomial,
    are summed before the final compaction.
    """
    if pz.q:
        raise ValueError("quad_map_dependent requires a set without independent generators")
    Q = _as_quad_forms(Q, pz.n)
    G, E = pz.G, pz.E
    h = pz.h
    M = _pair_products(G, Q)

    if not do_compact:
        Gbar = M.reshape(len(Q), h * h)
        Ebar = (E[:, :, None] + E[:, None, :]).reshape(pz.p, h * h)
        return SparsePolyZonotope(Gbar, None, Ebar, pz.id)

    j, l = np.triu_indices(h)
    Gbar = M[:, j, l] + np.where(j != l, M[:, l, j], 0.0)
    Ebar = E[:, j] + E[:, l]
    return compact(SparsePolyZonotope(Gbar, None, Ebar, pz.id))


def quad_map(pz: SparsePolyZonotope, Q) -> SparsePolyZonotope:
    """Enclosure of the quadratic map of a general SPZ.

    Independent generators are treated as extra dependent factors.  Every
    monomial that contains one of those factors is enclosed by a zonotope,
    so the extra factors never reach the result.  Squares of a single
    independent factor are even and contribute [0, 1]; all other such
    monomials are odd in some independent factor and contribute [-1, 1].
    Enclosing them directly gives the same zonotope as lifting the factors,
    mapping exactly and enclosing the monomials with a lifted factor.
    """
    Q = _as_quad_forms(Q, pz.n)
    dep = compact(SparsePolyZonotope(pz.G, None, pz.E, pz.id))
    if pz.q == 0:
        return quad_map_dependent(dep, Q)
    sq = quad_map_dependent(dep, Q)

    h, q = dep.h, pz.q
    M = _pair_products(np.hstack([dep.G, pz.GI]), Q)
    ind = np.arange(h, h + q)
    squares = M[:, ind, ind]
    a, b = np.triu_indices(q, 1)
    cross_ind = M[:, ind[a], ind[b]] + M[:, ind[b], ind[a]]
    mixed = (M[:, h:, :h] + np.swapaxes(M[:, :h, h:], 1, 2)).reshape(len(Q), q * h)
    c_z = 0.5 * squares.sum(axis=1)
    G_z = np.hstack([0.5 * squares, cross_ind, mixed])
    G_z = G_z[:, np.any(G_z != 0, axis=0)]

    G = np.hstack([c_z.reshape(-1, 1), sq.G])
    E = np.hstack([np.zeros((sq.p, 1), dtype=np.int64), sq.E])
    return SparsePolyZonotope(G, G_z, E, sq.id)


def conv_hull_dependent(pz1: SparsePolyZonotope, pz2: SparsePolyZonotope) -> SparsePolyZonotope:
    """Exact convex hull of two SPZs without independent generators.

    The interpolation parameter becomes one extra dependent factor; all
    factors get fresh identifiers.
    """
    _check_same_dim(pz1, pz2)
    if pz1.q or pz2.q:
        raise ValueError("conv_hull_dependent requires sets without independent generators")
    h1, h2, p1, p2 = pz1.h, pz2.h, pz1.p, pz2.p
    G = 0.5 * np.hstack([pz1.G, pz1.G, pz2.G, -pz2.G])
    E = np.zeros((p1 + p2 + 1, 2 * (h1 + h2)), dtype=np.int64)
    E[:p1, :h1] = pz1.E
    E[:p1, h1 : 2 * h1] = pz1.E
    E[p1 : p1 + p2, 2 * h1 : 2 * h1 + h2] = pz2.E
    E[p1 : p1 + p2, 2 * h1 + h2 :] = pz2.E
    E[-1, h1 : 2 * h1] = 1
    E[-1, 2 * h1 + h2 :] = 1
    return SparsePolyZonotope(G, None, E, unique_id(p1 + p2 + 1))


def conv_hull_zono_generators(GI1: np.ndarray, GI2: np.ndarray) -> np.ndarray:
    """Generators of a zero-centered zonotope enclosing conv(<0, GI1>, <0, GI2>)."""
    q1, q2 = GI1.shape[1], GI2.shape[1]
    if q1 >= q2:
        head = 0.5 * np.hstack([GI1[:, :q2] + GI2, GI1[:, :q2] - GI2])
        return np.hstack([head, GI1[:, q2:]])
    head = 0.5 * np.hstack([GI1 + GI2[:, :q1], GI1 - GI2[:, :q1]])
    return np.hstack([head, GI2[:, q1:]])


def conv_hull(pz1: SparsePolyZonotope, pz2: SparsePolyZonotope) -> SparsePolyZonotope:
    """Enclosure of the convex hull of two general SPZs."""
    _check_same_dim(pz1, pz2)
    dep = conv_hull_dependent(
        SparsePolyZonotope(pz1.G, None, pz1.E, pz1.id),
        SparsePolyZonotope(pz2.G, None, pz2.E, pz2.id),
    )
    GI = conv_hull_zono_generators(pz1.GI, pz2.GI)
    return SparsePolyZonotope(dep.G, GI, dep.E, dep.id)
