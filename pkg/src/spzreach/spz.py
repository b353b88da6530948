"""Sparse polynomial zonotopes and their preliminary operations.

A sparse polynomial zonotope (SPZ) ``<G, GI, E, id>`` is the set

    { sum_i (prod_k alpha_k^E[k, i]) G[:, i] + sum_j beta_j GI[:, j]
      | alpha_k, beta_j in [-1, 1] }

where the rows of the integer exponent matrix ``E`` are labelled by the
identifier vector ``id``.  Identifiers let different sets share dependent
factors, which is what makes exact addition possible.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .ids import unique_id

MAX_EXPONENT = 2**31


def _frozen(arr: np.ndarray) -> np.ndarray:
    if not arr.flags.writeable and arr.base is None:
        return arr
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class SparsePolyZonotope:
    """Immutable sparse polynomial zonotope ``<G, GI, E, id>``.

    Parameters
    ----------
    G : array_like, shape (n, h)
        Dependent generators.  A 1-D input is read as a column vector.
    GI : array_like, shape (n, q), optional
        Independent generators; ``None`` means no independent generators.
    E : array_like, shape (p, h), optional
        Exponent matrix.  Defaults to the identity (one factor per generator).
    id : array_like, shape (p,), optional
        Identifier vector.  Fresh identifiers are drawn when omitted.
    """

    __slots__ = ("G", "GI", "E", "id")

    def __init__(self, G, GI=None, E=None, id=None):
        G = np.asarray(G, dtype=float)
        if G.ndim == 1:
            G = G.reshape(-1, 1)
        if G.ndim != 2 or G.shape[0] == 0:
            raise ValueError(f"G must be an n x h matrix with n >= 1, got {G.shape}")
        n, h = G.shape

        if GI is None:
            GI = np.zeros((n, 0))
        else:
            GI = np.asarray(GI, dtype=float)
            if GI.ndim == 1:
                GI = GI.reshape(n, -1) if GI.size else np.zeros((n, 0))
            if GI.size == 0:
                GI = np.zeros((n, 0))
        if GI.shape[0] != n:
            raise ValueError(f"GI has {GI.shape[0]} rows, expected {n}")

        if E is None:
            E = np.eye(h, dtype=np.int64)
        E = np.asarray(E)
        if E.ndim == 1:
            # a flat exponent vector is a single factor row
            E = E.reshape(1, -1) if E.size else np.zeros((0, h), dtype=np.int64)
        if E.ndim != 2 or (E.size == 0 and E.shape[1] != h):
            E = np.zeros((E.shape[0] if E.ndim == 2 else 0, h), dtype=np.int64)
        if E.shape[1] != h:
            raise ValueError(f"E has {E.shape[1]} columns but G has {h}")
        if E.dtype.kind not in "iub" and not np.all(np.equal(np.mod(E, 1), 0)):
            raise ValueError("exponents must be integers")
        if E.size and E.min() < 0:
            raise ValueError("exponents must be non-negative")
        if E.size and E.max() >= MAX_EXPONENT:
            raise OverflowError("exponent exceeds 2^31")
        E = E.astype(np.int64)
        p = E.shape[0]

        if id is None:
            id = unique_id(p)
        id = np.asarray(id, dtype=np.int64).reshape(-1)
        if id.shape[0] != p:
            raise ValueError(f"id has {id.shape[0]} entries but E has {p} rows")
        if p and (id.min() <= 0 or len(np.unique(id)) != p):
            raise ValueError("identifiers must be distinct positive integers")

        self.G = _frozen(G)
        self.GI = _frozen(GI)
        self.E = _frozen(E)
        self.id = _frozen(id)

    # -- shape information -------------------------------------------------
    @property
    def n(self) -> int:
        return self.G.shape[0]

    @property
    def h(self) -> int:
        return self.G.shape[1]

    @property
    def q(self) -> int:
        return self.GI.shape[1]

    @property
    def p(self) -> int:
        return self.E.shape[0]

    @property
    def order(self) -> float:
        return (self.h + self.q) / self.n

    def __repr__(self) -> str:
        return f"SparsePolyZonotope(n={self.n}, h={self.h}, q={self.q}, p={self.p})"

    # -- evaluation --------------------------------------------------------
    def monomials(self, alpha) -> np.ndarray:
        """Variable parts ``prod_k alpha_k^E[k, i]``, shape (k, h) for batched alpha."""
        alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
        if alpha.shape[1] != self.p:
            raise ValueError(f"alpha has length {alpha.shape[1]}, expected {self.p}")
        if self.p == 0:
            return np.ones((alpha.shape[0], self.h))
        return np.prod(alpha[:, :, None] ** self.E[None, :, :], axis=1)

    def evaluate(self, alpha, beta=None) -> np.ndarray:
        """Point(s) of the set for factor values ``alpha`` and ``beta``.

        Batched inputs of shape (k, p) and (k, q) return an array (k, n); a
        single parameter vector returns a single point.
        """
        single = np.ndim(alpha) <= 1
        alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
        if self.p == 0 and alpha.size == 0:
            alpha = np.zeros((alpha.shape[0] if alpha.ndim == 2 else 1, 0))
        out = self.monomials(alpha) @ self.G.T
        if self.q:
            if beta is None:
                raise ValueError("beta is required for sets with independent generators")
            beta = np.atleast_2d(np.asarray(beta, dtype=float))
            if beta.shape[1] != self.q:
                raise ValueError(f"beta has length {beta.shape[1]}, expected {self.q}")
            out = out + beta @ self.GI.T
        return out[0] if single else out

    def alpha_from_ids(self, values: Mapping[int, np.ndarray], k: int) -> np.ndarray:
        """Assemble an alpha batch (k, p) from a mapping ``identifier -> values``.

        Identifiers missing from ``values`` get 0, which is harmless whenever
        the corresponding exponent row is all-zero.
        """
        alpha = np.zeros((k, self.p))
        for j, ident in enumerate(self.id):
            if int(ident) in values:
                alpha[:, j] = values[int(ident)]
        return alpha

    def sample(self, rng: np.random.Generator, k: int, vertices: float = 0.0):
        """Draw ``k`` random points; returns ``(points, alpha, beta)``.

        A fraction ``vertices`` of the draws uses factors in {-1, 1}, which
        pushes samples towards the boundary of the set.
        """
        alpha = rng.uniform(-1.0, 1.0, size=(k, self.p))
        beta = rng.uniform(-1.0, 1.0, size=(k, self.q))
        if vertices > 0:
            mask = rng.random(k) < vertices
            alpha[mask] = np.sign(alpha[mask])
            beta[mask] = np.sign(beta[mask])
        return self.evaluate(alpha, beta), alpha, beta

    # -- constructors ------------------------------------------------------
    @classmethod
    def point(cls, c) -> "SparsePolyZonotope":
        c = np.asarray(c, dtype=float).reshape(-1, 1)
        return cls(c, None, np.zeros((0, 1), dtype=np.int64), np.zeros(0, dtype=np.int64))

    def replace(self, **changes) -> "SparsePolyZonotope":
        fields = {"G": self.G, "GI": self.GI, "E": self.E, "id": self.id}
        fields.update(changes)
        return SparsePolyZonotope(**fields)

    # -- serialization -----------------------------------------------------
    def to_dict(self, id_map: Mapping[int, int] | None = None) -> dict:
        ids = self.id.tolist()
        if id_map is not None:
            ids = [id_map[i] for i in ids]
        return {
            "G": self.G.tolist(),
            "GI": self.GI.tolist(),
            "E": self.E.tolist(),
            "id": ids,
        }

    @classmethod
    def from_dict(cls, record: Mapping) -> "SparsePolyZonotope":
        G = np.asarray(record["G"], dtype=float)
        n = G.shape[0]
        h = G.shape[1] if G.ndim == 2 else 0
        G = G.reshape(n, h)
        GI = np.asarray(record.get("GI", []), dtype=float)
        GI = GI.reshape(n, -1) if GI.size else np.zeros((n, 0))
        ids = np.asarray(record["id"], dtype=np.int64)
        E = np.asarray(record["E"], dtype=np.int64).reshape(len(ids), h)
        return cls(G, GI, E, ids)


def merge_id(pz1: SparsePolyZonotope, pz2: SparsePolyZonotope):
    """Bring two SPZs to a common identifier vector.

    The merged vector is ``id1`` followed by the identifiers of ``pz2`` that
    do not occur in ``id1``.  Exponent matrices are padded with zero rows, and
    the rows of ``E2`` are permuted to match the merged vector.
    """
    id1 = pz1.id
    id2 = pz2.id
    if np.array_equal(id1, id2):
        return pz1, pz2
    pos1 = {int(v): j for j, v in enumerate(id1)}
    extra = [int(v) for v in id2 if int(v) not in pos1]
    merged = np.concatenate([id1, np.asarray(extra, dtype=np.int64)])
    a = merged.shape[0]

    E1 = np.zeros((a, pz1.h), dtype=np.int64)
    E1[: pz1.p] = pz1.E

    index = {int(v): j for j, v in enumerate(merged)}
    E2 = np.zeros((a, pz2.h), dtype=np.int64)
    for j, v in enumerate(id2):
        E2[index[int(v)]] = pz2.E[j]

    return (
        SparsePolyZonotope(pz1.G, pz1.GI, E1, merged),
        SparsePolyZonotope(pz2.G, pz2.GI, E2, merged),
    )


def _sum_columns(G: np.ndarray, groups: np.ndarray, k: int) -> np.ndarray:
    out = np.empty((G.shape[0], k))
    for i in range(G.shape[0]):
        out[i] = np.bincount(groups, weights=G[i], minlength=k)
    return out


def compact(pz: SparsePolyZonotope) -> SparsePolyZonotope:
    """Merge generators with identical monomials.

    Exponent columns come out sorted lexicographically (first row most
    significant).  Generators that cancel to zero are kept.
    """
    if pz.h == 0:
        return pz
    if pz.p == 0:
        G = pz.G.sum(axis=1, keepdims=True)
        return SparsePolyZonotope(G, pz.GI, np.zeros((0, 1), dtype=np.int64), pz.id)
    # one byte string per column; big-endian bytes compare like the numbers,
    # so sorting the strings orders the columns lexicographically
    E = pz.E
    top = int(E.max()) if E.size else 0
    dtype = ">u1" if top < 2**8 else ">u2" if top < 2**16 else ">u4"
    rows = np.ascontiguousarray(E.T.astype(dtype))
    keys = rows.view(np.dtype((np.void, rows.shape[1] * rows.itemsize))).ravel()
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    E_unique = E[:, first]
    inverse = np.asarray(inverse).reshape(-1)
    G = _sum_columns(pz.G, inverse, E_unique.shape[1])
    return SparsePolyZonotope(G, pz.GI, E_unique, pz.id)


def remove_zero_rows(pz: SparsePolyZonotope) -> SparsePolyZonotope:
    """Drop factors whose exponent row is identically zero."""
    keep = np.any(pz.E != 0, axis=1)
    if keep.all():
        return pz
    return SparsePolyZonotope(pz.G, pz.GI, pz.E[keep], pz.id[keep])


def remove_zero_generators(pz: SparsePolyZonotope) -> SparsePolyZonotope:
    """Drop all-zero dependent and independent generators."""
    keep = np.any(pz.G != 0, axis=0)
    keep_i = np.any(pz.GI != 0, axis=0)
    if keep.all() and keep_i.all():
        return pz
    return SparsePolyZonotope(pz.G[:, keep], pz.GI[:, keep_i], pz.E[:, keep], pz.id)


def normalize(pz: SparsePolyZonotope) -> SparsePolyZonotope:
    """Remove zero generators and unused factors."""
    return remove_zero_rows(remove_zero_generators(pz))


def dense_generator_count(num_factors: int, degree: int) -> int:
    """Number of generators of a dense polynomial zonotope.

    A dense representation stores one generator for every monomial of total
    degree at most ``degree`` in ``num_factors`` factors, that is
    ``C(degree + num_factors, num_factors)`` generators.
    """
    from math import comb

    return comb(degree + num_factors, num_factors)
