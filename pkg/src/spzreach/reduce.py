"""Order reduction, restructuring, and the volume-ratio trigger."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convert import zono_enclose
from .ids import unique_id
from .sets import Zonotope
from .spz import SparsePolyZonotope, compact, remove_zero_rows

ZONOTOPE_METHODS = ("girard", "pca")


@dataclass(frozen=True)
class ReductionConfig:
    rho_d: float = 50.0
    p_d: int = 50
    mu_d: float = 1.0
    method: str = "girard"

    def __post_init__(self):
        if self.method not in ZONOTOPE_METHODS:
            raise ValueError(f"unknown zonotope reduction method {self.method!r}")
        if self.p_d < 1:
            raise ValueError("p_d must be positive")
        if self.mu_d < 0:
            raise ValueError("mu_d must be non-negative")

    def check(self, n: int) -> None:
        if self.rho_d < 1 + 1 / n:
            raise ValueError(f"rho_d must be at least 1 + 1/n = {1 + 1 / n:g}")


def _box(G: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Generators of the (possibly rotated) box enclosing <0, G>."""
    if basis is None:
        return np.diag(np.abs(G).sum(axis=1))
    return basis @ np.diag(np.abs(basis.T @ G).sum(axis=1))


def reduce_zonotope(z: Zonotope, rho: float, method: str = "girard") -> Zonotope:
    """Reduce a zonotope to order ``rho`` (Girard's method, optionally PCA-aligned).

    The generators with the smallest ``||g||_1 - ||g||_inf`` are replaced by
    their bounding box.  With ``method="pca"`` the box is taken in the
    principal axes of the generators being replaced.
    """
    if rho < 1:
        raise ValueError("zonotope order must be at least 1")
    if method not in ZONOTOPE_METHODS:
        raise ValueError(f"unknown zonotope reduction method {method!r}")
    n, l = z.G.shape
    if l <= n * rho:
        return z
    kept = max(0, int(math.floor(n * rho + 1e-9)) - n)
    metric = np.abs(z.G).sum(axis=0) - np.abs(z.G).max(axis=0)
    order = np.argsort(metric, kind="stable")
    small, large = order[: l - kept], np.sort(order[l - kept :])
    G_small = z.G[:, small]
    basis = None
    if method == "pca":
        basis = np.linalg.svd(np.hstack([G_small, -G_small]), full_matrices=True)[0]
    box = _box(G_small, basis)
    box = box[:, np.any(box != 0, axis=0)]
    return Zonotope(z.c, np.hstack([z.G[:, large], box]))


def reduction_count(n: int, h: int, q: int, rho_d: float) -> int:
    """Number of generators that must be enclosed to reach order ``rho_d``."""
    raw = h + q - n * (rho_d - 1) + 1
    return max(0, min(h + q, math.ceil(round(raw, 9))))


def reduce(pz: SparsePolyZonotope, rho_d: float, method: str = "girard") -> SparsePolyZonotope:
    """Enclose ``pz`` by an SPZ of order at most ``rho_d``.

    The smallest generators (Euclidean norm over dependent and independent
    generators, stable order on ties) are enclosed by a zonotope which is
    boxed to order one and appended as constant offset plus independent
    generators.
    """
    n, h, q = pz.n, pz.h, pz.q
    if rho_d < 1 + 1 / n:
        raise ValueError(f"rho_d must be at least 1 + 1/n = {1 + 1 / n:g}")
    a = reduction_count(n, h, q, rho_d)
    if a == 0:
        return pz
    norms = np.linalg.norm(np.hstack([pz.G, pz.GI]), axis=0)
    picked = np.zeros(h + q, dtype=bool)
    picked[np.argsort(norms, kind="stable")[:a]] = True
    dep, ind = picked[:h], picked[h:]

    z = zono_enclose(SparsePolyZonotope(pz.G[:, dep], pz.GI[:, ind], pz.E[:, dep], pz.id))
    z = reduce_zonotope(z, 1, method)
    G = np.hstack([z.c.reshape(-1, 1), pz.G[:, ~dep]])
    E = np.hstack([np.zeros((pz.p, 1), dtype=np.int64), pz.E[:, ~dep]])
    GI = np.hstack([pz.GI[:, ~ind], z.G])
    return remove_zero_rows(SparsePolyZonotope(G, GI, E, pz.id))


def vol_ratio(pz: SparsePolyZonotope) -> float:
    """Interval-hull volume of the independent part over that of the dependent part.

    Dimensions where both parts have zero width are ignored.  A dimension
    with independent width but no dependent width gives ``inf``.
    """
    if pz.q == 0:
        return 0.0
    w_ind = 2.0 * np.abs(pz.GI).sum(axis=1)
    dep = zono_enclose(SparsePolyZonotope(pz.G, None, pz.E, pz.id))
    w_dep = dep.interval().width
    active = (w_ind > 0) | (w_dep > 0)
    if np.any(active & (w_dep == 0)):
        return math.inf
    return float(np.prod(w_ind[active] / w_dep[active]))


def _independent_style(E: np.ndarray) -> np.ndarray:
    """Factors that occur in exactly one generator, linearly and alone."""
    nz = E != 0
    single = nz.sum(axis=1) == 1
    out = np.zeros(E.shape[0], dtype=bool)
    for k in np.flatnonzero(single):
        j = np.flatnonzero(nz[k])[0]
        out[k] = E[k, j] == 1 and nz[:, j].sum() == 1
    return out


def prune_order(pz: SparsePolyZonotope) -> np.ndarray:
    """Row indices of ``pz.E`` in the order factors get removed under ``p_d``.

    Independent-style factors go first, then the remaining ones; within each
    group the most recently created identifier (largest) goes first.
    """
    indep = _independent_style(pz.E)
    rank = np.lexsort((-pz.id, ~indep))
    return rank


def prune_factors(pz: SparsePolyZonotope, count: int) -> SparsePolyZonotope:
    """Remove ``count`` dependent factors by enclosing their generators with a zonotope."""
    if count <= 0:
        return pz
    rows = prune_order(pz)[:count]
    drop = np.zeros(pz.p, dtype=bool)
    drop[rows] = True
    cols = np.any(pz.E[drop] != 0, axis=0)
    z = zono_enclose(SparsePolyZonotope(pz.G[:, cols], None, pz.E[:, cols], pz.id))
    keep = ~drop
    G = np.hstack([z.c.reshape(-1, 1), pz.G[:, ~cols]])
    E = np.hstack([np.zeros((int(keep.sum()), 1), dtype=np.int64), pz.E[keep][:, ~cols]])
    GI = np.hstack([pz.GI, z.G])
    return SparsePolyZonotope(G, GI, E, pz.id[keep])


def restructure(pz: SparsePolyZonotope, p_d: int) -> SparsePolyZonotope:
    """Replace all independent generators by fresh dependent factors.

    The independent part is boxed in its principal axes to ``n`` generators,
    each of which becomes a new factor.  When that would exceed ``p_d``
    factors, existing factors are removed first.
    """
    n = pz.n
    if p_d < n:
        raise ValueError(f"p_d = {p_d} is smaller than the dimension {n}")
    pz = remove_zero_rows(pz)
    if pz.q == 0 and pz.p <= p_d:
        return pz

    # pruned generators join the independent part, so room for n new factors is needed
    pz = prune_factors(pz, pz.p + n - p_d)
    z = reduce_zonotope(Zonotope(np.zeros(n), pz.GI), 1, "pca")
    G_z = z.G[:, np.any(z.G != 0, axis=0)]
    k = G_z.shape[1]
    p = pz.p
    G = np.hstack([z.c.reshape(-1, 1), pz.G, G_z])
    E = np.zeros((p + k, 1 + pz.h + k), dtype=np.int64)
    E[:p, 1 : 1 + pz.h] = pz.E
    E[p:, 1 + pz.h :] = np.eye(k, dtype=np.int64)
    ids = np.concatenate([pz.id, unique_id(k)])
    return compact(SparsePolyZonotope(G, None, E, ids))
