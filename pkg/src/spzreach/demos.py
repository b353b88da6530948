"""Plot data for the printed set-operation examples.

Every record carries a ``label`` and any of ``samples`` (point cloud),
``polygon`` (ordered vertices) and ``set`` (serialized SPZ).  Sample clouds
use a fixed seed so the output is reproducible.
"""
from __future__ import annotations

import numpy as np

from .convert import interval_enclose, poly_enclose, zono_enclose
from .geometry import convex_hull_2d
from .ops import conv_hull, quad_map
from .spz import SparsePolyZonotope

SELECTORS = ("example1", "enclosure", "quadmap", "convexhull")
SEED = 2020
SAMPLES = 400


def example1() -> SparsePolyZonotope:
    G = np.array([[4.0, 2, 1, 2], [4, 0, 2, 2]])
    E = np.array([[0, 1, 0, 3], [0, 0, 1, 1]])
    return SparsePolyZonotope(G, np.array([[1.0], [0.0]]), E, [1, 2])


def enclosure_example() -> SparsePolyZonotope:
    G = np.array([[-0.5, 1, 0, -1, 1], [-0.5, 1, 1, 1, 1]])
    E = np.array([[0, 1, 0, 1, 2], [0, 0, 1, 1, 0]])
    return SparsePolyZonotope(G, None, E, [1, 2])


def quadmap_example():
    G = np.array([[1.0, -1, 1], [-1, 2, 1]])
    E = np.array([[1, 0, 2], [0, 1, 1]])
    pz = SparsePolyZonotope(G, np.array([[0.1], [0.0]]), E, [1, 2])
    Q = np.array([[[0.5, 0.5], [1, -0.5]], [[-1, 0], [1, 0]]])
    return pz, Q


def convexhull_example():
    pz1 = SparsePolyZonotope(
        np.array([[-2.0, 2, 0, 1], [-2, 0, 2, 1]]), None, np.array([[0, 1, 0, 3], [0, 0, 1, 1]]), [1, 2]
    )
    pz2 = SparsePolyZonotope(
        np.array([[3.0, 1, -2, 1], [3, 2, 3, 1]]),
        np.array([[0.5], [0.0]]),
        np.array([[0, 1, 0, 2], [0, 0, 1, 1]]),
        [1, 2],
    )
    return pz1, pz2


def _canonical(pz: SparsePolyZonotope) -> dict:
    ids = {int(v): i + 1 for i, v in enumerate(sorted(pz.id.tolist()))}
    return pz.to_dict(ids)


def _cloud(pz: SparsePolyZonotope, rng, k: int = SAMPLES) -> list:
    pts, _, _ = pz.sample(rng, k, vertices=0.3)
    return pts.tolist()


def _record(selector: str, label: str, **fields) -> dict:
    return {"kind": "demo", "selector": selector, "label": label, **fields}


def _example1_records(rng) -> list[dict]:
    pz = example1()
    stage_a = SparsePolyZonotope(pz.G[:, :3], None, pz.E[:, :3], pz.id)
    stage_b = SparsePolyZonotope(pz.G, None, pz.E, pz.id)
    # (c): the dependent part shifted by both extreme values of the independent factor
    pts, _, _ = stage_b.sample(rng, SAMPLES // 2, vertices=0.3)
    shifted = np.vstack([pts - pz.GI[:, 0], pts + pz.GI[:, 0]])
    out = [
        _record("example1", "a", samples=_cloud(stage_a, rng), polygon=zono_enclose(stage_a).polygon().tolist(), set=_canonical(stage_a)),
        _record("example1", "b", samples=_cloud(stage_b, rng), polygon=zono_enclose(stage_b).polygon().tolist(), set=_canonical(stage_b)),
        _record("example1", "c", samples=shifted.tolist(), polygon=zono_enclose(pz).polygon().tolist(), set=_canonical(pz)),
        _record("example1", "d", samples=_cloud(pz, rng), polygon=zono_enclose(pz).polygon().tolist(), set=_canonical(pz)),
    ]
    return out


def _enclosure_records(rng) -> list[dict]:
    pz = enclosure_example()
    z = zono_enclose(pz)
    P = poly_enclose(pz)
    box = interval_enclose(pz)
    return [
        _record("enclosure", "set", samples=_cloud(pz, rng), set=_canonical(pz)),
        _record("enclosure", "zonotope", polygon=z.polygon().tolist(), center=z.c.tolist(), generators=z.G.T.tolist()),
        _record("enclosure", "polytope", polygon=convex_hull_2d(P.V).tolist()),
        _record("enclosure", "interval", polygon=convex_hull_2d(box.corners()).tolist(), lo=box.lo.tolist(), hi=box.hi.tolist()),
    ]


def _quadmap_records(rng) -> list[dict]:
    pz, Q = quadmap_example()
    x, _, _ = pz.sample(rng, SAMPLES, vertices=0.3)
    exact = np.einsum("ki,mij,kj->km", x, Q, x)
    enc = quad_map(pz, Q)
    return [
        _record("quadmap", "exact", samples=exact.tolist()),
        _record("quadmap", "enclosure", samples=_cloud(enc, rng), polygon=zono_enclose(enc).polygon().tolist(), set=_canonical(enc)),
    ]


def _convexhull_records(rng) -> list[dict]:
    pz1, pz2 = convexhull_example()
    # the convex hull contains every segment between points of the two sets
    a, _, _ = pz1.sample(rng, SAMPLES, vertices=0.3)
    b, _, _ = pz2.sample(rng, SAMPLES, vertices=0.3)
    lam = rng.uniform(0.0, 1.0, size=(SAMPLES, 1))
    exact = lam * a + (1 - lam) * b
    enc = conv_hull(pz1, pz2)
    return [
        _record("convexhull", "set1", samples=a.tolist(), set=_canonical(pz1)),
        _record("convexhull", "set2", samples=b.tolist(), set=_canonical(pz2)),
        _record("convexhull", "exact", samples=exact.tolist(), polygon=convex_hull_2d(np.vstack([a, b])).tolist()),
        _record("convexhull", "enclosure", samples=_cloud(enc, rng), polygon=zono_enclose(enc).polygon().tolist(), set=_canonical(enc)),
    ]


_BUILDERS = {
    "example1": _example1_records,
    "enclosure": _enclosure_records,
    "quadmap": _quadmap_records,
    "convexhull": _convexhull_records,
}


def demo_records(selector: str) -> list[dict]:
    if selector not in _BUILDERS:
        raise ValueError(f"unknown demo '{selector}'; choose from {', '.join(SELECTORS)}")
    return _BUILDERS[selector](np.random.default_rng(SEED))
