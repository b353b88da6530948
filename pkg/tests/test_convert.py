import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import Delaunay

from spzreach import (
    IntervalVector,
    Polytope,
    SparsePolyZonotope,
    TaylorModel,
    Zonotope,
    compact,
    from_interval,
    from_polytope,
    from_taylor_model,
    from_zonotope,
    interval_enclose,
    poly_enclose,
    range_bound,
    support_function,
    template_polyhedron,
    zono_enclose,
)
from spzreach.convert import monomial_bounds
from support import polytope_members, random_spz, sample_factors, zonotope_members


def enclosure_example():
    G = np.array([[-0.5, 1, 0, -1, 1], [-0.5, 1, 1, 1, 1]])
    E = np.array([[0, 1, 0, 1, 2], [0, 0, 1, 1, 0]])
    return SparsePolyZonotope(G, None, E, [1, 2])


def _columns(M):
    return sorted(tuple(np.round(col, 12)) for col in np.asarray(M).T)


# -- conversions --------------------------------------------------------------------

def test_from_zonotope_structure():
    pz = from_zonotope(Zonotope(np.array([1.0, 2.0]), np.eye(2)))
    assert pz.G.tolist() == [[1, 1, 0], [2, 0, 1]]
    assert pz.E.tolist() == [[0, 1, 0], [0, 0, 1]]
    assert pz.q == 0


def test_from_zonotope_without_generators_is_a_point():
    pz = from_zonotope(Zonotope(np.array([3.0, -1.0]), np.zeros((2, 0))))
    assert pz.p == 0
    assert np.allclose(pz.evaluate(np.zeros(0)), [3, -1])


def test_zonotope_round_trip():
    z = Zonotope(np.array([0.5, -1.0]), np.array([[1.0, 2.0, 0.0], [0.0, 1.0, -3.0]]))
    back = zono_enclose(from_zonotope(z))
    assert np.allclose(back.c, z.c)
    assert _columns(back.G) == _columns(z.G)


def test_from_interval_symmetric_box():
    pz = from_interval(IntervalVector(-np.ones(2), np.ones(2)))
    assert np.allclose(pz.G[:, 0], 0) and np.allclose(pz.G[:, 1:], np.eye(2))


def test_from_interval_degenerate_dimension():
    pz = from_interval(IntervalVector([0.0, 1.0], [2.0, 1.0]))
    assert np.allclose(pz.G[:, 0], [1, 1])
    assert np.allclose(pz.G[:, 1:], np.diag([1.0, 0.0]))


def test_from_interval_point():
    pz = from_interval(IntervalVector.point([2.0, 3.0]))
    assert np.allclose(interval_enclose(pz).width, 0)


def test_from_polytope_single_vertex():
    pz = from_polytope(Polytope(np.array([[1.0, 2.0]])))
    assert np.allclose(interval_enclose(pz).lo, [1, 2]) and np.allclose(interval_enclose(pz).hi, [1, 2])


def test_from_polytope_segment():
    pz = compact(from_polytope(Polytope(np.array([[1.0], [-1.0]]))))
    box = interval_enclose(pz)
    assert box.lo[0] == pytest.approx(-1) and box.hi[0] == pytest.approx(1)
    alpha = np.linspace(-1, 1, 11)
    vals = pz.evaluate(np.column_stack([np.zeros((11, pz.p - 1)), alpha]))[:, 0] if pz.p > 1 else None
    if vals is not None:
        assert vals.min() >= -1 - 1e-12 and vals.max() <= 1 + 1e-12


def test_from_polytope_unit_square_both_ways():
    rng = np.random.default_rng(0)
    V = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pz = from_polytope(Polytope(V))
    # convex combinations of the vertices land in the interval hull of the result
    w = rng.dirichlet(np.ones(4), size=10_000)
    box = interval_enclose(pz)
    assert box.contains(w @ V, 1e-9).all()
    # and points of the result lie in the square
    pts, _, _ = pz.sample(rng, 10_000, vertices=0.3)
    assert np.all(pts >= -1e-9) and np.all(pts <= 1 + 1e-9)


def test_from_polytope_warns_above_cap():
    V = np.random.default_rng(1).normal(size=(5, 2))
    with pytest.warns(RuntimeWarning):
        from_polytope(Polytope(V), cap=3)


def test_from_taylor_model_square():
    tm = TaylorModel([np.array([1.0])], [np.array([[2]])], IntervalVector([-0.1], [0.1]), IntervalVector([0.0], [2.0]))
    pz = from_taylor_model(tm)
    assert pz.G.tolist() == [[1.0, 2.0, 1.0]]
    assert pz.E.tolist() == [[0, 1, 2]]
    assert np.allclose(pz.GI, [[0.1]])
    # true range of (1 + a)^2 + [-0.1, 0.1]
    a = np.linspace(-1, 1, 2001)
    vals = np.concatenate([pz.evaluate(np.column_stack([a]), np.full((2001, 1), s))[:, 0] for s in (-1, 1)])
    assert vals.min() == pytest.approx(-0.1) and vals.max() == pytest.approx(4.1)
    assert interval_enclose(pz).contains(vals[:, None], 1e-12).all()


def test_from_taylor_model_identity():
    tm = TaylorModel([np.array([1.0])], [np.array([[1]])], IntervalVector([0.0], [0.0]), IntervalVector([-1.0], [1.0]))
    pz = from_taylor_model(tm)
    assert np.allclose(pz.evaluate([0.3], np.zeros(pz.q)), [0.3])


def test_from_taylor_model_zero_polynomial():
    tm = TaylorModel([np.zeros(0), np.zeros(0)], [np.zeros((1, 0)), np.zeros((1, 0))],
                     IntervalVector(-np.ones(2), np.ones(2)), IntervalVector([0.0], [1.0]))
    box = interval_enclose(from_taylor_model(tm))
    assert np.allclose(box.lo, -1) and np.allclose(box.hi, 1)


def test_from_taylor_model_matches_evaluation():
    rng = np.random.default_rng(3)
    coeffs = [rng.normal(size=4), rng.normal(size=3)]
    exps = [rng.integers(0, 4, size=(2, 4)), rng.integers(0, 4, size=(2, 3))]
    dom = IntervalVector([-1.0, 0.5], [2.0, 1.5])
    tm = TaylorModel(coeffs, exps, IntervalVector([0.0, 0.0], [0.0, 0.0]), dom)
    pz = from_taylor_model(tm)
    alpha = rng.uniform(-1, 1, size=(200, 2))
    x = dom.center + alpha * dom.radius
    # factors are created in domain-variable order
    got = pz.evaluate(alpha, np.zeros((200, pz.q)))
    assert np.allclose(got, tm.evaluate(x), rtol=1e-12, atol=1e-12)


# -- enclosures -------------------------------------------------------------------------

def test_zono_enclose_running_example():
    z = zono_enclose(enclosure_example())
    assert np.allclose(z.c, [0, 0])
    assert _columns(z.G) == _columns(np.array([[0.5, 1, 0, -1], [0.5, 1, 1, 1]]))


def test_zono_enclose_even_monomial():
    z = zono_enclose(SparsePolyZonotope([[1.0]], None, [[2]], [1]))
    assert z.c.tolist() == [0.5] and z.G.tolist() == [[0.5]]


def test_zono_enclose_running_example_sampled():
    rng = np.random.default_rng(4)
    pz = enclosure_example()
    z = zono_enclose(pz)
    pts, _, _ = pz.sample(rng, 100_000, vertices=0.2)
    # the enclosure is a zonotope with four generators in the plane: compare against its halfspaces
    normals = np.array([[-g[1], g[0]] for g in z.G.T])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    radius = np.abs(normals @ z.G).sum(axis=1)
    assert np.all(np.abs((pts - z.c) @ normals.T) <= radius + 1e-9)


def test_poly_enclose_running_example():
    rng = np.random.default_rng(5)
    pz = enclosure_example()
    P = poly_enclose(pz)
    # multilinear part at the four sign patterns, before the alpha_1^2 segment is added
    dep = {(-0.5, 2.5), (1.5, -1.5), (-0.5, -1.5), (-2.5, -1.5)}
    seg = np.array([[0.0, 0.0], [1.0, 1.0]])
    cands = {tuple(np.round(d + s, 12)) for d in dep for s in seg}
    hull = {tuple(np.round(v, 12)) for v in P.V}
    assert hull <= cands
    pts, _, _ = pz.sample(rng, 100_000, vertices=0.2)
    assert np.all(Delaunay(P.V).find_simplex(pts, tol=1e-9) >= 0)


def test_poly_enclose_of_zonotope_is_the_zonotope():
    z = Zonotope(np.array([1.0, 0.0]), np.array([[1.0, 0.5], [0.0, 1.0]]))
    P = poly_enclose(from_zonotope(z))
    expected = {tuple(np.round(z.c + z.G @ s, 12)) for s in [(-1, -1), (-1, 1), (1, -1), (1, 1)]}
    assert {tuple(np.round(v, 12)) for v in P.V} == expected


def test_poly_enclose_of_point():
    P = poly_enclose(SparsePolyZonotope.point([1.0, 2.0]))
    assert P.V.tolist() == [[1.0, 2.0]]


def test_poly_enclose_cap():
    pz = SparsePolyZonotope(np.ones((1, 5)), None, np.eye(5, dtype=int))
    with pytest.raises(ValueError):
        poly_enclose(pz, cap=4)


def test_range_bound_projection_of_running_example():
    # -0.5 + a1 - a1 a2 + a1^2 with a1^2 in [0, 1]
    lo, hi = range_bound([-0.5, 1, 0, -1, 1], [[0, 1, 0, 1, 2], [0, 0, 1, 1, 0]])
    assert (lo, hi) == (-2.5, 2.5)


@pytest.mark.parametrize(
    "g,E,expected",
    [([3.0], [[0]], (3.0, 3.0)), ([1.0], [[2]], (0.0, 1.0)), ([-2.0], [[3]], (-2.0, 2.0)), ([1.0, 1.0], [[2, 4]], (0.0, 2.0))],
)
def test_range_bound_cases(g, E, expected):
    assert range_bound(g, E) == expected


def test_range_bound_unknown_method():
    with pytest.raises(KeyError):
        range_bound([1.0], [[1]], method="bernstein")


def test_monomial_bounds():
    lo, hi = monomial_bounds(np.array([[0, 2, 1], [0, 2, 2]]))
    assert lo.tolist() == [1, 0, -1] and hi.tolist() == [1, 1, 1]


def test_support_function_running_example():
    s = support_function(enclosure_example(), [1.0, 0.0])
    assert s.bound == pytest.approx(2.5)


def test_support_function_zero_direction():
    assert support_function(enclosure_example(), [0.0, 0.0]).bound == 0.0


def test_support_function_of_zonotope_is_exact():
    rng = np.random.default_rng(6)
    z = Zonotope(rng.normal(size=3), rng.normal(size=(3, 5)))
    pz = from_zonotope(z)
    for d in rng.normal(size=(10, 3)):
        assert support_function(pz, d).bound == pytest.approx(d @ z.c + np.abs(d @ z.G).sum(), rel=1e-12)


def test_interval_enclose_running_example():
    box = interval_enclose(enclosure_example())
    assert box.lo.tolist() == [-2.5, -3.5] and box.hi.tolist() == [2.5, 3.5]


def test_interval_enclose_point():
    box = interval_enclose(SparsePolyZonotope.point([1.0, -1.0]))
    assert box.lo.tolist() == [1.0, -1.0] and box.hi.tolist() == [1.0, -1.0]


def test_template_with_axes_reproduces_interval_hull():
    pz = random_spz(np.random.default_rng(7), n=3)
    box = interval_enclose(pz)
    axes = np.vstack([np.eye(3), -np.eye(3)])
    vals = [s.bound for s in template_polyhedron(pz, axes)]
    assert np.allclose(vals[:3], box.hi) and np.allclose(vals[3:], -box.lo)


def test_template_needs_directions():
    with pytest.raises(ValueError):
        template_polyhedron(enclosure_example(), [])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_enclosures_contain_samples(seed):
    rng = np.random.default_rng(seed)
    pz = random_spz(rng, n=int(rng.integers(1, 4)), p=int(rng.integers(1, 4)), q=int(rng.integers(0, 3)))
    a, b = sample_factors(rng, pz, 20)
    pts = pz.evaluate(a, b)
    z = zono_enclose(pz)
    assert zonotope_members([z.c] * 20, [z.G] * 20, pts).all()
    assert polytope_members(poly_enclose(pz).V, pts).all()
    assert interval_enclose(pz).contains(pts, 1e-9).all()
