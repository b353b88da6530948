import numpy as np
import pytest

from spzreach import IntervalVector, parse_model
from spzreach.benchmarks import builtin_model, gene_network
from spzreach.dynamics import ModelError, interval_eval, lagrange_remainder, quadratic_interval
from spzreach.interval import Interval, IntervalDivisionError
from support import finite_difference_error

SCALAR = "system s\nstates x\ndynamics\nx' = -x + x^2\n"


def test_vanderpol_parses():
    sys = builtin_model("vanderpol")
    assert sys.n == 2 and sys.m == 0
    assert np.allclose(sys.f([0.5, 2.0]), [2.0, (1 - 0.25) * 2.0 - 0.5])


def test_semicolon_separated_equations():
    sys = parse_model("system v\nstates x1 x2\ndynamics\nx1' = x2; x2' = (1 - x1^2)*x2 - x1\n")
    assert sys.rhs == builtin_model("vanderpol").rhs
    assert np.allclose(sys.f([1.0, 1.0]), [1.0, -1.0])


def test_single_linear_equation():
    sys = parse_model("system lin\nstates x1\ndynamics\nx1' = x1\n")
    assert sys.n == 1 and sys.f([3.0]).tolist() == [3.0]


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("system a\nstates x1\ndynamics\nx1' = x2\n", 4, 7),
        ("system a\nstates x\ndynamics\nx' = x^1.5\n", 4, 8),
        ("system a\nstates x\ndynamics\nx' = (x + 1\n", 4, None),
        ("system a\nstates x\nbogus\n", 3, 1),
        ("system a\nstates x\ndynamics\ny' = x\n", 4, 1),
    ],
)
def test_model_errors_carry_position(text, line, col):
    with pytest.raises(ModelError) as info:
        parse_model(text)
    assert info.value.line == line
    if col is not None:
        assert info.value.col == col


@pytest.mark.parametrize(
    "text",
    [
        "states x\ndynamics\nx' = x\n",
        "system a\ndynamics\n",
        "system a\nstates x y\ndynamics\nx' = y\n",
        "system a\nstates x\ndynamics\nx' = x\nx' = 1\n",
        "system a\nstates x\ninputs x\ndynamics\nx' = x\n",
    ],
)
def test_malformed_models(text):
    with pytest.raises(ModelError):
        parse_model(text)


def test_round_trip():
    for sys in (builtin_model("vanderpol"), gene_network(3), parse_model(SCALAR)):
        assert parse_model(sys.to_text()) == sys


def test_comments_are_ignored():
    sys = parse_model("# header\nsystem a  # name\nstates x\ndynamics\nx' = 2*x  # linear\n")
    assert sys.f([1.0]).tolist() == [2.0]


# -- derivatives ---------------------------------------------------------------------------

def test_scalar_dependency_coefficients():
    b = parse_model(SCALAR).taylor([0.0])
    assert b.w.tolist() == [0.0] and b.A.tolist() == [[-1.0]] and b.D.tolist() == [[[2.0]]]


def test_linear_system_has_no_curvature():
    sys = parse_model("system l\nstates x y\ninputs u\ndynamics\nx' = 2*x - y + u\ny' = 3*y\n")
    b = sys.taylor([1.0, -2.0, 0.5])
    assert np.all(b.D == 0)
    assert b.A.tolist() == [[2, -1], [0, 3]] and b.B.tolist() == [[1], [0]]
    box = IntervalVector([-1, -1, -1], [1, 1, 1])
    L = lagrange_remainder(sys, box, [0, 0, 0])
    assert np.all(L.lo == 0) and np.all(L.hi == 0)


def test_vanderpol_at_origin():
    b = builtin_model("vanderpol").taylor([0.0, 0.0])
    assert b.A.tolist() == [[0, 1], [-1, 1]]
    assert b.D[1, 0, 0] == 0.0
    assert b.D[1, 0, 1] == b.D[1, 1, 0] == 0.0


def test_vanderpol_hessian_off_origin():
    b = builtin_model("vanderpol").taylor([0.5, 2.0])
    assert b.D[1, 0, 0] == pytest.approx(-4.0)
    assert b.D[1, 0, 1] == pytest.approx(-1.0)


def test_expansion_point_checks():
    sys = builtin_model("vanderpol")
    with pytest.raises(ValueError):
        sys.taylor([0.0])
    with pytest.raises(ValueError):
        sys.taylor([np.nan, 0.0])


@pytest.mark.parametrize("name", ["vanderpol", "gene"])
def test_derivatives_match_finite_differences(name):
    rng = np.random.default_rng(0)
    sys = builtin_model("vanderpol") if name == "vanderpol" else gene_network(3)
    for _ in range(20):
        z = rng.uniform(-2, 2, sys.n + sys.m) if name == "vanderpol" else rng.uniform(0, 2, sys.n + sys.m)
        assert finite_difference_error(sys, z) < 1e-6


def test_third_order_remainder_of_cube():
    sys = parse_model("system c\nstates x\ndynamics\nx' = x^3\n")
    for r in (0.1, 0.5, 2.0):
        L = lagrange_remainder(sys, IntervalVector([-r], [r]), [0.0])
        assert L.lo[0] == pytest.approx(-(r**3)) and L.hi[0] == pytest.approx(r**3)


def test_remainder_contains_taylor_error():
    rng = np.random.default_rng(1)
    sys = gene_network(2)
    z_star = np.full(sys.n + sys.m, 1.0)
    box = IntervalVector(z_star - 0.3, z_star + 0.3)
    L = lagrange_remainder(sys, box, z_star)
    b = sys.taylor(z_star)
    z = rng.uniform(box.lo, box.hi, size=(2000, sys.n + sys.m))
    d = z - z_star
    lin = b.w + d[:, : sys.n] @ b.A.T + d[:, sys.n :] @ b.B.T
    quad = 0.5 * np.einsum("kj,ijl,kl->ki", d, b.D, d)
    err = sys.f(z[:, : sys.n].T, z[:, sys.n :].T).T - lin - quad
    assert L.contains(err, 1e-12).all()


# -- interval evaluation -------------------------------------------------------------------

def _rhs(text, i=0):
    return parse_model(text).rhs[i]


def test_even_power_is_tight():
    e = _rhs("system a\nstates x\ndynamics\nx' = x^2\n")
    out = interval_eval(e, [Interval(-1, 1)])
    assert (out.lo, out.hi) == (0.0, 1.0)


def test_vanderpol_factor_product():
    e = builtin_model("vanderpol").rhs[1]
    out = interval_eval(e, [Interval(-1, 1), Interval(-1, 1)])
    # (1 - x1^2) x2 - x1 = [0,1]*[-1,1] - [-1,1]
    assert (out.lo, out.hi) == (-2.0, 2.0)


def test_constant_is_degenerate():
    e = _rhs("system a\nstates x\ndynamics\nx' = 3\n")
    out = interval_eval(e, [Interval(-5, 5)])
    assert out.lo == out.hi == 3.0


def test_division_by_zero_interval():
    e = _rhs("system a\nstates x\ndynamics\nx' = 1 / x\n")
    with pytest.raises(IntervalDivisionError):
        interval_eval(e, [Interval(-1, 1)])


def test_interval_soundness_on_samples():
    rng = np.random.default_rng(2)
    sys = gene_network(2)
    lo = rng.uniform(0, 1, sys.n + sys.m)
    hi = lo + rng.uniform(0, 1, sys.n + sys.m)
    box = [Interval(a, b) for a, b in zip(lo, hi)]
    z = rng.uniform(lo, hi, size=(10_000, sys.n + sys.m))
    vals = sys.f(z[:, : sys.n].T, z[:, sys.n :].T)
    for i, e in enumerate(sys.rhs):
        out = interval_eval(e, box)
        assert np.all((vals[i] >= out.lo - 1e-12) & (vals[i] <= out.hi + 1e-12))


def test_quadratic_interval_encloses_samples():
    rng = np.random.default_rng(3)
    D = rng.normal(size=(2, 3, 3))
    D = D + D.transpose(0, 2, 1)
    a = IntervalVector([-1, 0, 0.5], [0, 1, 1.5])
    d = IntervalVector([-0.2, -0.1, 0.0], [0.1, 0.3, 0.2])
    out = quadratic_interval(D, a, d)
    av = rng.uniform(a.lo, a.hi, size=(5000, 3))
    dv = rng.uniform(d.lo, d.hi, size=(5000, 3))
    vals = np.einsum("kj,ijl,kl->ki", av + dv / 2, D, dv)
    assert out.contains(vals, 1e-12).all()
