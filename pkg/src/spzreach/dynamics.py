"""ODE models: a small text grammar, an expression tree, derivatives, interval evaluation.

Model files look like::

    system vanderpol
    states x1 x2
    inputs
    dynamics
    x1' = x2
    x2' = (1 - x1^2)*x2 - x1

Expressions use ``+ - * /``, non-negative integer powers ``^`` and
parentheses.  ``#`` starts a comment; ``;`` may separate equations on one
line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from math import factorial
from typing import Mapping, Sequence, Union

import numpy as np

from .interval import Interval
from .sets import IntervalVector


class ModelError(ValueError):
    """Invalid model text; carries the source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)


# -- expression tree ------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    """Variable ``index`` in the stacked vector z = (x, u)."""

    index: int
    name: str


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Div:
    num: "Expr"
    den: "Expr"


Expr = Union[Const, Var, Add, Mul, Neg, Pow, Div]

ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


# simplifying constructors, used when building derivatives
def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Add(a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def power(a: Expr, k: int) -> Expr:
    if k == 0:
        return ONE
    if k == 1:
        return a
    if _is_const(a):
        return Const(a.value**k)
    return Pow(a, k)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def free_vars(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.index,))
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, (Add, Mul)):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Div):
        return free_vars(e.num) | free_vars(e.den)
    if isinstance(e, Neg):
        return free_vars(e.arg)
    return free_vars(e.base)


def diff(e: Expr, j: int) -> Expr:
    """Symbolic partial derivative with respect to variable ``j``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == j else ZERO
    if j not in free_vars(e):
        return ZERO
    if isinstance(e, Add):
        return add(diff(e.left, j), diff(e.right, j))
    if isinstance(e, Neg):
        return neg(diff(e.arg, j))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, j), e.right), mul(e.left, diff(e.right, j)))
    if isinstance(e, Pow):
        return mul(mul(Const(float(e.exponent)), power(e.base, e.exponent - 1)), diff(e.base, j))
    if isinstance(e, Div):
        da, db = diff(e.num, j), diff(e.den, j)
        first = div(da, e.den)
        if _is_const(db, 0.0):
            return first
        return add(first, neg(div(mul(e.num, db), power(e.den, 2))))
    raise TypeError(f"unknown node {e!r}")


def interval_eval(e: Expr, box: Sequence[Interval]) -> Interval:
    """Interval enclosure of ``e`` over the box (one interval per variable)."""
    if isinstance(e, Const):
        return Interval.point(e.value)
    if isinstance(e, Var):
        return box[e.index]
    if isinstance(e, Add):
        return interval_eval(e.left, box) + interval_eval(e.right, box)
    if isinstance(e, Mul):
        return interval_eval(e.left, box) * interval_eval(e.right, box)
    if isinstance(e, Neg):
        return -interval_eval(e.arg, box)
    if isinstance(e, Pow):
        return interval_eval(e.base, box) ** e.exponent
    if isinstance(e, Div):
        return interval_eval(e.num, box) / interval_eval(e.den, box)
    raise TypeError(f"unknown node {e!r}")


def to_python(e: Expr) -> str:
    """Python source evaluating ``e`` given a sequence ``z`` of variables."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return f"z[{e.index}]"
    if isinstance(e, Add):
        return f"({to_python(e.left)} + {to_python(e.right)})"
    if isinstance(e, Mul):
        return f"({to_python(e.left)} * {to_python(e.right)})"
    if isinstance(e, Neg):
        return f"(-{to_python(e.arg)})"
    if isinstance(e, Pow):
        return f"({to_python(e.base)} ** {e.exponent})"
    if isinstance(e, Div):
        return f"({to_python(e.num)} / {to_python(e.den)})"
    raise TypeError(f"unknown node {e!r}")


def to_text(e: Expr) -> str:
    """Model-grammar text; every compound node is parenthesized."""
    if isinstance(e, Const):
        s = repr(e.value)
        return f"(-{s[1:]})" if e.value < 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        return f"({to_text(e.left)} + {to_text(e.right)})"
    if isinstance(e, Mul):
        return f"({to_text(e.left)} * {to_text(e.right)})"
    if isinstance(e, Neg):
        return f"(-{to_text(e.arg)})"
    if isinstance(e, Pow):
        return f"{to_text(e.base)}^{e.exponent}"
    if isinstance(e, Div):
        return f"({to_text(e.num)} / {to_text(e.den)})"
    raise TypeError(f"unknown node {e!r}")


def _compile(exprs: Sequence[Expr]):
    body = ", ".join(to_python(e) for e in exprs)
    return eval(compile(f"lambda z: ({body},)", "<model>", "eval"), {})


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t]+)|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line: int, col0: int) -> list[_Tok]:
    text = text.replace("−", "-")
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelError(f"unexpected character {text[pos]!r}", line, col0 + pos)
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), line, col0 + pos))
        pos = m.end()
    out.append(_Tok("end", "", line, col0 + len(text)))
    return out


class _ExprParser:
    def __init__(self, tokens: list[_Tok], names: Mapping[str, int]):
        self.toks, self.i, self.names = tokens, 0, names

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, t: _Tok | None = None):
        t = t or self.peek()
        raise ModelError(msg, t.line, t.col)

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek().kind != "end":
            self.fail(f"unexpected {self.peek().text!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Add(e, Neg(rhs))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.peek().text == "-":
            self.take()
            return Neg(self.unary())
        if self.peek().text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            t = self.take()
            if t.text == "-":
                self.fail("exponents must be non-negative integers", t)
            if t.kind != "num":
                self.fail("expected an integer exponent", t)
            value = float(t.text)
            if not value.is_integer() or not re.fullmatch(r"\d+", t.text):
                self.fail(f"non-integer exponent {t.text}", t)
            base = Pow(base, int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.take()
        if t.kind == "num":
            return Const(float(t.text))
        if t.kind == "id":
            if t.text not in self.names:
                self.fail(f"undeclared identifier {t.text!r}", t)
            return Var(self.names[t.text], t.text)
        if t.text == "(":
            e = self.expr()
            if self.peek().text != ")":
                self.fail("expected ')'")
            self.take()
            return e
        self.fail("expected a number, identifier or '('" if t.kind != "end" else "unexpected end of expression", t)


# -- systems ---------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeBundle:
    """Taylor coefficients of f at ``z_star``; D[i] is the Hessian of f_i over z = (x, u)."""

    z_star: np.ndarray
    w: np.ndarray
    A: np.ndarray
    B: np.ndarray
    D: np.ndarray


@dataclass(frozen=True, eq=False)
class NonlinearSystem:
    """Right-hand side ``x' = f(x, u)`` given by one expression per state."""

    name: str
    states: tuple
    inputs: tuple
    rhs: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.states:
            raise ModelError("a system needs at least one state")
        if len(self.rhs) != len(self.states):
            raise ModelError("one right-hand side per state is required")
        names = list(self.states) + list(self.inputs)
        if len(set(names)) != len(names):
            raise ModelError("state and input names must be distinct")

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def m(self) -> int:
        return len(self.inputs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NonlinearSystem):
            return NotImplemented
        return (self.name, self.states, self.inputs, self.rhs) == (
            other.name, other.states, other.inputs, other.rhs,
        )

    def __hash__(self) -> int:
        return hash((self.name, self.states, self.inputs, self.rhs))

    # derivatives are stored sparsely, keyed by sorted variable-index tuples
    def derivatives(self, order: int) -> list[dict]:
        """``out[i][(j, k, ...)]`` is the nonzero partial derivative of f_i."""
        key = ("d", order)
        if key not in self._cache:
            if order == 0:
                out = [{(): e} for e in self.rhs]
            else:
                out = []
                for prev in self.derivatives(order - 1):
                    cur = {}
                    for idx, e in prev.items():
                        start = idx[-1] if idx else 0
                        for j in sorted(free_vars(e)):
                            if j < start:
                                continue
                            d = diff(e, j)
                            if not _is_const(d, 0.0):
                                cur[idx + (j,)] = d
                    out.append(cur)
            self._cache[key] = out
        return self._cache[key]

    @cached_property
    def _f(self):
        return _compile(self.rhs)

    @cached_property
    def _jac(self):
        entries = [(i, idx[0], e) for i, d in enumerate(self.derivatives(1)) for idx, e in d.items()]
        return entries, _compile([e for *_, e in entries]) if entries else None

    @cached_property
    def _hess(self):
        entries = [(i, idx, e) for i, d in enumerate(self.derivatives(2)) for idx, e in d.items()]
        return entries, _compile([e for *_, e in entries]) if entries else None

    def _z(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.zeros(self.m) if u is None else np.asarray(u, dtype=float)
        return [x[i] for i in range(self.n)] + [u[i] for i in range(self.m)]

    def f(self, x, u=None) -> np.ndarray:
        """Evaluate f; ``x`` may be (n,) or (n, k) for k points at once."""
        x = np.asarray(x, dtype=float)
        vals = self._f(self._z(x, u))
        return np.array([np.broadcast_to(v, x.shape[1:]) for v in vals], dtype=float)

    def taylor(self, z_star) -> DerivativeBundle:
        """Value, Jacobian blocks and Hessians of f at z* = (x*, u*)."""
        z_star = np.asarray(z_star, dtype=float).reshape(-1)
        n, m = self.n, self.m
        N = n + m
        if z_star.shape[0] != N or not np.all(np.isfinite(z_star)):
            raise ValueError(f"expansion point must be a finite vector of length {N}")
        z = list(z_star)
        w = np.array(self._f(z), dtype=float)
        J = np.zeros((n, N))
        entries, fn = self._jac
        if fn is not None:
            for (i, j, _), v in zip(entries, fn(z)):
                J[i, j] = v
        D = np.zeros((n, N, N))
        entries, fn = self._hess
        if fn is not None:
            for (i, (j, k), _), v in zip(entries, fn(z)):
                D[i, j, k] = D[i, k, j] = v
        return DerivativeBundle(z_star, w, J[:, :n], J[:, n:], D)

    def third_derivative_bounds(self, box: Sequence[Interval]) -> list[dict]:
        """Interval enclosures of all nonzero third partials over ``box``."""
        return [{idx: interval_eval(e, box) for idx, e in d.items()} for d in self.derivatives(3)]

    def interval_rhs(self, box: Sequence[Interval]) -> list[Interval]:
        return [interval_eval(e, box) for e in self.rhs]

    def to_text(self) -> str:
        lines = [f"system {self.name}", "states " + " ".join(self.states), ("inputs " + " ".join(self.inputs)).rstrip()]
        lines.append("dynamics")
        for s, e in zip(self.states, self.rhs):
            text = to_text(e)
            if text.startswith("(") and _balanced_outer(text):
                text = text[1:-1]
            lines.append(f"{s}' = {text}")
        return "\n".join(lines) + "\n"


def _balanced_outer(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and i < len(text) - 1:
            return False
    return True


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def parse_model(text: str) -> NonlinearSystem:
    """Parse model text into a :class:`NonlinearSystem`."""
    name = None
    states: list[str] | None = None
    inputs: list[str] = []
    equations: dict[str, tuple] = {}
    in_dynamics = False

    def names_of(words, lineno, kind):
        for w in words:
            if not _IDENT.match(w):
                raise ModelError(f"invalid {kind} name {w!r}", lineno, 1)
        return list(words)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if not in_dynamics:
            words = line.split()
            head = words[0]
            if head == "system":
                if len(words) != 2:
                    raise ModelError("expected 'system <name>'", lineno, 1)
                name = words[1]
            elif head == "states":
                states = names_of(words[1:], lineno, "state")
            elif head == "inputs":
                inputs = names_of(words[1:], lineno, "input")
            elif head == "dynamics":
                if len(words) != 1:
                    raise ModelError("unexpected text after 'dynamics'", lineno, len(raw) - len(raw.lstrip()) + 9)
                if states is None:
                    raise ModelError("'states' must be declared before 'dynamics'", lineno, 1)
                in_dynamics = True
            else:
                raise ModelError(f"unknown section {head!r}", lineno, raw.index(head) + 1)
            continue

        offset = 0
        for part in line.split(";"):
            col = offset + 1
            offset += len(part) + 1
            if not part.strip():
                continue
            m = re.match(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*'\s*=", part)
            if not m:
                raise ModelError("expected \"<state>' = <expression>\"", lineno, col)
            lhs = m.group(1)
            if lhs not in states:
                raise ModelError(f"undeclared state {lhs!r}", lineno, col + m.start(1))
            if lhs in equations:
                raise ModelError(f"duplicate equation for {lhs!r}", lineno, col + m.start(1))
            equations[lhs] = (part[m.end():], lineno, col + m.end())

    if name is None:
        raise ModelError("missing 'system <name>' line")
    if states is None:
        raise ModelError("missing 'states' line")
    if not in_dynamics:
        raise ModelError("missing 'dynamics' section")
    missing = [s for s in states if s not in equations]
    if missing:
        raise ModelError(f"no equation for state(s) {', '.join(missing)}")

    index = {s: i for i, s in enumerate(states + inputs)}
    rhs = []
    for s in states:
        src, lineno, col = equations[s]
        rhs.append(_ExprParser(_tokenize(src, lineno, col), index).parse())
    return NonlinearSystem(name, tuple(states), tuple(inputs), tuple(rhs))


def load_model(path) -> NonlinearSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _multiplicity(idx: tuple) -> int:
    """Number of distinct orderings of the index tuple."""
    counts: dict = {}
    for j in idx:
        counts[j] = counts.get(j, 0) + 1
    out = factorial(len(idx))
    for c in counts.values():
        out //= factorial(c)
    return out


def _displacement_product(idx: tuple, delta: Sequence[Interval]) -> Interval:
    out = Interval.point(1.0)
    for j in sorted(set(idx)):
        out = out * delta[j] ** idx.count(j)
    return out


def lagrange_remainder(sys: NonlinearSystem, box: IntervalVector, z_star) -> IntervalVector:
    """Enclosure of the third-order Taylor remainder of f over ``box``.

    ``box`` covers z = (x, u); the remainder is
    (1/6) sum_{j,k,l} d^3 f_i(xi) (z - z*)_j (z - z*)_k (z - z*)_l with xi
    anywhere in the box.
    """
    z_star = np.asarray(z_star, dtype=float)
    ivs = [Interval(lo, hi) for lo, hi in zip(box.lo, box.hi)]
    delta = [Interval(lo - c, hi - c) for lo, hi, c in zip(box.lo, box.hi, z_star)]
    lo = np.zeros(sys.n)
    hi = np.zeros(sys.n)
    for i, terms in enumerate(sys.derivatives(3)):
        acc = Interval.point(0.0)
        for idx, e in terms.items():
            acc = acc + (_multiplicity(idx) / 6.0) * interval_eval(e, ivs) * _displacement_product(idx, delta)
        lo[i], hi[i] = acc.lo, acc.hi
    return IntervalVector(lo, hi)


def quadratic_interval(D: np.ndarray, a: IntervalVector, d: IntervalVector) -> IntervalVector:
    """Enclosure of ``(a + d/2)^T D_i d`` for a in ``a`` and d in ``d``."""
    n = D.shape[0]
    lo, hi = np.zeros(n), np.zeros(n)
    A = [Interval(l, h) for l, h in zip(a.lo, a.hi)]
    Dl = [Interval(l, h) for l, h in zip(d.lo, d.hi)]
    for i in range(n):
        acc = Interval.point(0.0)
        for j, k in zip(*np.nonzero(np.triu(D[i]))):
            c = float(D[i, j, k])
            if j == k:
                # (a_j + d_j / 2) d_j, with the square evaluated tightly
                term = c * (A[j] * Dl[j] + 0.5 * Dl[j] ** 2)
            else:
                term = c * (A[j] * Dl[k] + A[k] * Dl[j] + Dl[j] * Dl[k])
            acc = acc + term
        lo[i], hi[i] = acc.lo, acc.hi
    return IntervalVector(lo, hi)
