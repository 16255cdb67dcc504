from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperred.errors import ContextMismatch, DenominatorVanishes, ParseError
from hyperred.symcore import (
    Context,
    ParamExpr,
    RatFun,
    SparsePoly,
    eval_ratfun,
    format_poly,
    format_ratfun,
    parse_param,
    parse_poly,
    parse_ratfun,
    poly_arith,
    ratfun_equal,
    theta_deriv,
)

X = Context((), ("x",))
XY = Context(("a", "b"), ("x", "y"))


def test_difference_of_squares():
    p = parse_poly("x + 1", X)
    q = parse_poly("x - 1", X)
    assert poly_arith(p, q, "mul") == parse_poly("x^2 - 1", X)


def test_add_zero_is_identity():
    p = parse_poly("3*x^2 - x/2", X)
    assert poly_arith(p, SparsePoly(X), "add") == p
    assert poly_arith(p, p, "sub").is_zero()


def test_expansion_term_count_matches_brute_force():
    ctx = Context(("a", "c", "b2"), ("z1", "z2"))
    p = parse_poly("(a - c)*z1 + b2*z2", ctx)
    q = parse_poly("1 - z2", ctx)
    prod = poly_arith(p, q, "mul")
    # distribute by hand: each monomial of p times each monomial of q
    brute = {}
    for kp, cp in p.terms.items():
        for kq, cq in q.terms.items():
            ep = ctx.unpack(kp)
            eq = ctx.unpack(kq)
            e = tuple(x + y for x, y in zip(ep, eq))
            brute[e] = brute.get(e, 0) + cp * cq
    brute = {e: c for e, c in brute.items() if c}
    assert len(prod.terms) == len(brute) == 6
    assert {ctx.unpack(k): c for k, c in prod.terms.items()} == brute


def test_context_mismatch():
    with pytest.raises(ContextMismatch):
        poly_arith(parse_poly("x", X), parse_poly("x", XY), "add")


def test_ratfun_equal_common_factor():
    assert ratfun_equal(parse_ratfun("(x-1)/(x^2-1)", X), parse_ratfun("1/(x+1)", X))
    assert not ratfun_equal(parse_ratfun("1/(1-x)", X), parse_ratfun("1/(1+x)", X))


def test_ratfun_normalization_invariants():
    r = parse_ratfun("(4*x + 2)/(-6*x^2 - 6)", X)
    den = r.den
    # content cancelled and positive leading denominator coefficient
    assert den.leading()[1] > 0
    assert r == parse_ratfun("(-2*x - 1)/(3*x^2 + 3)", X)


def test_monomial_factors_cancel():
    r = parse_ratfun("(x^2*y + x*y^2)/(x*y)", XY)
    assert r.factors == {} and r.dconst == 1
    assert r.num == parse_poly("x + y", XY)


def test_theta_basic():
    assert theta_deriv(parse_ratfun("x", X), 0) == parse_ratfun("x", X)
    got = theta_deriv(parse_ratfun("1/(1-x)", X), 0)
    assert ratfun_equal(got, parse_ratfun("x/(1-x)^2", X))


def test_theta_finite_difference():
    ctx = Context(("b2",), ("z1", "z2"))
    R = parse_ratfun("b2*z2/(1-z2)", ctx)
    got = theta_deriv(R, 1)
    b2, z2, h = 0.7, 0.3, 1e-6

    def f(t):
        return b2 * t / (1 - t)

    fd = z2 * (f(z2 + h) - f(z2 - h)) / (2 * h)
    val = eval_ratfun(got, {"b2": b2, "z1": 0.1, "z2": z2})
    assert abs(val - fd) < 1e-9


def test_eval_exact_and_float():
    R = parse_ratfun("(a + x)/(b - y)", XY)
    vals = {"a": Fraction(1, 2), "b": Fraction(3), "x": Fraction(1, 3), "y": Fraction(1)}
    assert eval_ratfun(R, vals) == Fraction(5, 12)
    fv = eval_ratfun(R, {"a": 0.5, "b": 3.0, "x": 1 / 3, "y": 1.0})
    assert isinstance(fv, float) and abs(fv - 5 / 12) < 1e-15


def test_eval_vanishing_denominator():
    R = parse_ratfun("1/(x - y)", XY)
    with pytest.raises(DenominatorVanishes):
        eval_ratfun(R, {"a": 0, "b": 0, "x": Fraction(1, 3), "y": Fraction(1, 3)})


def test_print_parse_round_trip():
    for s in ["(a*x - b*y^2 + 3/7)/((x - 1)*(y + a)^2)", "-a*x*y + x/5", "0", "7/3"]:
        r = parse_ratfun(s, XY)
        again = parse_ratfun(format_ratfun(r), XY)
        assert again == r
    p = parse_poly("a^2*x - 2*b*y + 1/3", XY)
    assert parse_poly(format_poly(p), XY) == p


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_ratfun("x +* 1", X)
    # unknown symbols are a context error, not a syntax error
    with pytest.raises(ContextMismatch):
        parse_ratfun("q + 1", X)


def test_param_expr():
    p = parse_param("a - 1")
    q = parse_param("c + 2")
    assert (p + 1) == ParamExpr.atom("a")
    assert parse_param("3/2").is_numeric()
    assert (q - q).is_zero()
    assert (parse_param("c") - parse_param("a") + 4 - parse_param("c - a")).is_integer()
    assert not parse_param("a").is_integer()
    assert str(parse_param("a - 1")) == "a - 1"
    assert parse_param("a/2 + 1").evaluate({"a": Fraction(1, 3)}) == Fraction(7, 6)
    assert parse_param("0.25").offset == Fraction(1, 4)


# property checks

coeffs = st.integers(-5, 5)
exps = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
polys = st.dictionaries(exps, coeffs, max_size=5).map(
    lambda d: SparsePoly.from_exponents(XY, {e: c for e, c in d.items() if c}))


@settings(max_examples=60, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(p, q, r):
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + q == q + p


def _nonzero(p):
    return p if not p.is_zero() else SparsePoly.const(XY, 1)


@settings(max_examples=40, deadline=None)
@given(polys, polys, polys, polys)
def test_ratfun_equal_equivalence(n1, d1, n2, d2):
    d1, d2 = _nonzero(d1), _nonzero(d2)
    u = RatFun.from_polys(n1, d1)
    v = RatFun.from_polys(n1 * d2, d1 * d2)
    w = RatFun.from_polys(n1 * d2 * d2, d1 * d2 * d2)
    assert ratfun_equal(u, u)
    assert ratfun_equal(u, v) and ratfun_equal(v, u)
    assert ratfun_equal(v, w) and ratfun_equal(u, w)
    other = RatFun.from_polys(n2, d2)
    assert ratfun_equal(u, other) == ratfun_equal(other, u)


@settings(max_examples=40, deadline=None)
@given(polys, polys, polys, polys)
def test_theta_leibniz(n1, d1, n2, d2):
    R = RatFun.from_polys(n1, _nonzero(d1))
    S = RatFun.from_polys(n2, _nonzero(d2))
    for i in (0, 1):
        lhs = theta_deriv(R * S, i)
        rhs = theta_deriv(R, i) * S + R * theta_deriv(S, i)
        assert ratfun_equal(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(polys, polys, st.integers(1, 10 ** 6))
def test_eval_commutes_with_arith(p, q, seed):
    import random

    rng = random.Random(seed)
    pt = {n: rng.uniform(-1.5, 1.5) for n in XY.names}
    vals = [pt[n] for n in XY.names]
    fp, fq = p.evaluate(vals), q.evaluate(vals)
    for op, f in (("add", fp + fq), ("sub", fp - fq), ("mul", fp * fq)):
        got = poly_arith(p, q, op).evaluate(vals)
        assert abs(got - f) <= 1e-12 * max(1.0, abs(f), abs(fp) * abs(fq))
