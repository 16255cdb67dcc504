import random
from fractions import Fraction
from itertools import product

import mpmath
import pytest

from _golden import FS_EXAMPLES, derived_mismatches, mismatches
from _util import apply_fs, is_identity, rand_rational, round_trip
from hyperred.errors import ExceptionalStep
from hyperred.fsengine import (
    FS_BASIS,
    FsParams,
    FsShift,
    d_factors,
    fs_context,
    fs_exceptional,
    fs_index_change,
    fs_rules,
    fs_unit_step,
)
from hyperred.numerics.series import SeriesConfig, fd_series, fs_series
from hyperred.numerics.verify import fs_reduction_residual
from hyperred.symcore import RatFun, format_ratfun, parse_ratfun, ratfun_equal
from hyperred.thetaexpr import ThetaExpr, solve_linear

SYM = FsParams("a1", "a2", ("b1", "b2", "b3"), "c")


@pytest.fixture(scope="module")
def sym():
    ctx = fs_context(SYM)
    return ctx, fs_rules(SYM, ctx)


@pytest.mark.parametrize("n", sorted(FS_EXAMPLES))
def test_worked_examples(n):
    ex = FS_EXAMPLES[n]
    red = fs_index_change(ex["shift"], ex["params"])
    assert red.target == ex["target"]
    assert mismatches(red, ex["coeffs"]) == []


def test_zero_shift():
    red = fs_index_change((0,) * 6, SYM)
    assert red.target == SYM and is_identity(list(red.coeffs))


def test_d_factor_identity():
    d = d_factors(SYM)
    assert (d.D1 + d.D2 - d.D0 - d.D3).is_zero()


def test_a2_up_operator(sym):
    ctx, _ = sym
    E, target = fs_unit_step(SYM, "a2_up", ctx)
    inv = parse_ratfun("1/a2", ctx)
    want = ThetaExpr(ctx, 3, {(0, 0, 0): RatFun.const(ctx, 1), (0, 1, 0): inv, (0, 0, 1): inv})
    assert E.equals(want)
    assert target == SYM.bump("a2", 1)


def test_a1_down_printed_coefficients(sym):
    ctx, _ = sym
    E, target = fs_unit_step(SYM, "a1_down", ctx)
    d = d_factors(target)
    D0, D2 = (format_ratfun(x.to_ratfun(ctx)) for x in (d.D0, d.D2))
    a2 = format_ratfun(target.a2.to_ratfun(ctx))
    B = parse_ratfun(f"(z1-1)*(({a2})+({D2}))/(({D0})*({D2}))", ctx)
    Ecoef = parse_ratfun(f"-(z1+z2-z1*z2)/(z2*({D0})*({D2}))", ctx)
    assert ratfun_equal(E.coeff((1, 0, 0)), B)
    assert ratfun_equal(E.coeff((1, 1, 0)), Ecoef)


DIRECT = {"a1": "a1_up", "a2": "a2_up", "b1": "b_up(1)", "b2": "b_up(2)", "b3": "b_up(3)",
          "c": "c_down"}
INVERSE = {"a1": "a1_down", "a2": "a2_down", "b1": "b_down(1)", "b2": "b_down(2)",
           "b3": "b_down(3)", "c": "c_up"}


@pytest.mark.parametrize("slot", list(DIRECT))
def test_round_trips(sym, slot):
    ctx, rules = sym
    for first, second in ((DIRECT[slot], INVERSE[slot]), (INVERSE[slot], DIRECT[slot])):
        vec = round_trip(rules, fs_unit_step, SYM, first, second, ctx)
        assert is_identity(vec), (first, second)


@pytest.mark.parametrize("slot", list(DIRECT))
def test_transcribed_inverse_matches_solved(sym, slot):
    """Solve G * U = 1 in the basis and compare with the stored inverse."""
    ctx, rules = sym
    U, mid = fs_unit_step(SYM, DIRECT[slot], ctx)
    G, back = fs_unit_step(mid, INVERSE[slot], ctx)
    assert back == SYM
    uvec = rules.normalize_vector(U)
    cols = [rules.apply_operator(ThetaExpr.monomial(ctx, 3, m), uvec) for m in FS_BASIS]
    rows = [[cols[j][i] for j in range(6)] for i in range(6)]
    rhs = [RatFun.const(ctx, 1)] + [RatFun.zero(ctx)] * 5
    solved = solve_linear(rows, rhs)
    for m, g in zip(FS_BASIS, solved):
        assert ratfun_equal(G.coeff(m), g), (slot, m)


def test_numeric_round_trip_a1():
    vals = {"a1": Fraction(1, 3), "a2": Fraction(1, 5), "b1": Fraction(1, 2),
            "b2": Fraction(1, 4), "b3": Fraction(1, 7), "c": Fraction(11, 3)}
    z = (Fraction(1, 10), Fraction(2, 10), Fraction(3, 10))
    ctx = fs_context(SYM)
    up, mid = fs_unit_step(SYM, "a1_up", ctx)
    down, _ = fs_unit_step(mid, "a1_down", ctx)
    cfg = SeriesConfig(max_order=50)
    # F(p) = down F(p+1) and F(p+1) = up F(p); check each numerically
    lhs = apply_fs(ThetaExpr.identity(ctx, 3), vals, SYM, z, cfg)
    rhs = apply_fs(down, vals, mid, z, cfg)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
    lhs = apply_fs(ThetaExpr.identity(ctx, 3), vals, mid, z, cfg)
    rhs = apply_fs(up, vals, SYM, z, cfg)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_fs23_relation(sym):
    ctx, rules = sym
    got = rules.nf((0, 1, 1))
    assert ratfun_equal(got[(0, 1, 0)], parse_ratfun("b3*z3/(z2-z3)", ctx))
    assert ratfun_equal(got[(0, 0, 1)], parse_ratfun("-b2*z2/(z2-z3)", ctx))


def test_square_rule_l1(sym):
    ctx, rules = sym
    got = rules.nf((2, 0, 0))
    w = "(1-z1)"
    want = {
        (0, 0, 0): f"a1*b1*z1/{w}", (1, 0, 0): f"((a1+b1)*z1-(c-1))/{w}",
        (1, 1, 0): f"-1/{w}", (1, 0, 1): f"-1/{w}",
    }
    assert set(got) == set(want)
    for k, s in want.items():
        assert ratfun_equal(got[k], parse_ratfun(s, ctx))


def test_derived_third_order_relations(sym):
    ctx, rules = sym
    assert derived_mismatches(rules, ctx) == []


def test_closure_up_to_degree_four(sym):
    ctx, rules = sym
    for m in product(range(5), repeat=3):
        if sum(m) <= 4:
            assert set(rules.nf(m)) <= set(FS_BASIS)


def _swap23(R, ctx):
    import re

    names = {"b2": "b3", "b3": "b2", "z2": "z3", "z3": "z2"}
    s = re.sub(r"\b(b2|b3|z2|z3)\b", lambda m: names[m.group(1)], format_ratfun(R))
    return parse_ratfun(s, ctx)


def test_b2_b3_symmetry(sym):
    ctx, _ = sym
    E2, _ = fs_unit_step(SYM, "b_down(2)", ctx)
    E3, _ = fs_unit_step(SYM, "b_down(3)", ctx)
    pairs = [((0, 0, 0), (0, 0, 0)), ((1, 0, 0), (1, 0, 0)), ((0, 1, 0), (0, 0, 1)),
             ((0, 0, 1), (0, 1, 0)), ((1, 1, 0), (1, 0, 1)), ((1, 0, 1), (1, 1, 0))]
    for m2, m3 in pairs:
        assert ratfun_equal(_swap23(E2.coeff(m2), ctx), E3.coeff(m3)), (m2, m3)


def test_appell_embedding():
    a1, a2, b, c = 0.3, 0.45, (0.2, 0.35, 0.15), 1.7
    z = (0.2, 0.15, 0.25)
    cfg = SeriesConfig(max_order=60)
    full = fs_series((a1, a2, list(b), c), z, cfg).value
    total = 0.0
    for m in range(40):
        w = float(mpmath.rf(a1, m) * mpmath.rf(b[0], m) / (mpmath.rf(c, m) * mpmath.factorial(m)))
        total += w * z[0] ** m * fd_series((a2, [b[1], b[2]], c + m), z[1:], cfg).value
    assert abs(full - total) <= 1e-9 * abs(full)


def test_exceptional_sets():
    assert fs_exceptional(SYM) == []
    assert fs_exceptional(FsParams("a1", -2, ("b1", "b2", "b3"), "c")) == ["a2 in Z"]
    hit = fs_exceptional(FsParams("a1", "a2", ("b1", "b2", "b3"), "a1 + a2 + 4"))
    assert hit == ["c-a1-a2 in Z"]
    with pytest.raises(ExceptionalStep):
        fs_index_change((1, 0, 0, 0, 0, 0), FsParams(1, "a2", ("b1", "b2", "b3"), "c"))


def test_shift_tuple_forms():
    s = FsShift.from_tuple((1, 0, -1, 0, 2, 1))
    assert s.as_tuple() == (1, 0, -1, 0, 2, 1)
    assert (-s).as_tuple() == (-1, 0, 1, 0, -2, -1)


def test_random_reductions_numeric():
    rng = random.Random(99)
    done = 0
    while done < 3:
        p = FsParams(rand_rational(rng), rand_rational(rng),
                     tuple(rand_rational(rng) for _ in range(3)), rand_rational(rng))
        if fs_exceptional(p):
            continue
        shift = tuple(rng.randint(-2, 2) for _ in range(6))
        red = fs_index_change(shift, p)
        res = fs_reduction_residual(red, {}, (0.1, 0.2, 0.3))
        assert res.residual <= 1e-8, (p, shift, res)
        done += 1
