import itertools
import random
from fractions import Fraction

import pytest

from _golden import FD_EXAMPLES, mismatches
from _util import apply_fd, is_identity, rand_rational, rand_z, round_trip
from hyperred.errors import DegenerateInput, ExceptionalStep
from hyperred.fdengine import (
    FdParams,
    FdShift,
    fd_context,
    fd_exceptional,
    fd_index_change,
    fd_rules,
    fd_unit_step,
)
from hyperred.numerics.verify import fd_reduction_residual
from hyperred.symcore import parse_param, parse_ratfun, ratfun_equal
from hyperred.thetaexpr import ThetaExpr


@pytest.mark.parametrize("n", sorted(FD_EXAMPLES))
def test_worked_examples(n):
    ex = FD_EXAMPLES[n]
    red = fd_index_change(ex["shift"], ex["params"])
    assert red.target == ex["target"]
    assert mismatches(red, ex["coeffs"]) == []


def test_zero_shift_is_identity():
    p = FdParams("a", ("b1", "b2", "b3"), "c")
    red = fd_index_change((0, (0, 0, 0), 0), p)
    assert red.target == p and red.steps == 0
    assert is_identity(list(red.coeffs))


def test_a_up_operator():
    p = FdParams("a", ("b1", "b2"), "c")
    E, target = fd_unit_step(p, "a_up")
    ctx = E.ctx
    want = ThetaExpr(ctx, 2, {
        (0, 0): parse_ratfun("1", ctx),
        (1, 0): parse_ratfun("1/a", ctx),
        (0, 1): parse_ratfun("1/a", ctx),
    })
    assert E.equals(want)
    assert target == FdParams("a + 1", ("b1", "b2"), "c")


STEPS = ["a_up", "a_down", "c_up", "c_down"]
OPP = {"up": "down", "down": "up"}


def _opposite(step):
    name, _, idx = step.partition("(")
    slot, d = name.rsplit("_", 1)
    return f"{slot}_{OPP[d]}" + (f"({idx}" if idx else "")


@pytest.mark.parametrize("r", [1, 2, 3])
def test_unit_step_round_trips(r):
    p = FdParams("a", tuple(f"b{i + 1}" for i in range(r)), "c")
    ctx = fd_context(p)
    rules = fd_rules(p, ctx)
    steps = STEPS + [f"b_{d}({i + 1})" for i in range(r) for d in ("up", "down")]
    for s in steps:
        vec = round_trip(rules, fd_unit_step, p, s, _opposite(s), ctx)
        assert is_identity(vec), s


def test_a_down_numeric():
    p = FdParams("a", ("b1", "b2"), "c")
    E, target = fd_unit_step(p, "a_down")
    vals = {"a": Fraction(1, 3), "b1": Fraction(1, 2), "b2": Fraction(1, 4), "c": Fraction(7, 3)}
    z = (Fraction(1, 5), Fraction(1, 7))
    lhs = apply_fd(ThetaExpr.identity(E.ctx, 2), vals, target, z)
    rhs = apply_fd(E, vals, p, z)
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_exceptional_detection():
    assert fd_exceptional(FdParams("a", ("b1",), "c")) == []
    assert fd_exceptional(FdParams(3, ("b1",), "c")) == ["a in Z"]
    p = FdParams("s + 1", ("t",), "s + 5/2")
    assert "c-a in Z" not in fd_exceptional(p)
    p = FdParams("s + 1", ("t",), "s + 3")
    assert "c-a in Z" in fd_exceptional(p)
    with pytest.raises(ExceptionalStep):
        fd_index_change((1, (0,), 0), FdParams(2, ("b1",), "c"))


def test_degenerate_r():
    with pytest.raises(DegenerateInput):
        fd_index_change((1, (), 0), FdParams("a", (), "c"))


def test_shift_negation():
    s = FdShift(1, (2, -1), 0)
    assert -s == FdShift(-1, (-2, 1), 0)


def test_index_change_round_trip():
    p = FdParams("a", ("b1", "b2"), "c")
    shift = FdShift(1, (-1, 1), 1)
    fwd = fd_index_change(shift, p)
    ctx = fwd.ctx
    back = fd_index_change(-shift, fwd.target, ctx=ctx)
    assert back.target == p
    # F(p) = A F(p+s) and F(p+s) = B F(p) give F(p) = A B F(p)
    rules = fd_rules(p, ctx)
    vec = rules.apply_operator(fwd.as_theta(), list(back.coeffs))
    assert is_identity(vec)


@pytest.mark.parametrize("shift", [(1, (1, 0), -1), (-2, (0, 1), 1), (1, (-1, 1, 0), 1)])
def test_path_independence(shift):
    r = len(shift[1])
    p = FdParams("a", tuple(f"b{i + 1}" for i in range(r)), "c")
    slots = ["a"] + [f"b{i + 1}" for i in range(r)] + ["c"]
    base = fd_index_change(shift, p)
    for order in itertools.islice(itertools.permutations(slots), 1, None, 5):
        other = fd_index_change(shift, p, order=list(order), ctx=base.ctx)
        for x, y in zip(base.coeffs, other.coeffs):
            assert ratfun_equal(x, y), order


def test_symmetry_under_relabeling():
    p = FdParams("a", ("b1", "b2"), "c")
    red = fd_index_change((0, (1, 0), 0), p)
    swapped = fd_index_change((0, (0, 1), 0), p, ctx=red.ctx)
    ctx = red.ctx
    names = {"b1": "b2", "b2": "b1", "z1": "z2", "z2": "z1"}

    def relabel(R):
        from hyperred.symcore import format_ratfun
        import re

        s = re.sub(r"\b(b1|b2|z1|z2)\b", lambda m: names[m.group(1)], format_ratfun(R))
        return parse_ratfun(s, ctx)

    assert ratfun_equal(relabel(red.coeffs[0]), swapped.coeffs[0])
    assert ratfun_equal(relabel(red.coeffs[1]), swapped.coeffs[2])
    assert ratfun_equal(relabel(red.coeffs[2]), swapped.coeffs[1])


def test_random_reductions_numeric():
    rng = random.Random(2024)
    for r in (2, 3, 4):
        done = 0
        while done < 3:
            p = FdParams(rand_rational(rng), tuple(rand_rational(rng) for _ in range(r)),
                         rand_rational(rng))
            if fd_exceptional(p):
                continue
            shift = (rng.randint(-3, 3), tuple(rng.randint(-3, 3) for _ in range(r)),
                     rng.randint(-3, 3))
            red = fd_index_change(shift, p)
            res = fd_reduction_residual(red, {}, rand_z(rng, r))
            assert res.residual <= 1e-8, (p, shift, res)
            done += 1


def test_symbolic_reduction_numeric():
    rng = random.Random(17)
    p = FdParams("a", ("b1", "b2"), "c")
    red = fd_index_change((1, (-1, 2), -1), p)
    vals = {n: rand_rational(rng) for n in ("a", "b1", "b2", "c")}
    res = fd_reduction_residual(red, vals, rand_z(rng, 2))
    assert res.residual <= 1e-8


def test_param_expr_shift_bookkeeping():
    p = FdParams("a", ("b1",), "c")
    assert p.shifted(FdShift(-1, (2,), 0)).a == parse_param("a - 1")
