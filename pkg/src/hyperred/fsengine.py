"""Differential reduction for the Lauricella-Saran function F_S of three variables.

Basis: 1, t1, t2, t3, t1*t2, t1*t3.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExceptionalStep
from .fdengine import _parse_step, _pe
from .symcore import Context, ParamExpr, RatFun, collect_atoms
from .thetaexpr import RewriteSystem, ThetaExpr

R = 3
ONE, T1, T2, T3 = (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)
T12, T13, T23 = (1, 1, 0), (1, 0, 1), (0, 1, 1)
T11, T22, T33 = (2, 0, 0), (0, 2, 0), (0, 0, 2)
FS_BASIS = [ONE, T1, T2, T3, T12, T13]
SLOTS = ("a1", "a2", "b1", "b2", "b3", "c")


@dataclass(frozen=True)
class FsParams:
    a1: ParamExpr
    a2: ParamExpr
    b: tuple
    c: ParamExpr

    def __post_init__(self):
        object.__setattr__(self, "a1", _pe(self.a1))
        object.__setattr__(self, "a2", _pe(self.a2))
        object.__setattr__(self, "b", tuple(_pe(x) for x in self.b))
        object.__setattr__(self, "c", _pe(self.c))
        if len(self.b) != 3:
            raise ValueError("F_S takes exactly three b parameters")

    @property
    def r(self):
        return 3

    def slots(self):
        return (self.a1, self.a2, *self.b, self.c)

    @classmethod
    def from_slots(cls, vals):
        a1, a2, b1, b2, b3, c = vals
        return cls(a1, a2, (b1, b2, b3), c)

    def bump(self, slot, k):
        vals = list(self.slots())
        vals[SLOTS.index(slot)] = vals[SLOTS.index(slot)] + k
        return FsParams.from_slots(vals)

    def shifted(self, shift):
        return FsParams.from_slots([v + m for v, m in zip(self.slots(), shift.as_tuple())])

    def atoms(self):
        return collect_atoms(self.slots())

    def __str__(self):
        return f"[{self.a1}, {self.a2}, [{', '.join(map(str, self.b))}], {self.c}]"


@dataclass(frozen=True)
class FsShift:
    m_a1: int
    m_a2: int
    m_b: tuple
    m_c: int

    def __post_init__(self):
        object.__setattr__(self, "m_b", tuple(int(x) for x in self.m_b))
        if len(self.m_b) != 3:
            raise ValueError("F_S shift needs three b entries")

    def as_tuple(self):
        return (self.m_a1, self.m_a2, *self.m_b, self.m_c)

    @classmethod
    def from_tuple(cls, t):
        return cls(t[0], t[1], tuple(t[2:5]), t[5])

    def __neg__(self):
        return FsShift.from_tuple([-x for x in self.as_tuple()])


@dataclass
class FsReduction:
    """F(source) = [A + B t1 + C t2 + D t3 + E t12 + F t13] F(target)."""

    coeffs: tuple
    target: FsParams
    source: FsParams
    ctx: Context
    steps: int = 0

    @property
    def basis(self):
        return FS_BASIS

    def as_theta(self):
        return ThetaExpr(self.ctx, 3, dict(zip(FS_BASIS, self.coeffs)))


@dataclass(frozen=True)
class DFactors:
    D0: ParamExpr
    D1: ParamExpr
    D2: ParamExpr
    D3: ParamExpr


def d_factors(p):
    b1, b2, b3 = p.b
    cm = p.c - 1
    return DFactors(p.a1 + p.a2 - cm, p.a2 + b1 - cm, p.a1 + b2 + b3 - cm, b1 + b2 + b3 - cm)


def fs_context(params, extra_atoms=()):
    atoms = list(params.atoms())
    for a in extra_atoms:
        if a not in atoms:
            atoms.append(a)
    return Context(tuple(atoms), ("z1", "z2", "z3"))


class _Sym:
    def __init__(self, p, ctx):
        self.ctx = ctx
        self.one = RatFun.const(ctx, 1)
        self.a1 = p.a1.to_ratfun(ctx)
        self.a2 = p.a2.to_ratfun(ctx)
        self.b = [x.to_ratfun(ctx) for x in p.b]
        self.c = p.c.to_ratfun(ctx)
        self.z = [RatFun.symbol(ctx, v) for v in ctx.variables]
        d = d_factors(p)
        self.D = [x.to_ratfun(ctx) for x in (d.D0, d.D1, d.D2, d.D3)]


def _items(ctx, items):
    return ThetaExpr.from_items(ctx, R, items)


def fs_generators(params, ctx):
    """The t2*t3 relation, then the three canonical square equations."""
    s = _Sym(params, ctx)
    z1, z2, z3 = s.z
    b1, b2, b3 = s.b
    one = s.one
    cm = s.c - 1
    d23 = z2 - z3
    gens = [_items(ctx, [(T23, one), (T2, -(b3 * z3) / d23), (T3, (b2 * z2) / d23)])]
    w1 = one / (one - z1)
    gens.append(_items(ctx, [
        (T11, one), (T12, w1), (T13, w1),
        (T1, -((s.a1 + b1) * z1 - cm) * w1), (ONE, -(s.a1 * b1 * z1) * w1)]))
    for i, (ti, tj, tii, bi, bj) in enumerate([(T2, T3, T22, b2, b3), (T3, T2, T33, b3, b2)]):
        zi = s.z[i + 1]
        wi = one / (one - zi)
        gens.append(_items(ctx, [
            (tii, one), (T23, one), (T12 if i == 0 else T13, wi),
            (ti, -((s.a2 + bi) * zi - cm) * wi), (tj, -(bi * zi) * wi),
            (ONE, -(s.a2 * bi * zi) * wi)]))
    return gens


_RULES_CACHE: dict = {}


def fs_rules(params, ctx=None):
    ctx = ctx or fs_context(params)
    key = (params, ctx)
    hit = _RULES_CACHE.get(key)
    if hit is None:
        hit = RewriteSystem(ctx, R, FS_BASIS, fs_generators(params, ctx), closure=3, name="F_S")
        if len(_RULES_CACHE) > 64:
            _RULES_CACHE.clear()
        _RULES_CACHE[key] = hit
    return hit


def fs_exceptional(params):
    b1, b2, b3 = params.b
    checks = [
        ("a1", params.a1), ("a2", params.a2),
        ("b1", b1), ("b2", b2), ("b3", b3),
        ("c-a1-a2", params.c - params.a1 - params.a2),
        ("c-b1-b2-b3", params.c - b1 - b2 - b3),
        ("a1+b2+b3-c", params.a1 + b2 + b3 - params.c),
        ("a2+b1-c", params.a2 + b1 - params.c),
    ]
    return [f"{name} in Z" for name, e in checks if e.is_integer()]


def _require(expr, why):
    if expr.is_zero():
        raise ExceptionalStep(f"{why} vanishes")


def _inverse_coeffs(slot, X, ctx):
    """[A..F] with F(X) = [..] F(X + e_slot), evaluated at X.

    For slot c the relation reads F(X) = [..] F(X - e_c).
    """
    s = _Sym(X, ctx)
    d = d_factors(X)
    D0, D1, D2, D3 = s.D
    a1, a2, c = s.a1, s.a2, s.c
    b1, b2, b3 = s.b
    z1, z2, z3 = s.z
    one = s.one
    e12 = z1 + z2 - z1 * z2
    e13 = z1 + z3 - z1 * z3
    if slot == "a1":
        _require(d.D0, "D0")
        _require(d.D2, "D2")
        iden = one / D0 / D2
        A = (a1 * a1 + a1 * (b1 * z1 + D1 + D3 - 2 * b1) + a2 * (b1 * z1 + D2 - a1)
             + (b1 * z1 - c + 1) * (D2 - a1)) * iden
        B = (z1 - 1) * (a2 + D2) * iden
        C = b1 * z1 * (z2 - 1) * iden / z2
        D = b1 * z1 * (z3 - 1) * iden / z3
        E = -e12 * iden / z2
        F = -e13 * iden / z3
    elif slot == "a2":
        _require(d.D0, "D0")
        _require(d.D1, "D1")
        iden = one / D0 / D1
        A = ((b2 * z2 + b3 * z3 + D1) * (a1 + D1) - b1 * D1) * iden
        B = (z1 - 1) * (b2 * z2 + b3 * z3) * iden / z1
        C = (z2 - 1) * (b1 + D0) * iden
        D = (z3 - 1) * (b1 + D0) * iden
        # printed numerator z1 + z2 - z1*z3 fails the round trip; z1*z2 is forced
        E = -e12 * iden / z1
        F = -e13 * iden / z1
    elif slot == "c":
        for nm in ("D0", "D1", "D2", "D3"):
            _require(getattr(d, nm), nm)
        iden = one / D0 / D1 / D2 / D3
        cm = c - 1
        # printed table has (D1 + D3) in the first product; the inverse of
        # c_down and the series both require (D1 + D2)
        A = -cm * (a1 * (a2 + D3) * (D1 + D2) + D1 * (D2 + a2 - a1) * D3) * iden
        B = -cm * (z1 - 1) * (a2 * (D1 + D2) + D2 * D3) * iden / z1
        C = cm * (one - z2) * (a1 * (D1 + D2) + D1 * D3) * iden / z2
        D = cm * (one - z3) * (a1 * (D1 + D2) + D1 * D3) * iden / z3
        E = cm * e12 * (D1 + D2) * iden / z1 / z2
        F = cm * e13 * (D1 + D2) * iden / z1 / z3
    elif slot == "b1":
        _require(d.D1, "D1")
        _require(d.D3, "D3")
        iden = one / D1 / D3
        A = (a2 * (a1 * z1 + D3) + (a1 * z1 + D1 - a2) * D3) * iden
        B = (z1 - 1) * (a2 + D3) * iden
        C = a1 * z1 * (z2 - 1) * iden / z2
        D = a1 * z1 * (z3 - 1) * iden / z3
        E = -e12 * iden / z2
        F = -e13 * iden / z3
    elif slot == "b2":
        _require(d.D2, "D2")
        _require(d.D3, "D3")
        iden = one / D2 / D3
        A = (a1 * (a2 * z2 + D3) + D3 * (a2 * z2 + D3 - b1)) * iden
        B = a2 * (z1 - 1) * z2 * iden / z1
        C = (z2 - 1) * (a1 + D3) * iden
        D = z2 * (z3 - 1) * (a1 + D3) * iden / z3
        E = -e12 * iden / z1
        F = -z2 * e13 * iden / z1 / z3
    elif slot == "b3":
        _require(d.D2, "D2")
        _require(d.D3, "D3")
        iden = one / D2 / D3
        A = (a1 * (a2 * z3 + D3) + D3 * (a2 * z3 + D3 - b1)) * iden
        B = a2 * (z1 - 1) * z3 * iden / z1
        C = (z2 - 1) * z3 * (a1 + D3) * iden / z2
        D = (z3 - 1) * (a1 + D3) * iden
        E = -z3 * e12 * iden / z1 / z2
        F = -e13 * iden / z1
    else:
        raise ValueError(f"unknown slot {slot!r}")
    return [A, B, C, D, E, F]


def fs_unit_step(params, which, ctx=None):
    """(E, target) with F(target) = E F(params).

    Up steps of a1, a2, b_i and the c down step are the first-order direct
    operators at the source parameters; the remaining steps use the inverse
    coefficient tables evaluated at the target parameters.
    """
    ctx = ctx or fs_context(params)
    slot, idx, direction = _parse_step(which)
    if slot == "b":
        slot = f"b{idx}"
    if slot not in SLOTS:
        raise ValueError(f"unknown step {which!r}")
    s = _Sym(params, ctx)
    one = s.one
    if direction == "up" and slot != "c":
        if slot == "a1":
            _require(params.a1, "a1")
            items = [(ONE, one), (T1, one / s.a1)]
        elif slot == "a2":
            _require(params.a2, "a2")
            inv = one / s.a2
            items = [(ONE, one), (T2, inv), (T3, inv)]
        else:
            i = int(slot[1]) - 1
            _require(params.b[i], slot)
            items = [(ONE, one), ((T1, T2, T3)[i], one / s.b[i])]
        return _items(ctx, items), params.bump(slot, 1)
    if slot == "c" and direction == "down":
        _require(params.c - 1, "c-1")
        inv = one / (s.c - 1)
        return _items(ctx, [(ONE, one), (T1, inv), (T2, inv), (T3, inv)]), params.bump("c", -1)
    target = params.bump(slot, 1 if slot == "c" else -1)
    coeffs = _inverse_coeffs(slot, target, ctx)
    return _items(ctx, list(zip(FS_BASIS, coeffs))), target


def fs_path(shift, order=None):
    order = order or SLOTS
    moves = dict(zip(SLOTS, shift.as_tuple()))
    steps = []
    for slot in order:
        m = moves[slot]
        direction = "down" if m > 0 else "up"
        name = f"b_{direction}({slot[1]})" if slot.startswith("b") else f"{slot}_{direction}"
        steps.extend([name] * abs(m))
    return steps


def fs_index_change(shift, params, order=None, ctx=None):
    """Coefficients with F(params) = [A + B t1 + ... + F t13] F(params + shift)."""
    if not isinstance(shift, FsShift):
        shift = FsShift.from_tuple(tuple(shift))
    bad = fs_exceptional(params)
    if bad:
        raise ExceptionalStep("exceptional parameters: " + ", ".join(bad))
    ctx = ctx or fs_context(params)
    target = params.shifted(shift)
    rules = fs_rules(target, ctx)
    vec = rules.vector({ONE: RatFun.const(ctx, 1)})
    cur = target
    steps = fs_path(shift, order)
    for step in steps:
        E, cur = fs_unit_step(cur, step, ctx)
        vec = rules.apply_operator(E, vec)
    assert cur == params, (cur, params)
    return FsReduction(tuple(vec), target, params, ctx, len(steps))
