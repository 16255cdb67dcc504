"""Differential reduction for the Lauricella function F_D of r variables."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import DegenerateInput, ExceptionalStep
from .symcore import Context, ParamExpr, RatFun, collect_atoms, parse_param
from .thetaexpr import RewriteSystem, ThetaExpr


def _pe(x):
    return x if isinstance(x, ParamExpr) else parse_param(x)


@dataclass(frozen=True)
class FdParams:
    a: ParamExpr
    b: tuple
    c: ParamExpr

    def __post_init__(self):
        object.__setattr__(self, "a", _pe(self.a))
        object.__setattr__(self, "b", tuple(_pe(x) for x in self.b))
        object.__setattr__(self, "c", _pe(self.c))

    @property
    def r(self):
        return len(self.b)

    def shifted(self, shift):
        if len(shift.m_b) != self.r:
            raise ValueError("shift and parameters have different r")
        return FdParams(self.a + shift.m_a,
                        tuple(x + m for x, m in zip(self.b, shift.m_b)),
                        self.c + shift.m_c)

    def atoms(self):
        return collect_atoms([self.a, *self.b, self.c])

    def __str__(self):
        return f"[{self.a}, [{', '.join(map(str, self.b))}], {self.c}]"


@dataclass(frozen=True)
class FdShift:
    m_a: int
    m_b: tuple
    m_c: int

    def __post_init__(self):
        object.__setattr__(self, "m_b", tuple(int(x) for x in self.m_b))
        object.__setattr__(self, "m_a", int(self.m_a))
        object.__setattr__(self, "m_c", int(self.m_c))

    def __neg__(self):
        return FdShift(-self.m_a, tuple(-x for x in self.m_b), -self.m_c)


@dataclass
class FdReduction:
    """F(source) = sum_k coeffs[k] theta^(k) F(target); basis 1, t1..tr."""

    coeffs: tuple
    target: FdParams
    source: FdParams
    ctx: Context
    steps: int = 0

    @property
    def basis(self):
        return fd_basis(self.source.r)

    def as_theta(self):
        return ThetaExpr(self.ctx, self.source.r, dict(zip(self.basis, self.coeffs)))


def fd_basis(r):
    out = [(0,) * r]
    for i in range(r):
        out.append(tuple(1 if j == i else 0 for j in range(r)))
    return out


def fd_context(params, extra_atoms=()):
    atoms = list(params.atoms())
    for a in extra_atoms:
        if a not in atoms:
            atoms.append(a)
    return Context(tuple(atoms), tuple(f"z{i + 1}" for i in range(params.r)))


class _Sym:
    """RatFun views of the parameters and variables."""

    def __init__(self, params, ctx):
        self.ctx = ctx
        self.a = params.a.to_ratfun(ctx)
        self.b = [x.to_ratfun(ctx) for x in params.b]
        self.c = params.c.to_ratfun(ctx)
        self.z = [RatFun.symbol(ctx, v) for v in ctx.variables]
        self.one = RatFun.const(ctx, 1)
        self.sb = sum(self.b[1:], self.b[0])


def _theta(i, r):
    return tuple(1 if j == i else 0 for j in range(r))


def _mixed(i, j, r):
    m = [0] * r
    m[i] += 1
    m[j] += 1
    return tuple(m)


def fd_generators(params, ctx):
    """Annihilating operators: mixed relations then the square equations."""
    r = params.r
    s = _Sym(params, ctx)
    gens = []
    for i in range(r):
        for j in range(i + 1, r):
            d = s.z[i] - s.z[j]
            gens.append(ThetaExpr.from_items(ctx, r, [
                (_mixed(i, j, r), s.one),
                (_theta(i, r), -(s.b[j] * s.z[j]) / d),
                (_theta(j, r), (s.b[i] * s.z[i]) / d),
            ]))
    for i in range(r):
        P = s.b[i] * s.z[i] / (s.one - s.z[i])
        R = ((s.a + s.b[i]) * s.z[i] - (s.c - 1)) / (s.one - s.z[i])
        items = [(_mixed(i, i, r), s.one), (_theta(i, r), -R), ((0,) * r, -(s.a * P))]
        for j in range(r):
            if j != i:
                items.append((_mixed(i, j, r), s.one))
                items.append((_theta(j, r), -P))
        gens.append(ThetaExpr.from_items(ctx, r, items))
    return gens


_RULES_CACHE: dict = {}


def fd_rules(params, ctx=None):
    """Rewrite system with basis 1, t1..tr."""
    ctx = ctx or fd_context(params)
    key = (params, ctx)
    hit = _RULES_CACHE.get(key)
    if hit is None:
        hit = RewriteSystem(ctx, params.r, fd_basis(params.r), fd_generators(params, ctx),
                            closure=2, name="F_D")
        if len(_RULES_CACHE) > 64:
            _RULES_CACHE.clear()
        _RULES_CACHE[key] = hit
    return hit


def fd_exceptional(params):
    """Table-1 combinations that are integer valued."""
    out = []
    checks = [("a", params.a)]
    for i, b in enumerate(params.b):
        checks.append((f"b{i + 1}", b))
    checks.append(("c-a", params.c - params.a))
    checks.append(("c-sum(b)", params.c - sum(params.b, ParamExpr())))
    for name, e in checks:
        if e.is_integer():
            out.append(f"{name} in Z")
    return out


def _require(expr, why):
    if expr.is_zero():
        raise ExceptionalStep(f"{why} vanishes")


def _parse_step(which):
    """'a_up', 'b_down(2)', ('b_up', 1) -> (slot, index, direction)."""
    if isinstance(which, tuple):
        name, idx = which
    else:
        name, idx = which, None
        if "(" in which:
            name, rest = which.split("(", 1)
            idx = int(rest.rstrip(")"))
    slot, direction = name.rsplit("_", 1)
    if direction not in ("up", "down"):
        raise ValueError(f"bad step {which!r}")
    return slot, idx, direction


def fd_unit_step(params, which, ctx=None):
    """(E, target) with F(target) = E F(params); E uses params' values.

    Steps: a_up, a_down, b_up(i), b_down(i), c_up, c_down with 1-based i.
    """
    r = params.r
    if r < 1:
        raise DegenerateInput("r must be at least 1")
    ctx = ctx or fd_context(params)
    slot, idx, direction = _parse_step(which)
    s = _Sym(params, ctx)
    a, c = params.a, params.c
    sumb = sum(params.b, ParamExpr())
    items = []
    one = s.one
    if slot == "a" and direction == "up":
        _require(a, "a")
        inv = one / s.a
        items = [((0,) * r, one)] + [(_theta(j, r), inv) for j in range(r)]
        target = FdParams(a + 1, params.b, c)
    elif slot == "b" and direction == "up":
        i = idx - 1
        _require(params.b[i], f"b{idx}")
        items = [((0,) * r, one), (_theta(i, r), one / s.b[i])]
        target = FdParams(a, _bump(params.b, i, 1), c)
    elif slot == "c" and direction == "down":
        _require(c - 1, "c-1")
        inv = one / (s.c - 1)
        items = [((0,) * r, one)] + [(_theta(j, r), inv) for j in range(r)]
        target = FdParams(a, params.b, c - 1)
    elif slot == "a" and direction == "down":
        _require(c - a, "c-a")
        inv = one / (s.c - s.a)
        const = s.c - s.a
        for j in range(r):
            const = const - s.b[j] * s.z[j]
        items = [((0,) * r, const * inv)]
        items += [(_theta(j, r), (one - s.z[j]) * inv) for j in range(r)]
        target = FdParams(a - 1, params.b, c)
    elif slot == "b" and direction == "down":
        i = idx - 1
        _require(c - sumb, "c-sum(b)")
        inv = one / (s.c - s.sb)
        zi = s.z[i]
        items = [((0,) * r, (s.c - s.sb - s.a * zi) * inv)]
        items += [(_theta(j, r), zi * (one - s.z[j]) / s.z[j] * inv) for j in range(r)]
        target = FdParams(a, _bump(params.b, i, -1), c)
    elif slot == "c" and direction == "up":
        _require(c, "c")
        _require(c - a, "c-a")
        _require(c - sumb, "c-sum(b)")
        pre = s.c / ((s.c - s.a) * (s.c - s.sb))
        items = [((0,) * r, (s.c - s.a - s.sb) * pre)]
        items += [(_theta(j, r), (one - s.z[j]) / s.z[j] * pre) for j in range(r)]
        target = FdParams(a, params.b, c + 1)
    else:
        raise ValueError(f"unknown step {which!r}")
    return ThetaExpr.from_items(ctx, r, items), target


def _bump(b, i, k):
    return tuple(x + k if j == i else x for j, x in enumerate(b))


def fd_path(shift, r, order=None):
    """Unit steps leading from params+shift back to params.

    Default slot order: a, b1..br, c.
    """
    moves = {"a": shift.m_a, "c": shift.m_c}
    for i in range(r):
        moves[f"b{i + 1}"] = shift.m_b[i]
    order = order or (["a"] + [f"b{i + 1}" for i in range(r)] + ["c"])
    steps = []
    for slot in order:
        m = moves[slot]
        direction = "down" if m > 0 else "up"
        if slot.startswith("b"):
            step = f"b_{direction}({slot[1:]})"
        else:
            step = f"{slot}_{direction}"
        steps.extend([step] * abs(m))
    return steps


def fd_index_change(shift, params, order=None, ctx=None):
    """Coefficients A_k with F(params) = sum A_k theta^(k) F(params + shift)."""
    if not isinstance(shift, FdShift):
        shift = FdShift(*shift)
    r = params.r
    if r < 1:
        raise DegenerateInput("r must be at least 1")
    if len(shift.m_b) != r:
        raise ValueError("shift and parameters have different r")
    bad = fd_exceptional(params)
    if bad:
        raise ExceptionalStep("exceptional parameters: " + ", ".join(bad))
    ctx = ctx or fd_context(params)
    target = params.shifted(shift)
    rules = fd_rules(target, ctx)
    vec = rules.vector({(0,) * r: RatFun.const(ctx, 1)})
    cur = target
    steps = fd_path(shift, r, order)
    for step in steps:
        E, cur = fd_unit_step(cur, step, ctx)
        vec = rules.apply_operator(E, vec)
    assert cur == params, (cur, params)
    return FdReduction(tuple(vec), target, params, ctx, len(steps))
