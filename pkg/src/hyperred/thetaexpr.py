"""Differential operators as sums of commuting theta-monomials with rational coefficients.

A ThetaExpr maps exponent tuples (one entry per variable z_1..z_r) to RatFun
coefficients.  The RewriteSystem turns any expression into a combination of a
fixed finite basis of monomials, using the generator relations of a holonomic
system.
"""

from __future__ import annotations

from itertools import product

from .errors import ContextMismatch, InconsistentRules, NonTermination
from .symcore import RatFun, format_ratfun


def _add_mono(m, i, k=1):
    return m[:i] + (m[i] + k,) + m[i + 1:]


def mono_degree(m):
    return sum(m)


def format_mono(m):
    """theta monomial as e.g. t1*t2^2; empty string for the identity."""
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(f"t{i + 1}")
        elif e:
            parts.append(f"t{i + 1}^{e}")
    return "*".join(parts)


class ThetaExpr:
    """Immutable map monomial -> RatFun, zero coefficients dropped."""

    __slots__ = ("ctx", "r", "terms")

    def __init__(self, ctx, r, terms=None):
        self.ctx = ctx
        self.r = r
        self.terms = {m: c for m, c in (terms or {}).items() if not c.is_zero()}
        for m, c in self.terms.items():
            if len(m) != r:
                raise ValueError(f"monomial {m} has wrong arity for r={r}")
            if c.ctx is not ctx:
                raise ContextMismatch("coefficient context differs")

    @classmethod
    def identity(cls, ctx, r):
        return cls(ctx, r, {(0,) * r: RatFun.const(ctx, 1)})

    @classmethod
    def monomial(cls, ctx, r, mono, coeff=None):
        return cls(ctx, r, {tuple(mono): coeff if coeff is not None else RatFun.const(ctx, 1)})

    @classmethod
    def from_items(cls, ctx, r, items):
        """Sum of (mono, coeff) pairs, repeated monomials accumulated."""
        out = {}
        for m, c in items:
            m = tuple(m)
            out[m] = out[m] + c if m in out else c
        return cls(ctx, r, out)

    def coeff(self, mono):
        return self.terms.get(tuple(mono), RatFun.zero(self.ctx))

    def max_degree(self):
        return max((sum(m) for m in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def _check(self, other):
        if other.ctx is not self.ctx or other.r != self.r:
            raise ContextMismatch("ThetaExpr contexts differ")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return ThetaExpr(self.ctx, self.r, out)

    def __neg__(self):
        return ThetaExpr(self.ctx, self.r, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, R):
        """Left multiplication by a coefficient (no derivative acts on R)."""
        return ThetaExpr(self.ctx, self.r, {m: R * c for m, c in self.terms.items()})

    def equals(self, other):
        """Coefficientwise semantic equality."""
        from .symcore import ratfun_equal

        self._check(other)
        for m in set(self.terms) | set(other.terms):
            if not ratfun_equal(self.coeff(m), other.coeff(m)):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, ThetaExpr):
            return NotImplemented
        return self.ctx is other.ctx and self.r == other.r and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda mc: (sum(mc[0]), tuple(-e for e in mc[0])))

    def __str__(self):
        return format_theta(self)

    def __repr__(self):
        return f"ThetaExpr({format_theta(self)!r})"


def format_theta(e, basis=None):
    """One line per term: coefficient, then the theta-monomial."""
    if not e.terms:
        return "0"
    items = e.sorted_items()
    lines = []
    for m, c in items:
        mono = format_mono(m)
        lines.append(f"[{format_ratfun(c)}]" + (f" {mono}" if mono else ""))
    return "\n+ ".join(lines)


def apply_theta(i, e):
    """theta_i acting on the operator e from the left (Leibniz rule); i is 0-based."""
    gi = e.ctx.var_index(i)
    items = []
    for m, c in e.terms.items():
        items.append((m, c.theta(gi)))
        items.append((_add_mono(m, i), c))
    return ThetaExpr.from_items(e.ctx, e.r, items)


def compose(outer, inner):
    """Operator product outer * inner, without normalization."""
    outer._check(inner)
    total = ThetaExpr(outer.ctx, outer.r)
    cache = {(0,) * outer.r: inner}

    def power(m):
        if m in cache:
            return cache[m]
        i = next(k for k, e in enumerate(m) if e)
        res = apply_theta(i, power(_add_mono(m, i, -1)))
        cache[m] = res
        return res

    for m, R in outer.terms.items():
        total = total + power(m).scale(R)
    return total


class RewriteSystem:
    """Normal forms modulo the left ideal of a set of generator relations.

    generators: list of ThetaExpr, each annihilating every solution.
    basis: list of monomials spanning the solution space's derivative module.

    Every monomial of degree up to `closure` is expressed in the basis by
    solving the linear system formed by theta^beta G for all generators G and
    |beta| + deg G <= closure.  Higher monomials are reached recursively by
    letting theta_k act on a lower normal form through the connection
    matrices, so no rewrite can cycle.
    """

    def __init__(self, ctx, r, basis, generators, closure=None, name=""):
        self.ctx = ctx
        self.r = r
        self.name = name
        self.basis = [tuple(b) for b in basis]
        self.basis_index = {b: i for i, b in enumerate(self.basis)}
        self.generators = list(generators)
        self.closure = closure if closure is not None else max(sum(b) for b in self.basis) + 1
        self._nf = {}
        for b in self.basis:
            self._nf[b] = {b: RatFun.const(ctx, 1)}
        self._solve()
        self._pfaff = [
            [self._nf[_add_mono(b, k)] for b in self.basis] for k in range(r)
        ]

    # table construction

    def _solve(self):
        ctx, r, d = self.ctx, self.r, self.closure
        rows = []
        for G in self.generators:
            g = G.max_degree()
            layer = {(0,) * r: G}
            for _ in range(d - g + 1):
                rows.extend(layer.values())
                nxt = {}
                for beta, e in layer.items():
                    for k in range(r):
                        nb = _add_mono(beta, k)
                        if nb not in nxt and nb not in layer:
                            nxt[nb] = apply_theta(k, e)
                layer = nxt
        unknowns = set()
        for row in rows:
            for m in row.terms:
                if m not in self.basis_index:
                    unknowns.add(m)
        needed = {m for m in _monos_upto(r, d) if m not in self.basis_index}
        missing = needed - unknowns
        if missing:
            raise InconsistentRules(f"no relation reaches {sorted(missing)}")
        order = sorted(unknowns, key=lambda m: (sum(m), m))
        rank = {m: i for i, m in enumerate(order)}
        rows = [dict(row.terms) for row in rows]
        rows.sort(key=lambda row: sum(1 for m in row if m in rank))
        pivots = {}
        for row in rows:
            row = self._reduce(row, pivots)
            unk = [m for m in row if m in rank]
            if not unk:
                if row:
                    raise InconsistentRules(
                        f"{self.name}: relation among basis elements does not vanish")
                continue
            p = max(unk, key=lambda m: rank[m])
            inv = row[p].inverse()
            row = {m: c * inv for m, c in row.items()}
            row[p] = RatFun.const(ctx, 1)
            for q, prow in pivots.items():
                if p in prow:
                    pivots[q] = self._eliminate(prow, row, p)
            pivots[p] = row
        for m in needed:
            if m not in pivots:
                raise InconsistentRules(f"{self.name}: {m} not determined by the relations")
        for p, row in pivots.items():
            rest = [m for m in row if m != p and m not in self.basis_index]
            if rest:
                raise InconsistentRules(f"{self.name}: {p} left with non-basis terms {rest}")
            self._nf[p] = {m: -c for m, c in row.items() if m != p}

    def _eliminate(self, row, prow, p):
        c = row[p]
        out = dict(row)
        for m, v in prow.items():
            nv = out[m] - c * v if m in out else -(c * v)
            if nv.is_zero():
                out.pop(m, None)
            else:
                out[m] = nv
        return out

    def _reduce(self, row, pivots):
        row = {m: c for m, c in row.items() if not c.is_zero()}
        for p, prow in pivots.items():
            if p in row:
                row = self._eliminate(row, prow, p)
        return row

    # normal forms

    def nf(self, mono, budget=None):
        """Basis expansion of a single monomial as a dict basis -> RatFun."""
        mono = tuple(mono)
        hit = self._nf.get(mono)
        if hit is not None:
            return hit
        chain = []
        m = mono
        while m not in self._nf:
            i = next(k for k, e in enumerate(m) if e)
            chain.append((m, i))
            m = _add_mono(m, i, -1)
            if budget is not None:
                budget[0] -= 1
                if budget[0] < 0:
                    raise NonTermination(f"step budget exhausted at {mono}")
        vec = self.vector(self._nf[m])
        for m, i in reversed(chain):
            vec = self.act(i, vec)
            self._nf[m] = self.unvector(vec)
        return self._nf[mono]

    def vector(self, d):
        zero = RatFun.zero(self.ctx)
        return [d.get(b, zero) for b in self.basis]

    def unvector(self, vec):
        return {b: c for b, c in zip(self.basis, vec) if not c.is_zero()}

    def act(self, k, vec):
        """theta_k applied to sum_b vec[b] theta^b F, in basis coordinates."""
        gk = self.ctx.var_index(k)
        out = [c.theta(gk) for c in vec]
        for j, c in enumerate(vec):
            if c.is_zero():
                continue
            for b, v in self._pfaff[k][j].items():
                i = self.basis_index[b]
                out[i] = out[i] + c * v
        return out

    def normalize_vector(self, e, budget=None):
        """Basis coordinates of a ThetaExpr."""
        vec = [RatFun.zero(self.ctx) for _ in self.basis]
        for m, c in e.terms.items():
            for b, v in self.nf(m, budget).items():
                i = self.basis_index[b]
                vec[i] = vec[i] + c * v
        return vec

    def to_expr(self, vec):
        return ThetaExpr(self.ctx, self.r, {b: c for b, c in zip(self.basis, vec)})

    def apply_operator(self, E, vec):
        """E applied to the operator with basis coordinates vec, normalized.

        Uses the connection matrices directly instead of expanding the
        product, which is equivalent to compose followed by rewrite.
        """
        cache = {(0,) * self.r: vec}

        def power(m):
            if m in cache:
                return cache[m]
            i = next(k for k, e in enumerate(m) if e)
            res = self.act(i, power(_add_mono(m, i, -1)))
            cache[m] = res
            return res

        out = [RatFun.zero(self.ctx) for _ in self.basis]
        for m, R in E.terms.items():
            pv = power(m)
            for i, c in enumerate(pv):
                if not c.is_zero():
                    out[i] = out[i] + R * c
        return out


def _monos_upto(r, d):
    for m in product(range(d + 1), repeat=r):
        if sum(m) <= d:
            yield m


def rewrite_to_basis(e, rules, budget=None):
    """Normal form of e in the basis of rules.

    The default budget is 10 * (max degree) * (term count) reduction steps.
    """
    if budget is None:
        budget = 10 * max(e.max_degree(), 1) * max(len(e.terms), 1)
    box = [budget]
    return rules.to_expr(rules.normalize_vector(e, box))


def solve_linear(rows, rhs):
    """Solve sum_j rows[i][j] x_j = rhs[i] over rational functions.

    Square, nonsingular systems only; plain Gauss-Jordan elimination.
    """
    n = len(rows)
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((i for i in range(col, n) if not aug[i][col].is_zero()), None)
        if piv is None:
            raise InconsistentRules("singular linear system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [v * inv for v in aug[col]]
        for i in range(n):
            if i != col and not aug[i][col].is_zero():
                f = aug[i][col]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[col])]
    return [row[n] for row in aug]
