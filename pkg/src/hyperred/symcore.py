"""Exact coefficient arithmetic.

Polynomials are sparse dicts from packed exponent keys to integers or
Fractions.  A key stores the total degree in its top field followed by one
16-bit field per symbol, parameters first and variables last, so that

* multiplying monomials is adding keys, and
* comparing keys as integers is the graded-lexicographic order.

Every field reserves its top bit as a guard, which makes monomial
divisibility a single subtraction and mask test.

Rational functions keep their denominator factored: an integer constant
times powers of primitive polynomials.  Sums are formed over the lcm of the
factor maps and quotients are cancelled by trial division against the known
factors, which keeps the expression swell of long operator chains in check
without a general multivariate gcd.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from math import gcd

from . import kernels
from .errors import ContextMismatch, DenominatorVanishes, ParseError

BITS = 16
MASK = (1 << BITS) - 1
GUARD = 1 << (BITS - 1)
PRIME = (1 << 61) - 1

PARAMETER = "parameter"
VARIABLE = "variable"


def _lcm(x, y):
    return x // gcd(x, y) * y


class Symbol:
    __slots__ = ("name", "kind")

    def __init__(self, name, kind):
        self.name = name
        self.kind = kind

    def __repr__(self):
        return f"Symbol({self.name!r}, {self.kind!r})"


class Context:
    """Ordered symbol table.  Equal tables are the same object."""

    _cache: dict = {}

    def __new__(cls, params=(), variables=()):
        key = (tuple(params), tuple(variables))
        ctx = cls._cache.get(key)
        if ctx is not None:
            return ctx
        names = key[0] + key[1]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in {names}")
        for nm in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", nm):
                raise ValueError(f"bad symbol name {nm!r}")
        ctx = super().__new__(cls)
        ctx.params = key[0]
        ctx.variables = key[1]
        ctx.names = names
        ctx.n = len(names)
        ctx.nparams = len(key[0])
        ctx.symbols = tuple(Symbol(nm, PARAMETER) for nm in key[0]) + tuple(
            Symbol(nm, VARIABLE) for nm in key[1])
        ctx._index = {nm: i for i, nm in enumerate(names)}
        ctx.shifts = tuple(BITS * (ctx.n - 1 - i) for i in range(ctx.n))
        ctx.deg_shift = BITS * ctx.n
        ctx.guard = sum(GUARD << (BITS * j) for j in range(ctx.n + 1))
        ctx.unit_keys = tuple((1 << ctx.deg_shift) | (1 << s) for s in ctx.shifts)
        ctx.registry = []
        ctx._registry_set = set()
        cls._cache[key] = ctx
        return ctx

    def __repr__(self):
        return f"Context(params={self.params}, variables={self.variables})"

    def __reduce__(self):
        return (Context, (self.params, self.variables))

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise ContextMismatch(f"symbol {name!r} not in {self!r}") from None

    def var_index(self, j):
        """Global symbol index of the j-th variable (0-based)."""
        return self.nparams + j

    def pack(self, exps):
        key = sum(exps) << self.deg_shift
        for e, s in zip(exps, self.shifts):
            key |= e << s
        return key

    def unpack(self, key):
        return tuple((key >> s) & MASK for s in self.shifts)

    def exponent(self, key, i):
        return (key >> self.shifts[i]) & MASK

    def divides(self, kf, kp):
        """True when monomial kf divides monomial kp."""
        g = self.guard
        return ((kp | g) - kf) & g == g

    def register_factor(self, f):
        if f not in self._registry_set:
            self._registry_set.add(f)
            self.registry.append(f)


def _check_ctx(p, q):
    if p.ctx is not q.ctx:
        raise ContextMismatch(f"{p.ctx!r} vs {q.ctx!r}")


def _coerce_coeff(c):
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    raise TypeError(f"exact coefficient expected, got {type(c).__name__}")


class SparsePoly:
    """Immutable sparse polynomial over Q in a fixed symbol context."""

    __slots__ = ("ctx", "terms", "_hash", "_mask", "_pows")

    def __init__(self, ctx, terms=None):
        self.ctx = ctx
        self.terms = {} if terms is None else terms
        self._hash = None
        self._mask = None
        self._pows = None

    # constructors

    @classmethod
    def from_dict(cls, ctx, terms):
        return cls(ctx, {k: _coerce_coeff(v) for k, v in terms.items() if v})

    @classmethod
    def from_exponents(cls, ctx, mapping):
        out = {}
        for exps, c in mapping.items():
            if c:
                k = ctx.pack(exps)
                out[k] = out.get(k, 0) + c
        return cls.from_dict(ctx, out)

    @classmethod
    def const(cls, ctx, c):
        c = _coerce_coeff(c)
        return cls(ctx, {0: c} if c else {})

    @classmethod
    def symbol(cls, ctx, name):
        return cls(ctx, {ctx.unit_keys[ctx.index(name)]: 1})

    # predicates and access

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self):
        return self.terms.get(0, 0)

    def leading(self):
        k = max(self.terms)
        return k, self.terms[k]

    def total_degree(self):
        if not self.terms:
            return -1
        return max(self.terms) >> self.ctx.deg_shift

    def degree_in(self, i):
        s = self.ctx.shifts[i]
        return max(((k >> s) & MASK for k in self.terms), default=0)

    def symbol_mask(self):
        """Bit i set when symbol i occurs."""
        if self._mask is None:
            m = 0
            for k in self.terms:
                for i, s in enumerate(self.ctx.shifts):
                    if (k >> s) & MASK:
                        m |= 1 << i
            self._mask = m
        return self._mask

    def is_integral(self):
        return all(type(c) is int for c in self.terms.values())

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.ctx is other.ctx and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.ctx), frozenset(self.terms.items())))
        return self._hash

    # ring operations

    def _wrap(self, other):
        if isinstance(other, SparsePoly):
            _check_ctx(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return SparsePoly.const(self.ctx, other)
        return None

    def __add__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return SparsePoly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly(self.ctx, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _coerce_coeff(c)
        if not c:
            return SparsePoly(self.ctx)
        if c == 1:
            return self
        return SparsePoly(self.ctx, {k: _coerce_coeff(v * c) if isinstance(c, Fraction) else v * c
                                     for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, SparsePoly):
            return NotImplemented
        _check_ctx(self, other)
        if not self.terms or not other.terms:
            return SparsePoly(self.ctx)
        if len(self.terms) == 1 and 0 in self.terms:
            return other.scale(self.terms[0])
        if len(other.terms) == 1 and 0 in other.terms:
            return self.scale(other.terms[0])
        out = kernels.poly_mul(self.terms, other.terms)
        if not (self.is_integral() and other.is_integral()):
            out = {k: _coerce_coeff(v) for k, v in out.items()}
        return SparsePoly(self.ctx, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("non-negative integer exponent expected")
        result = SparsePoly.const(self.ctx, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def power(self, e):
        """Cached power, used for denominator factors."""
        if e == 0:
            return SparsePoly.const(self.ctx, 1)
        if e == 1:
            return self
        if self._pows is None:
            self._pows = {}
        p = self._pows.get(e)
        if p is None:
            p = self.power(e - 1) * self
            self._pows[e] = p
        return p

    # calculus

    def theta(self, i):
        """z_i d/dz_i for global symbol index i."""
        s = self.ctx.shifts[i]
        out = {}
        for k, c in self.terms.items():
            e = (k >> s) & MASK
            if e:
                out[k] = c * e
        return SparsePoly(self.ctx, out)

    def deriv(self, i):
        s = self.ctx.shifts[i]
        step = self.ctx.unit_keys[i]
        out = {}
        for k, c in self.terms.items():
            e = (k >> s) & MASK
            if e:
                out[k - step] = c * e
        return SparsePoly(self.ctx, out)

    # content and division

    def content(self):
        """Positive rational c with self/c integral and primitive."""
        if not self.terms:
            return Fraction(1)
        g = 0
        den = 1
        for c in self.terms.values():
            if type(c) is int:
                g = gcd(g, c)
            else:
                g = gcd(g, c.numerator)
                den = _lcm(den, c.denominator)
        return Fraction(g, den)

    def primitive(self):
        """Return (c, p) with self = c*p, p integral, primitive, positive leading coefficient."""
        if not self.terms:
            raise ValueError("zero polynomial has no primitive part")
        c = self.content()
        if self.leading()[1] < 0:
            c = -c
        if c == 1:
            return Fraction(1), self
        if c.denominator == 1:
            n = c.numerator
            return c, SparsePoly(self.ctx, {k: v // n for k, v in self.terms.items()})
        inv = 1 / c
        return c, SparsePoly(self.ctx, {k: _coerce_coeff(v * inv) for k, v in self.terms.items()})

    def monomial_gcd(self):
        """Exponent tuple of the largest monomial dividing every term."""
        exps = None
        for k in self.terms:
            e = self.ctx.unpack(k)
            exps = e if exps is None else tuple(map(min, exps, e))
        return exps or (0,) * self.ctx.n

    def divide_exact(self, f):
        """Quotient self/f when f divides self over Z, else None.

        Both must be integral; f is expected primitive.
        """
        _check_ctx(self, f)
        if not self.terms:
            return SparsePoly(self.ctx)
        return kernels.poly_divexact(self.terms, f.terms, self.ctx.guard, self.ctx)

    # evaluation

    def evaluate(self, values):
        """Evaluate at a sequence of values, one per symbol."""
        if not self.terms:
            return 0
        ctx = self.ctx
        exact = all(isinstance(v, (int, Fraction)) for v in values)
        if exact:
            return _eval_exact(self, [Fraction(v) for v in values])
        pw = [dict() for _ in range(ctx.n)]
        total = 0
        for k, c in self.terms.items():
            t = float(c)
            for i, s in enumerate(ctx.shifts):
                e = (k >> s) & MASK
                if e:
                    v = pw[i].get(e)
                    if v is None:
                        v = values[i] ** e
                        pw[i][e] = v
                    t = t * v
            total += t
        return total

    def eval_mod(self, point, cache):
        """Value modulo PRIME at an integer point, with a monomial cache."""
        total = 0
        ctx = self.ctx
        for k, c in self.terms.items():
            v = cache.get(k)
            if v is None:
                v = 1
                for i, s in enumerate(ctx.shifts):
                    e = (k >> s) & MASK
                    if e:
                        v = v * pow(point[i], e, PRIME) % PRIME
                cache[k] = v
            if type(c) is int:
                total += c * v
            else:
                total += c.numerator * v * pow(c.denominator, -1, PRIME)
        return total % PRIME

    # printing

    def sorted_terms(self):
        return sorted(self.terms.items(), reverse=True)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"SparsePoly({format_poly(self)!r})"


def _eval_exact(p, values):
    """Exact evaluation through one common denominator."""
    ctx = p.ctx
    q = 1
    for v in values:
        q = _lcm(q, v.denominator)
    nums = [v.numerator * (q // v.denominator) for v in values]
    deg = p.total_degree()
    qpow = [1]
    for _ in range(deg):
        qpow.append(qpow[-1] * q)
    pw = [dict() for _ in range(ctx.n)]
    total_int = 0
    total_frac = Fraction(0)
    for k, c in p.terms.items():
        t = 1
        d = 0
        for i, s in enumerate(ctx.shifts):
            e = (k >> s) & MASK
            if e:
                d += e
                v = pw[i].get(e)
                if v is None:
                    v = nums[i] ** e
                    pw[i][e] = v
                t *= v
        t *= qpow[deg - d]
        if type(c) is int:
            total_int += c * t
        else:
            total_frac += c * t
    return (total_int + total_frac) / Fraction(qpow[deg])


def _format_coeff(c):
    if isinstance(c, Fraction) and c.denominator != 1:
        return f"{c.numerator}/{c.denominator}"
    return str(int(c))


def format_monomial(ctx, key):
    parts = []
    for name, e in zip(ctx.names, ctx.unpack(key)):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p):
    if not p.terms:
        return "0"
    out = []
    for i, (k, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = format_monomial(p.ctx, k)
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coeff(a)}*{mono}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# ---------------------------------------------------------------------------
# rational functions


class _Probe:
    """Random zero of a factor modulo PRIME, used to screen trial divisions."""

    __slots__ = ("point", "cache")

    def __init__(self, point):
        self.point = point
        self.cache = {}


def _make_probe(f):
    """Find a point where f vanishes mod PRIME; None if no linear variable."""
    ctx = f.ctx
    rng = random.Random(hash(f) & 0xFFFFFFFF)
    for i in range(ctx.n):
        if f.degree_in(i) != 1:
            continue
        s = ctx.shifts[i]
        lin = {}
        rest = {}
        for k, c in f.terms.items():
            if (k >> s) & MASK:
                lin[k - ctx.unit_keys[i]] = c
            else:
                rest[k] = c
        alpha = SparsePoly(ctx, lin)
        beta = SparsePoly(ctx, rest)
        for _ in range(8):
            point = [rng.randrange(2, PRIME - 1) for _ in range(ctx.n)]
            point[i] = 0
            a = alpha.eval_mod(point, {})
            if a:
                b = beta.eval_mod(point, {})
                point[i] = (-b * pow(a, -1, PRIME)) % PRIME
                return _Probe(point)
    return None


_PROBES: dict = {}


def _maybe_divides(f, p):
    """Cheap necessary test for f | p."""
    probe = _PROBES.get(f, False)
    if probe is False:
        probe = _make_probe(f)
        _PROBES[f] = probe
    if probe is None:
        return True
    return p.eval_mod(probe.point, probe.cache) == 0


def _factor_key(f):
    return tuple(f.sorted_terms())


def _split_denominator(p):
    """Split a nonzero polynomial into (rational constant, {factor: exp})."""
    ctx = p.ctx
    c, prim = p.primitive()
    factors = {}
    mono = prim.monomial_gcd()
    if any(mono):
        key = ctx.pack(mono)
        prim = SparsePoly(ctx, {k - key: v for k, v in prim.terms.items()})
        for i, e in enumerate(mono):
            if e:
                sym = SparsePoly(ctx, {ctx.unit_keys[i]: 1})
                ctx.register_factor(sym)
                factors[sym] = e
    if prim.is_constant():
        return c * prim.constant_value(), factors
    for f in list(ctx.registry):
        if prim.is_constant():
            break
        if f.total_degree() > prim.total_degree():
            continue
        while _maybe_divides(f, prim):
            q = prim.divide_exact(f)
            if q is None:
                break
            prim = q
            factors[f] = factors.get(f, 0) + 1
    if not prim.is_constant():
        c2, prim = prim.primitive()
        c *= c2
        ctx.register_factor(prim)
        factors[prim] = factors.get(prim, 0) + 1
    else:
        c *= prim.constant_value()
    return c, factors


class RatFun:
    """num / (dconst * prod f**e) with integral num and primitive factors f.

    The canonical form is reached by cancelling integer content and every
    denominator factor that divides the numerator.  Equal values built along
    different routes can still differ structurally when a factor has been
    split differently; ratfun_equal compares by cross-multiplication.
    """

    __slots__ = ("ctx", "num", "dconst", "factors", "_hash")

    def __init__(self, ctx, num, dconst=1, factors=None):
        self.ctx = ctx
        self.num = num
        self.dconst = dconst
        self.factors = factors or {}
        self._hash = None

    # construction

    @classmethod
    def _build(cls, ctx, num, dconst, factors, cancel=True, only=None):
        if not num.terms:
            return cls(ctx, num, 1, {})
        factors = {f: e for f, e in factors.items() if e}
        # integer content
        cn = num.content()
        if cn.denominator != 1:
            num = SparsePoly(ctx, {k: _coerce_coeff(v * cn.denominator) for k, v in num.terms.items()})
            dconst *= cn.denominator
            cn = Fraction(cn.numerator)
        if dconst < 0:
            dconst = -dconst
            num = -num
        if cancel and factors:
            for f in (factors if only is None else only):
                e = factors.get(f, 0)
                while e and _maybe_divides(f, num):
                    q = num.divide_exact(f)
                    if q is None:
                        break
                    num = q
                    e -= 1
                if f in factors:
                    factors[f] = e
            factors = {f: e for f, e in factors.items() if e}
            cn = num.content()
        g = gcd(cn.numerator, dconst)
        if g > 1:
            num = SparsePoly(ctx, {k: v // g for k, v in num.terms.items()})
            dconst //= g
        return cls(ctx, num, dconst, factors)

    @classmethod
    def from_poly(cls, p):
        return cls._build(p.ctx, p, 1, {}, cancel=False)

    @classmethod
    def from_polys(cls, num, den):
        _check_ctx(num, den)
        if not den.terms:
            raise ZeroDivisionError("zero denominator")
        if not num.terms:
            return cls.zero(num.ctx)
        c, factors = _split_denominator(den)
        num = num.scale(1 / c) if c != 1 else num
        return cls._build(num.ctx, num, 1, factors)

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, SparsePoly(ctx), 1, {})

    @classmethod
    def const(cls, ctx, c):
        return cls.from_poly(SparsePoly.const(ctx, Fraction(c)))

    @classmethod
    def symbol(cls, ctx, name):
        return cls(ctx, SparsePoly.symbol(ctx, name), 1, {})

    # access

    def is_zero(self):
        return not self.num.terms

    def is_constant(self):
        return not self.factors and self.num.is_constant()

    def constant_value(self):
        return Fraction(self.num.constant_value(), self.dconst)

    @property
    def den(self):
        out = SparsePoly.const(self.ctx, self.dconst)
        for f, e in self.sorted_factors():
            out = out * f.power(e)
        return out

    def sorted_factors(self):
        return sorted(self.factors.items(), key=lambda fe: _factor_key(fe[0]))

    def __eq__(self, other):
        if isinstance(other, RatFun):
            return (self.ctx is other.ctx and self.dconst == other.dconst
                    and self.factors == other.factors and self.num == other.num)
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.dconst, frozenset(self.factors.items())))
        return self._hash

    def __bool__(self):
        return bool(self.num.terms)

    # arithmetic

    def _wrap(self, other):
        if isinstance(other, RatFun):
            _check_ctx(self, other)
            return other
        if isinstance(other, (int, Fraction)):
            return RatFun.const(self.ctx, other)
        if isinstance(other, SparsePoly):
            _check_ctx(self, other)
            return RatFun.from_poly(other)
        return None

    def __add__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        if not other.num.terms:
            return self
        if not self.num.terms:
            return other
        ctx = self.ctx
        f1, f2 = self.factors, other.factors
        L = dict(f1)
        for f, e in f2.items():
            if e > L.get(f, 0):
                L[f] = e
        D = _lcm(self.dconst, other.dconst)
        m1 = SparsePoly.const(ctx, D // self.dconst)
        m2 = SparsePoly.const(ctx, D // other.dconst)
        for f, e in L.items():
            d1 = e - f1.get(f, 0)
            d2 = e - f2.get(f, 0)
            if d1:
                m1 = m1 * f.power(d1)
            if d2:
                m2 = m2 * f.power(d2)
        num = self.num * m1 + other.num * m2
        return RatFun._build(ctx, num, D, L)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(self.ctx, -self.num, self.dconst, self.factors)

    def __sub__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        ctx = self.ctx
        if not self.num.terms or not other.num.terms:
            return RatFun.zero(ctx)
        n1, n2 = self.num, other.num
        f1 = dict(self.factors)
        f2 = dict(other.factors)
        # cross cancellation on the smaller operands
        for f in list(f1):
            while f1[f] and _maybe_divides(f, n2):
                q = n2.divide_exact(f)
                if q is None:
                    break
                n2 = q
                f1[f] -= 1
        for f in list(f2):
            while f2[f] and _maybe_divides(f, n1):
                q = n1.divide_exact(f)
                if q is None:
                    break
                n1 = q
                f2[f] -= 1
        merged = {f: e for f, e in f1.items() if e}
        for f, e in f2.items():
            if e:
                merged[f] = merged.get(f, 0) + e
        d = self.dconst * other.dconst
        return RatFun._build(ctx, n1 * n2, d, merged, cancel=False)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num.terms:
            raise ZeroDivisionError("inverse of zero rational function")
        c, factors = _split_denominator(self.num)
        num = SparsePoly.const(self.ctx, self.dconst)
        for f, e in self.sorted_factors():
            num = num * f.power(e)
        num = num.scale(1 / c) if c != 1 else num
        return RatFun._build(self.ctx, num, 1, factors, cancel=False)

    def __truediv__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e):
        if not isinstance(e, int):
            raise ValueError("integer exponent expected")
        if e < 0:
            return self.inverse() ** (-e)
        out = RatFun.const(self.ctx, 1)
        for _ in range(e):
            out = out * self
        return out

    # calculus

    def theta(self, i):
        """theta_i = z_i d/dz_i for global symbol index i."""
        ctx = self.ctx
        bit = 1 << i
        moving = [(f, e) for f, e in self.sorted_factors() if f.symbol_mask() & bit]
        tn = self.num.theta(i)
        if not moving:
            return RatFun._build(ctx, tn, self.dconst, dict(self.factors), cancel=False)
        prod_all = SparsePoly.const(ctx, 1)
        for f, _ in moving:
            prod_all = prod_all * f
        num = tn * prod_all
        for j, (f, e) in enumerate(moving):
            others = SparsePoly.const(ctx, e)
            for k, (g, _) in enumerate(moving):
                if k != j:
                    others = others * g
            num = num - self.num * f.theta(i) * others
        factors = dict(self.factors)
        for f, _ in moving:
            factors[f] += 1
        return RatFun._build(ctx, num, self.dconst, factors, only=[f for f, _ in moving])

    # evaluation

    def evaluate(self, values):
        den = self.dconst
        for f, e in self.factors.items():
            v = f.evaluate(values)
            if v == 0:
                raise DenominatorVanishes(f"factor {f} vanishes")
            den = den * v ** e
        return self.num.evaluate(values) / den

    # printing

    def __str__(self):
        return format_ratfun(self)

    def __repr__(self):
        return f"RatFun({format_ratfun(self)!r})"


def format_ratfun(r):
    num = format_poly(r.num)
    if not r.factors and r.dconst == 1:
        return num
    parts = [str(r.dconst)] if r.dconst != 1 else []
    for f, e in r.sorted_factors():
        s = format_poly(f)
        if len(f.terms) > 1:
            s = f"({s})"
        parts.append(s if e == 1 else f"{s}^{e}")
    den = "*".join(parts)
    if len(r.num.terms) > 1:
        num = f"({num})"
    if len(parts) > 1:
        den = f"({den})"
    return f"{num}/{den}"


# ---------------------------------------------------------------------------
# public operations


def poly_arith(p, q, op):
    """Exact add, sub or mul of two polynomials in one context."""
    _check_ctx(p, q)
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}")


def ratfun_equal(p, q):
    """Semantic equality: p.num*q.den - q.num*p.den == 0."""
    _check_ctx(p, q)
    if p == q:
        return True
    # cancel shared factors before cross-multiplying
    fp, fq = dict(p.factors), dict(q.factors)
    for f in set(fp) & set(fq):
        m = min(fp[f], fq[f])
        fp[f] -= m
        fq[f] -= m
    lhs = p.num.scale(q.dconst)
    rhs = q.num.scale(p.dconst)
    for f, e in fq.items():
        if e:
            lhs = lhs * f.power(e)
    for f, e in fp.items():
        if e:
            rhs = rhs * f.power(e)
    return (lhs - rhs).is_zero()


def theta_deriv(R, i):
    """theta_i applied to R; i is the 0-based variable index."""
    return R.theta(R.ctx.var_index(i))


def eval_ratfun(R, assignment):
    """Evaluate with a mapping from symbol name (or Symbol) to value."""
    values = []
    for nm in R.ctx.names:
        if nm in assignment:
            values.append(assignment[nm])
            continue
        found = [v for k, v in assignment.items() if isinstance(k, Symbol) and k.name == nm]
        if not found:
            raise KeyError(f"no value for symbol {nm!r}")
        values.append(found[0])
    return R.evaluate(values)


# ---------------------------------------------------------------------------
# affine parameter expressions


class ParamExpr:
    """Affine combination sum(coeff*atom) + offset with rational coefficients."""

    __slots__ = ("atoms", "offset")

    def __init__(self, atoms=None, offset=0):
        self.atoms = {k: Fraction(v) for k, v in (atoms or {}).items() if v}
        self.offset = Fraction(offset)

    @classmethod
    def atom(cls, name):
        return cls({name: 1})

    @classmethod
    def parse(cls, text):
        if isinstance(text, ParamExpr):
            return text
        if isinstance(text, (int, Fraction)):
            return cls({}, text)
        return parse_ratfun(str(text), None)

    def _wrap(self, other):
        if isinstance(other, ParamExpr):
            return other
        if isinstance(other, (int, Fraction)):
            return ParamExpr({}, other)
        return None

    def __add__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        atoms = dict(self.atoms)
        for k, v in other.atoms.items():
            atoms[k] = atoms.get(k, 0) + v
        return ParamExpr(atoms, self.offset + other.offset)

    __radd__ = __add__

    def __neg__(self):
        return ParamExpr({k: -v for k, v in self.atoms.items()}, -self.offset)

    def __sub__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, ParamExpr):
            if c.is_numeric():
                c = c.offset
            elif self.is_numeric():
                return c * self.offset
            else:
                raise ParseError("parameter expressions must stay affine")
        if not isinstance(c, (int, Fraction)):
            return NotImplemented
        return ParamExpr({k: v * c for k, v in self.atoms.items()}, self.offset * c)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._wrap(other)
        if other is None:
            return NotImplemented
        return self.atoms == other.atoms and self.offset == other.offset

    def __hash__(self):
        return hash((frozenset(self.atoms.items()), self.offset))

    def is_numeric(self):
        return not self.atoms

    def is_zero(self):
        return not self.atoms and self.offset == 0

    def is_integer(self):
        return not self.atoms and self.offset.denominator == 1

    def to_poly(self, ctx):
        terms = {}
        for k, v in self.atoms.items():
            terms[ctx.unit_keys[ctx.index(k)]] = v
        if self.offset:
            terms[0] = self.offset
        return SparsePoly.from_dict(ctx, terms)

    def to_ratfun(self, ctx):
        return RatFun.from_poly(self.to_poly(ctx))

    def evaluate(self, values):
        """Value with atoms substituted from a mapping name -> number."""
        total = self.offset
        for k, v in self.atoms.items():
            total = total + v * values[k]
        return total

    def __str__(self):
        parts = []
        for k in sorted(self.atoms):
            v = self.atoms[k]
            mag = abs(v)
            body = k if mag == 1 else f"{_format_coeff(mag)}*{k}"
            if not parts:
                parts.append(f"-{body}" if v < 0 else body)
            else:
                parts.append(f" - {body}" if v < 0 else f" + {body}")
        if self.offset or not parts:
            mag = abs(self.offset)
            body = _format_coeff(mag)
            if not parts:
                parts.append(f"-{body}" if self.offset < 0 else body)
            else:
                parts.append(f" - {body}" if self.offset < 0 else f" + {body}")
        return "".join(parts)

    def __repr__(self):
        return f"ParamExpr({str(self)!r})"


def collect_atoms(exprs):
    """Atom names in first-appearance order."""
    seen = []
    for e in exprs:
        for k in sorted(e.atoms):
            if k not in seen:
                seen.append(k)
    return seen


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text):
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, name, op = m.groups()
        if num is not None:
            toks.append(("num", num))
        elif name is not None:
            toks.append(("name", name))
        elif op in "+-*/^()":
            toks.append(("op", op))
        else:
            raise ParseError(f"unexpected character {op!r} in {text!r}")
        pos = m.end()
    return toks


class _Parser:
    """Recursive-descent parser over a pluggable value algebra."""

    def __init__(self, text, leaf):
        self.toks = _tokenize(text)
        self.pos = 0
        self.text = text
        self.leaf = leaf

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, op):
        t = self.take()
        if t != ("op", op):
            raise ParseError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        if not self.toks:
            raise ParseError("empty expression")
        v = self.expr()
        if self.pos != len(self.toks):
            raise ParseError(f"trailing input in {self.text!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self):
        v = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                v = v * rhs
            else:
                v = self.leaf.div(v, rhs)
        return v

    def unary(self):
        t = self.peek()
        if t == ("op", "-"):
            self.take()
            return -self.unary()
        if t == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            neg = False
            if self.peek() == ("op", "-"):
                self.take()
                neg = True
            kind, tok = self.take()
            if kind != "num" or not tok.isdigit():
                raise ParseError(f"integer exponent expected in {self.text!r}")
            v = self.leaf.pow(v, -int(tok) if neg else int(tok))
        return v

    def atom(self):
        kind, tok = self.take()
        if kind == "num":
            return self.leaf.number(tok)
        if kind == "name":
            return self.leaf.name(tok)
        if (kind, tok) == ("op", "("):
            v = self.expr()
            self.expect(")")
            return v
        raise ParseError(f"unexpected token {tok!r} in {self.text!r}")


class _RatLeaf:
    def __init__(self, ctx):
        self.ctx = ctx

    def number(self, tok):
        if "." in tok:
            raise ParseError("decimal literals are not exact; use p/q")
        return RatFun.const(self.ctx, int(tok))

    def name(self, tok):
        return RatFun.symbol(self.ctx, tok)

    def div(self, x, y):
        return x / y

    def pow(self, x, e):
        return x ** e


class _ParamLeaf:
    """Affine values; decimals are read exactly as decimal fractions."""

    def number(self, tok):
        return ParamExpr({}, Fraction(tok))

    def name(self, tok):
        return ParamExpr.atom(tok)

    def div(self, x, y):
        if not y.is_numeric() or y.offset == 0:
            raise ParseError("parameter expressions must stay affine")
        return x * (1 / y.offset)

    def pow(self, x, e):
        if not x.is_numeric():
            raise ParseError("parameter expressions must stay affine")
        if x.offset == 0 and e < 0:
            raise ParseError("division by zero")
        return ParamExpr({}, x.offset ** e)


def parse_ratfun(text, ctx):
    """Parse the textual form; ctx=None parses an affine ParamExpr."""
    if ctx is None:
        return _Parser(text, _ParamLeaf()).parse()
    return _Parser(text, _RatLeaf(ctx)).parse()


def parse_poly(text, ctx):
    r = parse_ratfun(text, ctx)
    if r.factors or r.dconst != 1:
        if r.factors:
            raise ParseError(f"{text!r} is not a polynomial")
        return r.num.scale(Fraction(1, r.dconst))
    return r.num


def parse_param(text):
    return parse_ratfun(str(text), None)
