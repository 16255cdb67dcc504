"""Hypergeometric series attached to one-loop N-point diagrams.

Every form here is a nested sum over r_1..r_n of

    prod (alpha)_{sum of r over a subset} / prod (beta)_{...} * prod y_i^r_i

normalized so that the r = 0 term is one.  Gamma ratios of the printed
forms are turned into Pochhammer symbols, which only drops constants.
Terms are evaluated in log space with numpy over all |r| <= max_order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, gammasgn

from ..errors import GammaPole, RadiusExceeded
from .series import NumericValue, SeriesConfig, _finish


@dataclass(frozen=True)
class NestedSeries:
    """num/den: tuples of (alpha, subset of 0-based indices); kinds: 'z' or 'x' per index."""

    num: tuple
    den: tuple
    kinds: tuple

    @property
    def nvars(self):
        return len(self.kinds)


def x_of_z(z):
    """x = -z / (1 - z)."""
    return -z / (1.0 - z)


def z_of_x(x):
    return -x / (1.0 - x)


@lru_cache(maxsize=16)
def _indices(n, N):
    """All multi-indices with |r| <= N as an (count, n) int array."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    rows = []
    for head in range(N + 1):
        tail = _indices(n - 1, N - head)
        rows.append(np.column_stack([np.full(len(tail), head, dtype=np.int64), tail]))
    return np.vstack(rows)


def _log_poch(alpha, n):
    """log|(alpha)_n| and its sign, vectorized over n."""
    n = np.asarray(n, dtype=float)
    lg = gammaln(alpha + n) - gammaln(alpha)
    sg = gammasgn(alpha + n) * gammasgn(alpha)
    return lg, sg


def _is_nonpos_int(x):
    return x <= 0 and abs(x - round(x)) < 1e-12


def _check_poles(series, N):
    for alpha, subset in series.num + series.den:
        # (alpha)_n written through Gamma needs alpha off the poles
        if _is_nonpos_int(alpha):
            raise GammaPole(f"Gamma pole at parameter {alpha}")
    for beta, _ in series.den:
        if _is_nonpos_int(beta) and -beta < N:
            raise GammaPole(f"denominator Pochhammer ({beta})_n vanishes")


def terms(series, y, N):
    """(indices, term values) for every |r| <= N."""
    r = _indices(series.nvars, N)
    logt = np.zeros(len(r))
    sign = np.ones(len(r))
    for alpha, subset in series.num:
        lg, sg = _log_poch(alpha, r[:, list(subset)].sum(axis=1))
        logt += lg
        sign *= sg
    for beta, subset in series.den:
        lg, sg = _log_poch(beta, r[:, list(subset)].sum(axis=1))
        logt -= lg
        sign *= sg
    for i, yi in enumerate(y):
        if yi == 0.0:
            zero = r[:, i] > 0
            sign[zero] = 0.0
            continue
        logt += r[:, i] * math.log(abs(yi))
        if yi < 0:
            sign *= np.where(r[:, i] % 2, -1.0, 1.0)
    return r, sign * np.exp(logt)


def evaluate(series, z, cfg=None):
    """Sum the series at z; entries of kind 'x' receive x = -z/(1-z)."""
    cfg = cfg or SeriesConfig()
    z = [float(t) for t in z]
    if len(z) != series.nvars:
        raise ValueError(f"expected {series.nvars} arguments, got {len(z)}")
    y = [x_of_z(t) if k == "x" else t for t, k in zip(z, series.kinds)]
    rho = max((abs(t) for t in y), default=0.0)
    if rho > cfg.radius_guard:
        raise RadiusExceeded(f"max |argument| = {rho} exceeds the guard {cfg.radius_guard}")
    N = cfg.max_order
    _check_poles(series, N)
    r, t = terms(series, y, N)
    order = r.sum(axis=1)
    shells = np.bincount(order, weights=t, minlength=N + 1)
    abs_shells = np.bincount(order, weights=np.abs(t), minlength=N + 1)
    return _finish(list(shells), list(abs_shells), rho, False)


def _span(lo, hi):
    return tuple(range(lo, hi))


def hypera(N, d):
    """Off-shell massive N-point form in the z variables (N - 1 of them)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    n = N - 1
    num = tuple(((d - k) / 2, _span(k - 1, n)) for k in range(1, N))
    den = tuple(((d - k + 1) / 2, _span(k - 1, n)) for k in range(1, N))
    return NestedSeries(num, den, ("z",) * n)


def hyperb(N, d):
    """Form after the linear-fractional transformation, all in x variables."""
    if N < 2:
        raise ValueError("N must be at least 2")
    n = N - 1
    num = [(0.5, (0,))]
    den = []
    for i in range(2, N):
        num.append((i / 2, _span(0, i)))
        den.append((i / 2, _span(0, i - 1)))
    den.append((d / 2, _span(0, n)))
    return NestedSeries(tuple(num), tuple(den), ("x",) * n)


def hyper_off(N, d):
    """Off-shell massless N-point form (N - 2 variables)."""
    if N < 3:
        raise ValueError("N must be at least 3")
    n = N - 2
    num = tuple(((d - k - 1) / 2, _span(k - 1, n)) for k in range(1, N - 1))
    den = tuple(((d - k) / 2, _span(k - 1, n)) for k in range(1, N - 1))
    return NestedSeries(num, den, ("z",) * n)


def h_form(name, d):
    """Intermediate forms with mixed x and z arguments.

    Names: H3a, H3b, H4a, H4b, H4c, H5a, H5b, H5c, H5d.  H5a uses the full
    index sum r1+r2+r3+r4 in (d/2); the variant 'H5a_printed' keeps r1+r2+r4.
    """
    h = 0.5
    forms = {
        "H3a": ([(h, (0,)), ((d - 2) / 2, (1,))],
                [(d / 2, (0, 1))], "xz"),
        "H3b": ([(h, (0,)), (1.0, (0, 1))],
                [(1.0, (0,)), (d / 2, (0, 1))], "xx"),
        "H4a": ([(h, (0,)), ((d - 2) / 2, (1, 2)), ((d - 3) / 2, (2,))],
                [(d / 2, (0, 1, 2)), ((d - 2) / 2, (2,))], "xzz"),
        "H4b": ([(h, (0,)), (1.0, (0, 1)), ((d - 3) / 2, (2,))],
                [(1.0, (0,)), (d / 2, (0, 1, 2))], "xxz"),
        "H4c": ([(h, (0,)), (1.0, (0, 1)), (1.5, (0, 1, 2))],
                [(1.0, (0,)), (1.5, (0, 1)), (d / 2, (0, 1, 2))], "xxx"),
        "H5a": ([(h, (0,)), ((d - 2) / 2, (1, 2, 3)), ((d - 3) / 2, (2, 3)), ((d - 4) / 2, (3,))],
                [(d / 2, (0, 1, 2, 3)), ((d - 2) / 2, (2, 3)), ((d - 3) / 2, (3,))], "xzzz"),
        "H5a_printed": ([(h, (0,)), ((d - 2) / 2, (1, 2, 3)), ((d - 3) / 2, (2, 3)),
                         ((d - 4) / 2, (3,))],
                        [(d / 2, (0, 1, 3)), ((d - 2) / 2, (2, 3)), ((d - 3) / 2, (3,))], "xzzz"),
        "H5b": ([(h, (0,)), (1.0, (0, 1)), ((d - 3) / 2, (2, 3)), ((d - 4) / 2, (3,))],
                [(1.0, (0,)), (d / 2, (0, 1, 2, 3)), ((d - 3) / 2, (3,))], "xxzz"),
        "H5c": ([(h, (0,)), (1.0, (0, 1)), (1.5, (0, 1, 2)), ((d - 4) / 2, (3,))],
                [(1.0, (0,)), (1.5, (0, 1)), (d / 2, (0, 1, 2, 3))], "xxxz"),
        "H5d": ([(h, (0,)), (1.0, (0, 1)), (1.5, (0, 1, 2)), (2.0, (0, 1, 2, 3))],
                [(1.0, (0,)), (1.5, (0, 1)), (2.0, (0, 1, 2)), (d / 2, (0, 1, 2, 3))], "xxxx"),
    }
    if name not in forms:
        raise ValueError(f"unknown form {name!r}")
    num, den, kinds = forms[name]
    return NestedSeries(tuple(num), tuple(den), tuple(kinds))


def feynman_h_series(N, d, z, cfg=None):
    """H_N^(d)(z) for N = 2..5 in the original z variables."""
    if not 2 <= N <= 5:
        raise ValueError("N must lie in 2..5")
    return evaluate(hypera(N, d), z, cfg)


def hyperb_series(N, d, z, cfg=None):
    """Transformed form, evaluated at x_i = -z_i/(1 - z_i)."""
    return evaluate(hyperb(N, d), z, cfg)


def offshell_series(N, d, z, cfg=None):
    """Off-shell massless H_N^(d) in N - 2 variables."""
    return evaluate(hyper_off(N, d), z, cfg)


def h_form_series(name, d, z, cfg=None):
    return evaluate(h_form(name, d), z, cfg)


def term_ratio(series, r, i):
    """term(r + e_i) / term(r) at a multi-index r, without the y_i factor."""
    out = 1.0
    for alpha, subset in series.num:
        if i in subset:
            out *= alpha + sum(r[j] for j in subset)
    for beta, subset in series.den:
        if i in subset:
            out /= beta + sum(r[j] for j in subset)
    return out


def _gamma_ratio(A, B):
    return float(gammasgn(A) * gammasgn(B)) * math.exp(gammaln(A) - gammaln(B))


def _single_sum(A, B, y, cfg):
    """sum_r Gamma(A + r)/Gamma(B + r) y^r, up to the Gamma(A)/Gamma(B) factor."""
    if abs(y) > cfg.radius_guard:
        raise RadiusExceeded(f"|argument| = {abs(y)} exceeds the guard {cfg.radius_guard}")
    if _is_nonpos_int(A) or _is_nonpos_int(B):
        raise GammaPole("Gamma pole in a rec parameter")
    t, s, mag = 1.0, 1.0, 1.0
    r = 0
    while r < 100000:
        t *= (A + r) / (B + r) * y
        r += 1
        s += t
        mag += abs(t)
        if abs(t) <= 1e-18 * abs(s) and r > 5:
            break
    return s, abs(t) * abs(y) / (1 - abs(y)) + 4e-16 * mag


def rec_lhs(A, B, z, cfg=None):
    """sum_r Gamma(A + r)/Gamma(B + r) z^r."""
    cfg = cfg or SeriesConfig()
    s, err = _single_sum(A, B, float(z), cfg)
    g = _gamma_ratio(A, B)
    return NumericValue(g * s, abs(g) * err)


def rec_rhs(A, B, z, cfg=None):
    """The same sum after the Pfaff transformation to z/(z - 1)."""
    cfg = cfg or SeriesConfig()
    z = float(z)
    x = z / (z - 1.0)
    s, err = _single_sum(B - A, B, x, cfg)
    g = _gamma_ratio(A, B - A) * _gamma_ratio(B - A, B) / (1.0 - z)
    return NumericValue(g * s, abs(g) * err)
