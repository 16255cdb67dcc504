"""Multiple polylogarithms as truncated nested sums.

Li_{k1..kn}(x1..xn) = sum over 0 < m1 < ... < mn of prod x_i^m_i / m_i^k_i.

The sum is evaluated in tail-product form: with y_i = x_i x_{i+1} ... x_n
the summand becomes prod y_i^(m_i - m_(i-1)) / m_i^k_i, so every power that
appears has modulus below one even when some x_i exceeds one.
"""

from __future__ import annotations

import math

from scipy import integrate

from ..errors import ConvergenceGuard
from .series import NumericValue, SeriesConfig

TARGET = 1e-17
MAX_TERMS = 20000


def tail_products(args):
    out = []
    p = 1.0
    for x in reversed(args):
        p *= x
        out.append(p)
    return out[::-1]


def _order_for(rho, base):
    if rho == 0.0:
        return max(base, 4)
    need = math.ceil(math.log(TARGET) / math.log(rho)) + 10
    return min(max(base, need), MAX_TERMS)


def mpl(weights, args, cfg=None):
    """Multiple polylogarithm Li_{weights}(args) for real arguments."""
    args = [float(x) for x in args]
    if len(weights) != len(args):
        raise ValueError("weights and args must be equally long")
    return mpl_tails(weights, tail_products(args), cfg)


def mpl_tails(weights, y, cfg=None):
    """Li_{weights} given the tail products y_i = x_i ... x_n directly.

    Useful when an argument is a ratio z_i/z_j whose tails stay finite
    as z_j goes to zero.
    """
    cfg = cfg or SeriesConfig()
    weights = [int(k) for k in weights]
    y = [float(t) for t in y]
    if len(weights) != len(y) or not weights:
        raise ValueError("weights and tails must be non-empty and equally long")
    if any(k < 1 for k in weights):
        raise ValueError("weights must be positive integers")
    rho = max(abs(t) for t in y)
    if rho >= 1.0:
        raise ConvergenceGuard(f"tail product of modulus {rho} does not converge")
    if rho > cfg.radius_guard:
        raise ConvergenceGuard(f"tail product {rho} exceeds the guard {cfg.radius_guard}")
    M = _order_for(rho, cfg.max_order)
    # A[m] holds the partial nested sum with the current outermost index at m
    A = [0.0] * (M + 1)
    k0, y0 = weights[0], y[0]
    p = 1.0
    for m in range(1, M + 1):
        p *= y0
        A[m] = p / m ** k0
    for k, yi in zip(weights[1:], y[1:]):
        B = [0.0] * (M + 1)
        run = 0.0
        for m in range(1, M + 1):
            run = yi * (run + A[m - 1])
            B[m] = run / m ** k
        A = B
    total = math.fsum(A)
    last = abs(A[M])
    prev = abs(A[M - 1]) if M > 1 else 0.0
    q = max(rho, last / prev if prev else 0.0)
    tail = last * q / (1.0 - q) if q < 1.0 else math.inf
    rounding = 4 * 2.2e-16 * math.fsum(abs(v) for v in A) * len(weights)
    return NumericValue(total, tail + rounding)


def li(k, x, cfg=None):
    """Classical polylogarithm Li_k(x)."""
    return mpl((k,), (x,), cfg)


def nielsen_s12(z, cfg=None):
    """Nielsen S_{1,2}(z) = sum_{n>=2} z^n H_{n-1} / n^2."""
    cfg = cfg or SeriesConfig()
    z = float(z)
    if abs(z) >= 1.0:
        raise ConvergenceGuard("S_{1,2} series needs |z| < 1")
    if abs(z) > cfg.radius_guard:
        raise ConvergenceGuard(f"|z| = {abs(z)} exceeds the guard {cfg.radius_guard}")
    M = _order_for(abs(z), cfg.max_order)
    terms = []
    h = 0.0
    p = z
    for n in range(2, M + 1):
        h += 1.0 / (n - 1)
        p *= z
        terms.append(p * h / (n * n))
    total = math.fsum(terms)
    last = abs(terms[-1]) if terms else 0.0
    tail = last * abs(z) / (1.0 - abs(z)) * 1.5
    rounding = 4 * 2.2e-16 * math.fsum(abs(t) for t in terms)
    return NumericValue(total, tail + rounding)


def nielsen_s12_integral(z):
    """Quadrature of (1/2) int_0^1 ln^2(1 - z t) / t dt."""
    z = float(z)
    if not z < 1.0:
        raise ConvergenceGuard("the integral form needs z < 1")

    def f(t):
        if t == 0.0:
            return 0.0
        return 0.5 * math.log1p(-z * t) ** 2 / t

    val, err = integrate.quad(f, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return NumericValue(val, abs(err))
