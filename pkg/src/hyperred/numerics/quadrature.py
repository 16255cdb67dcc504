"""Euler-type integral representations of F_D and F_S, used as oracles.

Endpoint singularities are absorbed into scipy's algebraic weight
u^alpha (1-u)^beta, so the remaining integrands are smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate
from scipy.special import gammaln

from ..errors import ConvergenceRegionViolated
from .series import NumericValue, _unpack_fd, _unpack_fs


@dataclass(frozen=True)
class QuadConfig:
    epsabs: float = 1e-13
    epsrel: float = 1e-12
    limit: int = 200


def _real(x):
    return float(x.offset) if hasattr(x, "offset") else float(x)


def _check_z(z):
    for x in z:
        if not float(x) < 1.0:
            raise ConvergenceRegionViolated(f"z = {x} is not below 1")


def fd_euler_integral(params, z, quad_cfg=None):
    """F_D from the one-dimensional Euler integral."""
    cfg = quad_cfg or QuadConfig()
    a, b, c = _unpack_fd(params)
    a, c = _real(a), _real(c)
    b = [_real(x) for x in b]
    z = [float(x) for x in z]
    if len(b) != len(z):
        raise ValueError("need one z per b parameter")
    if not (a > 0 and c - a > 0):
        raise ConvergenceRegionViolated("need a > 0 and c - a > 0")
    _check_z(z)

    def f(u):
        out = 1.0
        for bj, zj in zip(b, z):
            out *= (1.0 - u * zj) ** (-bj)
        return out

    val, err = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(a - 1, c - a - 1),
                              epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)
    norm = math.exp(gammaln(c) - gammaln(a) - gammaln(c - a))
    return NumericValue(val * norm, abs(err * norm))


def fs_euler_integral(params, z, quad_cfg=None):
    """F_S from the simplex integral, mapped to the square by v = (1-u) t."""
    cfg = quad_cfg or QuadConfig()
    a1, a2, b, c = _unpack_fs(params)
    a1, a2, c = _real(a1), _real(a2), _real(c)
    b1, b2, b3 = (_real(x) for x in b)
    z1, z2, z3 = (float(x) for x in z)
    e = c - a1 - a2
    if not (a1 > 0 and a2 > 0 and e > 0):
        raise ConvergenceRegionViolated("need a1, a2 and c - a1 - a2 positive")
    _check_z((z1, z2, z3))
    inner_err = [0.0]

    # after the substitution the u-weight is u^(a1-1) (1-u)^(c-a1-1)
    # and the t-weight is t^(a2-1) (1-t)^(e-1)
    def outer(u):
        w = 1.0 - u

        def inner(t):
            return (1.0 - w * t * z2) ** (-b2) * (1.0 - w * t * z3) ** (-b3)

        v, er = integrate.quad(inner, 0.0, 1.0, weight="alg", wvar=(a2 - 1, e - 1),
                               epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)
        inner_err[0] = max(inner_err[0], abs(er))
        return (1.0 - u * z1) ** (-b1) * v

    val, err = integrate.quad(outer, 0.0, 1.0, weight="alg", wvar=(a1 - 1, c - a1 - 1),
                              epsabs=cfg.epsabs, epsrel=cfg.epsrel, limit=cfg.limit)
    norm = math.exp(gammaln(c) - gammaln(a1) - gammaln(a2) - gammaln(e))
    # inner errors pass through the outer weight (integral B(a1, c-a1))
    # times the largest value of the z1 factor on [0, 1]
    beta = math.exp(gammaln(a1) + gammaln(c - a1) - gammaln(c))
    peak = max(1.0, (1.0 - z1) ** (-b1))
    bound = abs(err) + inner_err[0] * beta * peak
    return NumericValue(val * norm, bound * norm)
