"""Truncated series for F_D and F_S and their theta-derivatives.

Terms are grouped into shells of fixed total order |m| = n.  The shell sums
come from the selected kernel backend; the Pochhammer ratio of the shell is
applied afterwards.  The error estimate is a geometric tail bound from the
last shell plus a rounding term.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .. import _kernels_py, kernels
from ..errors import PoleInPochhammer, RadiusExceeded
from ..symcore import ParamExpr

EPS = np.finfo(float).eps
EXTENDED_DPS = 40


def default_order():
    env = os.environ.get("HYPERRED_MAX_ORDER")
    return int(env) if env else 60


@dataclass(frozen=True)
class SeriesConfig:
    max_order: int = field(default_factory=default_order)
    radius_guard: float = 0.9
    mode: str = "float64"

    def __post_init__(self):
        if self.max_order < 1:
            raise ValueError("max_order must be at least 1")
        if not 0 < self.radius_guard < 1:
            raise ValueError("radius_guard must lie in (0, 1)")
        if self.mode not in ("float64", "extended"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class NumericValue:
    value: float
    est_error: float

    def __post_init__(self):
        if not self.est_error >= 0:
            raise ValueError("est_error must be non-negative")

    def __float__(self):
        return float(self.value)


def _number(x, extended):
    if isinstance(x, ParamExpr):
        if not x.is_numeric():
            raise ValueError(f"parameter {x} is symbolic")
        x = x.offset
    if extended:
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)
    return float(x)


def _unpack_fd(params):
    if hasattr(params, "b") and hasattr(params, "a"):
        return params.a, list(params.b), params.c
    a, b, c = params
    return a, list(b), c


def _unpack_fs(params):
    if hasattr(params, "a1"):
        return params.a1, params.a2, list(params.b), params.c
    a1, a2, b, c = params
    return a1, a2, list(b), c


def _check_radius(z, cfg):
    m = max((abs(float(x)) for x in z), default=0.0)
    if m > cfg.radius_guard:
        raise RadiusExceeded(f"max |z| = {m} exceeds the guard {cfg.radius_guard}")
    return m


def _check_pole(c, N):
    cf = float(c)
    if cf <= 0 and cf == int(cf) and -cf < N:
        raise PoleInPochhammer(f"(c)_n vanishes for c = {c} within order {N}")


def _weights(b, z, k, N, extended):
    """(b)_m z^m / m! * m^k for m = 0..N."""
    if extended:
        row = [mpmath.mpf(1)]
        for m in range(N):
            row.append(row[-1] * (b + m) * z / (m + 1))
        if k:
            row = [v * m ** k for m, v in enumerate(row)]
        return row
    row = np.empty(N + 1)
    row[0] = 1.0
    for m in range(N):
        row[m + 1] = row[m] * (b + m) * z / (m + 1)
    if k:
        row *= np.arange(N + 1, dtype=float) ** k
    return row


def _ratio(a, c, N, extended):
    """(a)_n / (c)_n for n = 0..N."""
    out = [mpmath.mpf(1)] if extended else [1.0]
    for n in range(N):
        out.append(out[-1] * (a + n) / (c + n))
    return out if extended else np.array(out)


def _inv_poch(c, N, extended):
    """1 / (c)_n for n = 0..N."""
    out = [mpmath.mpf(1) if extended else 1.0]
    for n in range(N):
        out.append(out[-1] / (c + n))
    return out


def _finish(shells, abs_shells, rho, extended):
    """Sum the shells and bound the remainder."""
    if extended:
        total = mpmath.fsum(shells)
        shells = np.array([float(abs(x)) for x in shells])
        abs_shells = np.array([float(x) for x in abs_shells])
        unit = float(mpmath.mpf(10) ** (-EXTENDED_DPS + 5))
    else:
        total = 0.0
        for s in shells:
            total += s
        shells = np.abs(np.asarray(shells))
        abs_shells = np.asarray(abs_shells)
        unit = EPS
    N = len(shells) - 1
    last = abs_shells[N]
    prev = abs_shells[N - 1] if N >= 1 else 0.0
    if last == 0.0:
        tail = 0.0
    else:
        q = max(rho, last / prev if prev else 1.0)
        tail = float("inf") if q >= 1.0 else last * q / (1.0 - q)
    rounding = 8.0 * unit * float(np.sum(abs_shells)) * max(1.0, np.log2(N + 1))
    return NumericValue(float(total), float(tail + rounding))


def _indices_to_powers(which, r):
    k = [0] * r
    for i in which:
        if not 1 <= i <= r:
            raise ValueError(f"variable index {i} out of range 1..{r}")
        k[i - 1] += 1
    return k


def fd_diff_series(which, params, z, cfg=None):
    """theta-differentiated F_D series; which lists 1-based indices (repeats allowed)."""
    cfg = cfg or SeriesConfig()
    ext = cfg.mode == "extended"
    a, b, c = _unpack_fd(params)
    r = len(b)
    if len(z) != r:
        raise ValueError("need one z per b parameter")
    N = cfg.max_order
    rho = _check_radius(z, cfg)
    _check_pole(_number(c, False), N + 1)
    k = _indices_to_powers(which, r)
    with mpmath.workdps(EXTENDED_DPS):
        a, c = _number(a, ext), _number(c, ext)
        b = [_number(x, ext) for x in b]
        zz = [_number(x, ext) for x in z]
        W = [_weights(b[j], zz[j], k[j], N, ext) for j in range(r)]
        if ext:
            h, habs = _kernels_py.fd_shell_sums(W, N)
        else:
            h, habs = kernels.fd_shell_sums(np.array(W), N)
        A = _ratio(a, c, N, ext)
        shells = [A[n] * h[n] for n in range(N + 1)]
        abs_shells = [abs(A[n]) * habs[n] for n in range(N + 1)]
        return _finish(shells, abs_shells, rho, ext)


def fd_series(params, z, cfg=None):
    """Lauricella F_D^(r)(a; b; c; z) truncated at total order max_order."""
    return fd_diff_series((), params, z, cfg)


def fs_diff_series(which, params, z, cfg=None):
    """theta-differentiated F_S series; which lists 1-based indices in 1..3."""
    cfg = cfg or SeriesConfig()
    ext = cfg.mode == "extended"
    a1, a2, b, c = _unpack_fs(params)
    if len(b) != 3 or len(z) != 3:
        raise ValueError("F_S takes three b parameters and three arguments")
    N = cfg.max_order
    rho = _check_radius(z, cfg)
    _check_pole(_number(c, False), N + 1)
    k = _indices_to_powers(which, 3)
    with mpmath.workdps(EXTENDED_DPS):
        a1, a2, c = (_number(x, ext) for x in (a1, a2, c))
        b = [_number(x, ext) for x in b]
        zz = [_number(x, ext) for x in z]
        # (a1)_m is folded into the z1 weights
        W1 = _weights(b[0], zz[0], k[0], N, ext)
        W1 = [W1[m] * _poch(a1, m, ext) for m in range(N + 1)]
        W2 = _weights(b[1], zz[1], k[1], N, ext)
        W3 = _weights(b[2], zz[2], k[2], N, ext)
        P2 = [_poch(a2, m, ext) for m in range(N + 1)]
        if ext:
            h, habs = _kernels_py.fs_shell_sums(W1, W2, W3, P2, N)
        else:
            h, habs = kernels.fs_shell_sums(np.array(W1), W2, W3, np.array(P2), N)
        inv_c = _inv_poch(c, N, ext)
        shells = [inv_c[n] * h[n] for n in range(N + 1)]
        abs_shells = [abs(inv_c[n]) * habs[n] for n in range(N + 1)]
        return _finish(shells, abs_shells, rho, ext)


def _poch(x, m, ext):
    out = mpmath.mpf(1) if ext else 1.0
    for j in range(m):
        out *= x + j
    return out


def fs_series(params, z, cfg=None):
    """Lauricella-Saran F_S truncated at total order max_order."""
    return fs_diff_series((), params, z, cfg)


def mono_to_indices(mono):
    """(1, 0, 2) -> [1, 3, 3]."""
    out = []
    for i, e in enumerate(mono):
        out.extend([i + 1] * e)
    return out


def f3_diff_series(which, params, z, cfg=None):
    """theta-differentiated Appell F3(a1, a2; b1, b2; c; x, y)."""
    cfg = cfg or SeriesConfig()
    ext = cfg.mode == "extended"
    a1, a2, b1, b2, c = params
    if len(z) != 2:
        raise ValueError("F3 takes two arguments")
    N = cfg.max_order
    rho = _check_radius(z, cfg)
    _check_pole(_number(c, False), N + 1)
    k = _indices_to_powers(which, 2)
    with mpmath.workdps(EXTENDED_DPS):
        a1, a2, b1, b2, c = (_number(x, ext) for x in (a1, a2, b1, b2, c))
        x, y = (_number(t, ext) for t in z)
        W1 = _weights(b1, x, k[0], N, ext)
        W1 = [W1[m] * _poch(a1, m, ext) for m in range(N + 1)]
        W2 = _weights(b2, y, k[1], N, ext)
        W2 = [W2[m] * _poch(a2, m, ext) for m in range(N + 1)]
        if ext:
            h, habs = _kernels_py.fd_shell_sums([W1, W2], N)
        else:
            h, habs = kernels.fd_shell_sums(np.array([W1, W2]), N)
        inv_c = _inv_poch(c, N, ext)
        shells = [inv_c[n] * h[n] for n in range(N + 1)]
        abs_shells = [abs(inv_c[n]) * habs[n] for n in range(N + 1)]
        return _finish(shells, abs_shells, rho, ext)


def f3_series(params, z, cfg=None):
    """Appell F3 truncated at total order max_order."""
    return f3_diff_series((), params, z, cfg)
