"""epsilon-expansion coefficients of F_D(a e; b e; 1 + c e; z) and Appell F3.

Coefficients are sums of multiple polylogarithms.  Arguments of the form
z_i/z_j are passed through their tail products, so no ratio is formed.
"""

from __future__ import annotations

import math

from ..errors import CoincidentArguments, ConvergenceGuard, UnsupportedOrderSlot
from .polylog import mpl_tails, nielsen_s12
from .series import NumericValue, SeriesConfig, _unpack_fd


class _Acc:
    """Running sum of coefficient * NumericValue."""

    def __init__(self):
        self.value = 0.0
        self.err = 0.0

    def add(self, coeff, nv):
        self.value += coeff * nv.value
        self.err += abs(coeff) * nv.est_error

    def result(self, scale=1.0):
        return NumericValue(scale * self.value, abs(scale) * self.err)


def _f(x):
    return float(x.offset) if hasattr(x, "offset") else float(x)


def _log1m(z, cfg):
    if not z < 1.0:
        raise ConvergenceGuard(f"ln(1 - z) needs z < 1, got {z}")
    if abs(z) > cfg.radius_guard:
        raise ConvergenceGuard(f"|z| = {abs(z)} exceeds the guard {cfg.radius_guard}")
    return math.log1p(-z)


def _slot_index(slot, r):
    """'value' or 0 -> 0; 'theta2' or 2 -> 2."""
    if slot in ("value", 0, None):
        return 0
    if isinstance(slot, str):
        if not slot.startswith("theta"):
            raise UnsupportedOrderSlot(f"unknown slot {slot!r}")
        slot = int(slot[5:])
    j = int(slot)
    if not 1 <= j <= r:
        raise UnsupportedOrderSlot(f"theta slot {j} out of range 1..{r}")
    return j


def omega_value(order, a, b, c, z, cfg):
    """omega_0^(order) for order 2 or 3."""
    r = len(b)
    L = lambda w, y: mpl_tails(w, y, cfg)
    acc = _Acc()
    if order == 2:
        for j in range(r):
            acc.add(b[j], L((2,), (z[j],)))
        return acc.result(a)
    if order == 3:
        for j in range(r):
            acc.add((a - c + b[j]) * b[j], nielsen_s12(z[j], cfg))
            acc.add(-c * b[j], L((3,), (z[j],)))
        for i in range(r):
            for j in range(i + 1, r):
                # Li_{1,2}(z_i/z_j, z_j) and Li_{1,2}(z_j/z_i, z_i)
                acc.add(b[i] * b[j], L((1, 2), (z[i], z[j])))
                acc.add(b[i] * b[j], L((1, 2), (z[j], z[i])))
        return acc.result(a)
    raise UnsupportedOrderSlot(f"value slot supports orders 2 and 3, not {order}")


def omega_theta(order, j, a, b, c, z, cfg):
    """omega_j^(order) for the theta_j slot, j 0-based."""
    r = len(b)
    L = lambda w, y: mpl_tails(w, y, cfg)
    if order == 2:
        lg = _log1m(z[j], cfg)
        return NumericValue(-a * b[j] * lg, abs(a * b[j] * lg) * 4e-16)
    if order == 3:
        lg = _log1m(z[j], cfg)
        acc = _Acc()
        acc.add(1.0, NumericValue(0.5 * (a + b[j] - c) * lg * lg, abs(lg * lg) * 4e-16))
        acc.add(-c, L((2,), (z[j],)))
        for k in range(r):
            if k != j:
                # Li_{1,1}(z_k/z_j, z_j)
                acc.add(b[k], L((1, 1), (z[k], z[j])))
        return acc.result(a * b[j])
    if order == 4:
        # move (b_j, z_j) to the front; F_D is symmetric under the swap
        perm = [j] + [k for k in range(r) if k != j]
        return _omega1_w4(a, [b[k] for k in perm], c, [z[k] for k in perm], cfg)
    raise UnsupportedOrderSlot(f"theta slot supports orders 2, 3 and 4, not {order}")


def _omega1_w4(a, b, c, z, cfg):
    """omega_1^(4): the two-variable form, then one difference per extra variable."""
    L = lambda w, y: mpl_tails(w, y, cfg)
    x = z[0]
    b1 = b[0]
    d1 = a - c + b1
    acc = _Acc()
    # part surviving at z_2 = ... = z_r = 0
    acc.add(d1 * d1, L((1, 1, 1), (x, x, x)))
    acc.add(a * b1 - c * d1, L((2, 1), (x, x)))
    acc.add(-c * d1, L((1, 2), (x, x)))
    acc.add(c * c, L((3,), (x,)))
    base = acc.result(a * b1)
    total = _Acc()
    total.add(1.0, base)
    for k in range(1, len(b)):
        total.add(a * b1 * b[k], _omega1_step(a, b, c, z, k, cfg))
    return total.result()


def _omega1_step(a, b, c, z, k, cfg):
    """[omega(z_1..z_k) - omega(z_1..z_{k-1}, 0)] / (a b_1 b_k), k 0-based.

    The stuffle relation has been used to drop Li_1(z_k/z_1), which would
    need |z_k| < |z_1|.
    """
    L = lambda w, y: mpl_tails(w, y, cfg)
    x, t = z[0], z[k]
    acc = _Acc()
    # Li_{1,1,1}(1, t/x, x), Li_{1,1,1}(t/x, 1, x), Li_{2,1}(t/x, x)
    l_1tx = L((1, 1, 1), (t, t, x))
    l_t1x = L((1, 1, 1), (t, x, x))
    acc.add(a - c, l_1tx)
    acc.add(a - c, l_t1x)
    acc.add(a - c, L((2, 1), (t, x)))
    acc.add(b[k], l_1tx)
    acc.add(-c, L((1, 2), (t, x)))
    # Li_{1,1,1}(x/t, t/x, x)
    acc.add(b[0], L((1, 1, 1), (x, t, x)))
    acc.add(b[0], l_t1x)
    for j in range(1, k):
        # Li_{1,1,1}(z_j/t, t/x, x) and Li_{1,1,1}(t/z_j, z_j/x, x)
        acc.add(b[j], L((1, 1, 1), (z[j], t, x)))
        acc.add(b[j], L((1, 1, 1), (t, z[j], x)))
    return acc.result()


def eps_coeffs_fd(order, slot, params, z, cfg=None):
    """omega coefficient of e^order for F_D(a e; b e; 1 + c e; z).

    slot is 'value' (or 0) for F_D itself and 'theta<j>' (or j) for theta_j F_D.
    """
    cfg = cfg or SeriesConfig()
    a, b, c = _unpack_fd(params)
    a, c = _f(a), _f(c)
    b = [_f(x) for x in b]
    z = [float(x) for x in z]
    if len(b) != len(z):
        raise ValueError("need one z per b parameter")
    j = _slot_index(slot, len(b))
    if j == 0:
        return omega_value(order, a, b, c, z, cfg)
    return omega_theta(order, j - 1, a, b, c, z, cfg)


def eps_coeffs_f3(z, params, cfg=None):
    """(e^2, e^3) coefficients of F3(a1 e, a2 e; b1 e, b2 e; 1 + c e; z1, z2)."""
    cfg = cfg or SeriesConfig()
    a1, a2, b1, b2, c = (_f(x) for x in params)
    z = [float(x) for x in z]
    if len(z) != 2:
        raise ValueError("F3 takes two arguments")
    two, three = _Acc(), _Acc()
    for aj, bj, zj in ((a1, b1, z[0]), (a2, b2, z[1])):
        two.add(aj * bj, mpl_tails((2,), (zj,), cfg))
        three.add(aj * bj * (aj + bj - c), nielsen_s12(zj, cfg))
        three.add(-aj * bj * c, mpl_tails((3,), (zj,), cfg))
    return two.result(), three.result()


def fd_one_one_two(z, tol=1e-12):
    """Closed form of F_D(1; 1, ..., 1; 2; z) as a divided difference of logs."""
    z = [float(x) for x in z]
    r = len(z)
    if r == 0:
        raise ValueError("need at least one argument")
    for i in range(r):
        if not abs(z[i]) < 1.0:
            raise ConvergenceGuard(f"|z_{i + 1}| must be below 1")
        for j in range(i + 1, r):
            if abs(z[i] - z[j]) <= tol * max(1.0, abs(z[i])):
                raise CoincidentArguments(f"z_{i + 1} and z_{j + 1} coincide")
    if r == 1:
        x = z[0]
        if x == 0.0:
            return NumericValue(1.0, 0.0)
        v = -math.log1p(-x) / x
        return NumericValue(v, abs(v) * 4e-16)
    total, mag = 0.0, 0.0
    for i in range(r):
        den = 1.0
        for j in range(r):
            if j != i:
                den *= z[i] - z[j]
        term = -z[i] ** (r - 2) / den * math.log1p(-z[i])
        total += term
        mag += abs(term)
    return NumericValue(total, mag * r * 4e-16)
