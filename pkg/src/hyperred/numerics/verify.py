"""Numeric check of a symbolic reduction against the series.

For F(source) = sum_k A_k theta^(k) F(target) the residual is
|lhs - rhs| / |lhs| with both sides from the truncated series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import SingularPoint
from ..symcore import eval_ratfun
from .series import (
    SeriesConfig,
    fd_diff_series,
    fs_diff_series,
    mono_to_indices,
)

LOCUS_TOL = 1e-9


@dataclass(frozen=True)
class Residual:
    residual: float
    lhs: float
    rhs: float
    est_error: float


def fd_singular(z, tol=LOCUS_TOL):
    """Raise SingularPoint on z_i in {0, 1} or z_i = z_j."""
    z = [float(t) for t in z]
    for i, zi in enumerate(z):
        if abs(zi) < tol or abs(zi - 1.0) < tol:
            raise SingularPoint(f"z{i + 1} = {zi} lies on the singular locus")
        for j in range(i + 1, len(z)):
            if abs(zi - z[j]) < tol:
                raise SingularPoint(f"z{i + 1} = z{j + 1} lies on the singular locus")


def fs_singular(z, tol=LOCUS_TOL):
    """F_S locus: z_i in {0, 1}, z2 = z3, z1 + z_i = z1 z_i for i = 2, 3."""
    z1, z2, z3 = (float(t) for t in z)
    for i, zi in enumerate((z1, z2, z3)):
        if abs(zi) < tol or abs(zi - 1.0) < tol:
            raise SingularPoint(f"z{i + 1} = {zi} lies on the singular locus")
    if abs(z2 - z3) < tol:
        raise SingularPoint("z2 = z3 lies on the singular locus")
    for i, zi in ((2, z2), (3, z3)):
        if abs(z1 + zi - z1 * zi) < tol:
            raise SingularPoint(f"z1 + z{i} = z1 z{i} lies on the singular locus")


def _numeric(expr, values):
    v = expr.evaluate(values)
    return Fraction(v) if isinstance(v, (int, Fraction)) else float(v)


def _coeff_values(red, values, z):
    assignment = {k: Fraction(v) if isinstance(v, (int, Fraction)) else v
                  for k, v in values.items()}
    for i, t in enumerate(z):
        assignment[f"z{i + 1}"] = Fraction(t)
    return [float(eval_ratfun(c, assignment)) for c in red.coeffs]


def _residual(lhs, pieces):
    rhs = sum(a * v.value for a, v in pieces)
    err = lhs.est_error + sum(abs(a) * v.est_error for a, v in pieces)
    scale = abs(lhs.value) or 1.0
    return Residual(abs(lhs.value - rhs) / scale, lhs.value, rhs, err / scale)


def fd_reduction_residual(red, values, z, cfg=None):
    """Residual of an FdReduction with atoms substituted from values."""
    cfg = cfg or SeriesConfig()
    fd_singular(z)
    src, tgt = red.source, red.target
    p_src = (_numeric(src.a, values), [_numeric(b, values) for b in src.b], _numeric(src.c, values))
    p_tgt = (_numeric(tgt.a, values), [_numeric(b, values) for b in tgt.b], _numeric(tgt.c, values))
    lhs = fd_diff_series((), p_src, z, cfg)
    coeffs = _coeff_values(red, values, z)
    pieces = [(a, fd_diff_series(mono_to_indices(m), p_tgt, z, cfg))
              for a, m in zip(coeffs, red.basis)]
    return _residual(lhs, pieces)


def fs_reduction_residual(red, values, z, cfg=None):
    """Residual of an FsReduction with atoms substituted from values."""
    cfg = cfg or SeriesConfig()
    fs_singular(z)

    def num(p):
        return (_numeric(p.a1, values), _numeric(p.a2, values),
                [_numeric(b, values) for b in p.b], _numeric(p.c, values))

    lhs = fs_diff_series((), num(red.source), z, cfg)
    coeffs = _coeff_values(red, values, z)
    p_tgt = num(red.target)
    pieces = [(a, fs_diff_series(mono_to_indices(m), p_tgt, z, cfg))
              for a, m in zip(coeffs, red.basis)]
    return _residual(lhs, pieces)


def reduction_residual(red, values, z, cfg=None):
    if hasattr(red.source, "a1"):
        return fs_reduction_residual(red, values, z, cfg)
    return fd_reduction_residual(red, values, z, cfg)
