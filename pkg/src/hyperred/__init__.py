"""Differential reduction of the Lauricella functions F_D and F_S."""

from .errors import *  # noqa: F401,F403
from .fdengine import (
    FdParams,
    FdReduction,
    FdShift,
    fd_basis,
    fd_exceptional,
    fd_index_change,
    fd_rules,
    fd_unit_step,
)
from .fsengine import (
    FS_BASIS,
    FsParams,
    FsReduction,
    FsShift,
    d_factors,
    fs_exceptional,
    fs_index_change,
    fs_rules,
    fs_unit_step,
)
from .kernels import BACKEND
from .symcore import (
    Context,
    ParamExpr,
    RatFun,
    SparsePoly,
    eval_ratfun,
    parse_param,
    parse_poly,
    parse_ratfun,
    poly_arith,
    ratfun_equal,
    theta_deriv,
)
from .thetaexpr import RewriteSystem, ThetaExpr, apply_theta, compose, rewrite_to_basis

__version__ = "0.1.0"
