"""Kernel selection.

The compiled module is used when it imports; set HYPERRED_PURE_PYTHON=1 to
force the fallback (the benchmark and the parity tests do this).
"""

import os

from . import _kernels_py as python_impl

try:
    if os.environ.get("HYPERRED_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from . import _ckernels as compiled_impl
except ImportError:
    compiled_impl = None

_impl = compiled_impl if compiled_impl is not None else python_impl
BACKEND = "cython" if compiled_impl is not None else "python"

poly_mul = _impl.poly_mul
poly_divexact = _impl.poly_divexact
fd_shell_sums = _impl.fd_shell_sums
fs_shell_sums = _impl.fs_shell_sums
