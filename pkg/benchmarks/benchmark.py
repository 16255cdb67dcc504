"""Compiled vs pure-Python kernels.

    python benchmarks/benchmark.py [--repeat 5]

Times each kernel on both implementations with identical inputs, then an
end-to-end reduction and series evaluation with each backend selected
through HYPERRED_PURE_PYTHON in a child process.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hyperred import _kernels_py, kernels
from hyperred.symcore import Context, parse_poly


def _poly_inputs():
    ctx = Context(("a", "b", "c"), ("z1", "z2", "z3"))
    p = parse_poly("(1 + a*z1 - b*z2 + c*z3 - a*b*z1*z2)^4", ctx)
    q = parse_poly("(a - c + z1*z3 - 2*b*z2 + 3)^4", ctx)
    return ctx, p, q


def _cases():
    ctx, p, q = _poly_inputs()
    prod = p * q
    rng = np.random.default_rng(0)
    W3 = rng.uniform(-0.5, 0.5, (3, 61))
    W4 = rng.uniform(-0.5, 0.5, (4, 41))
    V = [rng.uniform(-0.5, 0.5, 61) for _ in range(4)]
    return {
        "poly_mul": lambda k: k.poly_mul(p.terms, q.terms),
        "poly_divexact": lambda k: k.poly_divexact(prod.terms, q.terms, ctx.guard, ctx),
        "fd_shell_sums r=3 N=60": lambda k: k.fd_shell_sums(W3 if k is not _kernels_py else W3.tolist(), 60),
        "fd_shell_sums r=4 N=40": lambda k: k.fd_shell_sums(W4 if k is not _kernels_py else W4.tolist(), 40),
        "fs_shell_sums N=60": lambda k: k.fs_shell_sums(V[0], list(V[1]), list(V[2]), V[3], 60),
    }


END_TO_END = (
    "import time\n"
    "from hyperred import FsParams, fs_index_change, FdParams, fd_index_change\n"
    "from hyperred.numerics.series import fd_series, fs_series\n"
    "t = time.perf_counter()\n"
    "fs_index_change((1, 0, 0, 0, 1, 2), FsParams('a1', 'a2', ('b1', 'b2', 'b3'), 'c'))\n"
    "fd_index_change((-1, (0, 1, 0, 0, -1), 0), FdParams('a', ('b1', 'b2', 'b3', 'b4', 'b5'), 'c'))\n"
    "t1 = time.perf_counter()\n"
    "for _ in range(20):\n"
    "    fd_series((0.3, [0.2, 0.4, -0.1, 0.25], 1.7), [0.2, 0.3, 0.1, 0.25])\n"
    "    fs_series((0.3, 0.4, [0.2, 0.5, 0.1], 2.2), [0.2, 0.1, 0.3])\n"
    "t2 = time.perf_counter()\n"
    "print(t1 - t, t2 - t1)\n"
)


def _child(pure):
    env = dict(os.environ)
    if pure:
        env["HYPERRED_PURE_PYTHON"] = "1"
    else:
        env.pop("HYPERRED_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                         text=True, check=True)
    return [float(x) for x in out.stdout.split()]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if kernels.compiled_impl is None:
        print("compiled kernels are not built; only the Python times are shown")
    print(f"{'kernel':28s} {'compiled ms':>12s} {'python ms':>12s} {'speedup':>8s}")
    for name, fn in _cases().items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if kernels.compiled_impl is not None:
            ck = min(timeit.repeat(lambda: fn(kernels.compiled_impl), number=1,
                                   repeat=args.repeat)) * 1e3
            print(f"{name:28s} {ck:12.2f} {py:12.2f} {py / ck:7.1f}x")
        else:
            print(f"{name:28s} {'-':>12s} {py:12.2f}")

    print()
    print(f"{'end to end':28s} {'compiled s':>12s} {'python s':>12s} {'speedup':>8s}")
    fast = _child(False) if kernels.compiled_impl is not None else None
    slow = _child(True)
    for i, label in enumerate(("reductions (ex. 3 and 5)", "40 series evaluations")):
        if fast:
            print(f"{label:28s} {fast[i]:12.3f} {slow[i]:12.3f} {slow[i] / fast[i]:7.1f}x")
        else:
            print(f"{label:28s} {'-':>12s} {slow[i]:12.3f}")


if __name__ == "__main__":
    main()
