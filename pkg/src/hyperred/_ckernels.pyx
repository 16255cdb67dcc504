# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: sparse polynomial products and hypergeometric shell sums."""

import numpy as np
from heapq import heapify, heappop, heappush
from libc.math cimport fabs


def poly_mul(dict a, dict b):
    """Product of two packed-key term dicts."""
    cdef list ka, ca, kb, cb
    cdef Py_ssize_t i, j, na, nb
    cdef dict out = {}
    cdef object k, x, v
    if len(a) > len(b):
        a, b = b, a
    ka = list(a.keys()); ca = list(a.values())
    kb = list(b.keys()); cb = list(b.values())
    na = len(ka); nb = len(kb)
    for i in range(na):
        k0 = ka[i]
        c0 = ca[i]
        for j in range(nb):
            k = k0 + kb[j]
            x = c0 * cb[j]
            v = out.get(k)
            if v is None:
                out[k] = x
            else:
                out[k] = v + x
    return {k: v for k, v in out.items() if v}


def poly_divexact(dict p, dict f, object guard, ctx):
    """Exact quotient p/f over Z as a SparsePoly, or None."""
    from .symcore import SparsePoly
    cdef object lk = max(f)
    cdef object lc = f[lk]
    cdef list rk = [k for k in f if k != lk]
    cdef list rc = [f[k] for k in rk]
    cdef Py_ssize_t i, nr = len(rk)
    cdef dict rem = dict(p)
    cdef dict q = {}
    cdef list heap = [-k for k in rem]
    cdef object k, c, qc, r, qk, kk, v
    heapify(heap)
    while heap:
        k = -heappop(heap)
        c = rem.pop(k, 0)
        if not c:
            continue
        if ((k | guard) - lk) & guard != guard:
            return None
        qc, r = divmod(c, lc)
        if r:
            return None
        qk = k - lk
        q[qk] = qc
        for i in range(nr):
            kk = qk + rk[i]
            v = rem.get(kk)
            if v is None:
                rem[kk] = -qc * rc[i]
                heappush(heap, -kk)
            else:
                rem[kk] = v - qc * rc[i]
    return SparsePoly(ctx, q)


cdef void _fd_rec(double[:, ::1] W, int j, int r, int rem, double prod, int used,
                  double[::1] h, double[::1] habs) noexcept nogil:
    cdef int m
    cdef double p
    if j == r - 1:
        for m in range(rem + 1):
            p = prod * W[j, m]
            h[used + m] += p
            habs[used + m] += fabs(p)
        return
    for m in range(rem + 1):
        p = prod * W[j, m]
        if p != 0.0:
            _fd_rec(W, j + 1, r, rem - m, p, used + m, h, habs)


def fd_shell_sums(W, int N):
    """Shell sums h[n] = sum over |m| = n of prod_j W[j][m_j], and their abs sums."""
    cdef double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    h = np.zeros(N + 1)
    habs = np.zeros(N + 1)
    cdef double[::1] hv = h
    cdef double[::1] av = habs
    cdef int r = Wv.shape[0]
    with nogil:
        _fd_rec(Wv, 0, r, N, 1.0, 0, hv, av)
    return h, habs


def fs_shell_sums(W1, W2, W3, A2, int N):
    """Shell sums of W1[m1] A2[m2+m3] W2[m2] W3[m3] over m1+m2+m3 = n."""
    cdef double[::1] w1 = np.ascontiguousarray(W1, dtype=np.float64)
    cdef double[::1] w2 = np.ascontiguousarray(W2, dtype=np.float64)
    cdef double[::1] w3 = np.ascontiguousarray(W3, dtype=np.float64)
    cdef double[::1] a2 = np.ascontiguousarray(A2, dtype=np.float64)
    h = np.zeros(N + 1)
    habs = np.zeros(N + 1)
    cdef double[::1] hv = h
    cdef double[::1] av = habs
    cdef int m1, m2, m3, base
    cdef double t23, t
    with nogil:
        for m2 in range(N + 1):
            for m3 in range(N - m2 + 1):
                t23 = a2[m2 + m3] * w2[m2] * w3[m3]
                if t23 == 0.0:
                    continue
                base = m2 + m3
                for m1 in range(N - base + 1):
                    t = t23 * w1[m1]
                    hv[base + m1] += t
                    av[base + m1] += fabs(t)
    return h, habs
