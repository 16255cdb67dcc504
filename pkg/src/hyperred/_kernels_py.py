"""Pure-Python kernels.  Same algorithms as the compiled module.

These also accept arbitrary number types (mpmath, Fraction), which the
extended-precision series path relies on.
"""

from heapq import heapify, heappop, heappush


def poly_mul(a, b):
    """Product of two packed-key term dicts."""
    if len(a) > len(b):
        a, b = b, a
    out = {}
    get = out.get
    bi = list(b.items())
    for ka, ca in a.items():
        for kb, cb in bi:
            k = ka + kb
            out[k] = get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def poly_divexact(p, f, guard, ctx):
    """Exact quotient p/f over Z as a SparsePoly, or None."""
    from .symcore import SparsePoly

    lk = max(f)
    lc = f[lk]
    rest = [(k, c) for k, c in f.items() if k != lk]
    rem = dict(p)
    heap = [-k for k in rem]
    heapify(heap)
    q = {}
    while heap:
        k = -heappop(heap)
        c = rem.pop(k, 0)
        if not c:
            continue
        if ((k | guard) - lk) & guard != guard:
            return None
        if type(c) is not int or type(lc) is not int:
            qc = c / lc
            if getattr(qc, "denominator", 1) != 1:
                return None
            qc = int(qc)
        else:
            qc, r = divmod(c, lc)
            if r:
                return None
        qk = k - lk
        q[qk] = qc
        for fk, fc in rest:
            kk = qk + fk
            v = rem.get(kk)
            if v is None:
                rem[kk] = -qc * fc
                heappush(heap, -kk)
            else:
                rem[kk] = v - qc * fc
    return SparsePoly(ctx, q)


def fd_shell_sums(W, N):
    """Shell sums h[n] = sum over |m| = n of prod_j W[j][m_j], and their abs sums."""
    r = len(W)
    zero = W[0][0] * 0
    h = [zero] * (N + 1)
    habs = [abs(zero)] * (N + 1)

    def rec(j, rem, prod, used):
        row = W[j]
        if j == r - 1:
            for m in range(rem + 1):
                t = prod * row[m]
                h[used + m] += t
                habs[used + m] += abs(t)
            return
        for m in range(rem + 1):
            p = prod * row[m]
            if p:
                rec(j + 1, rem - m, p, used + m)

    rec(0, N, W[0][0] * 0 + 1, 0)
    return h, habs


def fs_shell_sums(W1, W2, W3, A2, N):
    """Shell sums of W1[m1] A2[m2+m3] W2[m2] W3[m3] over m1+m2+m3 = n."""
    zero = W1[0] * 0
    h = [zero] * (N + 1)
    habs = [abs(zero)] * (N + 1)
    for m2 in range(N + 1):
        for m3 in range(N - m2 + 1):
            t23 = A2[m2 + m3] * W2[m2] * W3[m3]
            if not t23:
                continue
            base = m2 + m3
            for m1 in range(N - base + 1):
                t = t23 * W1[m1]
                h[base + m1] += t
                habs[base + m1] += abs(t)
    return h, habs
