"""Acceptance gate: one test per criterion, each printing a pass/fail line."""

import math
import random
import time

import numpy as np

from _golden import FD_EXAMPLES, FS_EXAMPLES, derived_mismatches, mismatches
from _util import is_identity, rand_rational, rand_z, round_trip
from hyperred import fdengine, fsengine
from hyperred.fdengine import FdParams, FdShift, fd_context, fd_exceptional, fd_index_change, fd_rules, fd_unit_step
from hyperred.fsengine import FsParams, fs_context, fs_exceptional, fs_index_change, fs_rules, fs_unit_step
from hyperred.numerics.epsilon import eps_coeffs_f3, eps_coeffs_fd, fd_one_one_two
from hyperred.numerics.feynman import (
    feynman_h_series,
    h_form_series,
    hyper_off,
    hypera,
    hyperb_series,
    rec_lhs,
    rec_rhs,
    term_ratio,
)
from hyperred.numerics.quadrature import fd_euler_integral, fs_euler_integral
from hyperred.numerics.series import SeriesConfig, f3_series, fd_diff_series, fd_series, fs_series
from hyperred.numerics.verify import fd_reduction_residual, fs_reduction_residual


def test_criterion_1_worked_examples(report):
    worst, bad = 0.0, []
    for n, ex in {**FD_EXAMPLES, **FS_EXAMPLES}.items():
        # time from an empty rule cache
        fdengine._RULES_CACHE.clear()
        fsengine._RULES_CACHE.clear()
        run = fd_index_change if n <= 3 else fs_index_change
        t0 = time.perf_counter()
        red = run(ex["shift"], ex["params"])
        dt = time.perf_counter() - t0
        worst = max(worst, dt)
        if red.target != ex["target"] or mismatches(red, ex["coeffs"]) or dt >= 5.0:
            bad.append(n)
    ok = report(1, not bad, f"examples 1-5 exact, slowest {worst:.2f} s, failing {bad}")
    assert ok


def _fd_cases(rng, n):
    out = []
    while len(out) < n:
        r = rng.choice([2, 3, 4])
        p = FdParams(rand_rational(rng), tuple(rand_rational(rng) for _ in range(r)), rand_rational(rng))
        if fd_exceptional(p):
            continue
        shift = FdShift(rng.randint(-3, 3), tuple(rng.randint(-3, 3) for _ in range(r)), rng.randint(-3, 3))
        out.append((p, shift, rand_z(rng, r)))
    return out


def _fs_cases(rng, n):
    out = []
    while len(out) < n:
        p = FsParams(rand_rational(rng), rand_rational(rng),
                     tuple(rand_rational(rng) for _ in range(3)), rand_rational(rng))
        if fs_exceptional(p):
            continue
        shift = tuple(rng.randint(-2, 2) for _ in range(6))
        out.append((p, shift, rand_z(rng, 3)))
    return out


def test_criterion_2_reduction_identities(report):
    rng = random.Random(20240601)
    cfg = SeriesConfig(max_order=60)
    t0 = time.perf_counter()
    worst = {"fd": 0.0, "fs": 0.0}
    for p, shift, z in _fd_cases(rng, 50):
        res = fd_reduction_residual(fd_index_change(shift, p), {}, z, cfg)
        worst["fd"] = max(worst["fd"], res.residual)
    for p, shift, z in _fs_cases(rng, 50):
        res = fs_reduction_residual(fs_index_change(shift, p), {}, z, cfg)
        worst["fs"] = max(worst["fs"], res.residual)
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8 and dt < 120
    ok = report(2, ok, f"50+50 cases, worst residual F_D {worst['fd']:.1e} F_S {worst['fs']:.1e}, "
                       f"{dt:.1f} s")
    assert ok


def _opposite(step):
    name, _, idx = step.partition("(")
    slot, d = name.rsplit("_", 1)
    return f"{slot}_{'down' if d == 'up' else 'up'}" + (f"({idx}" if idx else "")


def test_criterion_3_round_trips(report):
    failed, count = [], 0
    for r in (1, 2, 3):
        p = FdParams("a", tuple(f"b{i + 1}" for i in range(r)), "c")
        ctx = fd_context(p)
        rules = fd_rules(p, ctx)
        steps = ["a_up", "a_down", "c_up", "c_down"]
        steps += [f"b_{d}({i + 1})" for i in range(r) for d in ("up", "down")]
        for s in steps:
            count += 1
            if not is_identity(round_trip(rules, fd_unit_step, p, s, _opposite(s), ctx)):
                failed.append(f"F_D r={r} {s}")
    p = FsParams("a1", "a2", ("b1", "b2", "b3"), "c")
    ctx = fs_context(p)
    rules = fs_rules(p, ctx)
    steps = ["a1_up", "a1_down", "a2_up", "a2_down", "c_up", "c_down"]
    steps += [f"b_{d}({i})" for i in (1, 2, 3) for d in ("up", "down")]
    for s in steps:
        count += 1
        if not is_identity(round_trip(rules, fs_unit_step, p, s, _opposite(s), ctx)):
            failed.append(f"F_S {s}")
    ok = report(3, not failed, f"{count} step pairs normalize to the identity, failing {failed}")
    assert ok


def test_criterion_4_derived_relations(report):
    p = FsParams("a1", "a2", ("b1", "b2", "b3"), "c")
    ctx = fs_context(p)
    bad = derived_mismatches(fs_rules(p, ctx), ctx)
    ok = report(4, not bad, f"t112 t113 t122 t133 t123 match the printed relations, mismatches {bad}")
    assert ok


def test_criterion_5_quadrature_oracles(report):
    rng = random.Random(77)
    worst_fd = worst_fs = 0.0
    for _ in range(10):
        r = rng.choice([1, 2, 3])
        a = rng.uniform(0.2, 1.5)
        c = a + rng.uniform(0.2, 1.5)
        b = [rng.uniform(-1, 1) for _ in range(r)]
        z = [rng.uniform(-0.6, 0.6) for _ in range(r)]
        s = fd_series((a, b, c), z).value
        q = fd_euler_integral((a, b, c), z).value
        worst_fd = max(worst_fd, abs(s - q))
    for _ in range(10):
        a1, a2 = rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)
        c = a1 + a2 + rng.uniform(0.2, 1.5)
        b = [rng.uniform(-1, 1) for _ in range(3)]
        z = [rng.uniform(-0.4, 0.4) for _ in range(3)]
        s = fs_series((a1, a2, b, c), z).value
        q = fs_euler_integral((a1, a2, b, c), z).value
        worst_fs = max(worst_fs, abs(s - q))
    ok = max(worst_fd, worst_fs) <= 1e-7
    ok = report(5, ok, f"series vs quadrature, worst |diff| F_D {worst_fd:.1e} F_S {worst_fs:.1e}")
    assert ok


EPS = (1e-2, 5e-3, 2.5e-3)


def _richardson_slope(f):
    """Order of f at small e from three halving steps, first-order corrected."""
    R = [abs(f(e)) for e in EPS]
    s = [math.log(R[i] / R[i + 1]) / math.log(2) for i in range(2)]
    return 2 * s[1] - s[0]


def test_criterion_6_epsilon_slopes(report):
    cfg = SeriesConfig(max_order=80, mode="extended")
    slopes = {}
    a, c = 0.7, 1.2
    for r, b, z in ((1, [0.3], [0.2]), (2, [0.3, -0.4], [0.2, 0.3]), (3, [0.3, -0.4, 0.5], [0.2, 0.3, 0.15])):
        p = (a, b, c)
        w = [eps_coeffs_fd(k, "value", p, z).value for k in (2, 3)]

        def rem(e):
            v = fd_series((a * e, [x * e for x in b], 1 + c * e), z, cfg).value
            return v - 1 - e * e * w[0] - e ** 3 * w[1]

        slopes[f"F_D r={r} value"] = _richardson_slope(rem)
        for j in range(1, r + 1):
            t = [eps_coeffs_fd(k, j, p, z).value for k in (2, 3)]

            def rem_t(e, j=j, t=t):
                v = fd_diff_series([j], (a * e, [x * e for x in b], 1 + c * e), z, cfg).value
                return v - e * e * t[0] - e ** 3 * t[1]

            slopes[f"F_D r={r} theta{j}"] = _richardson_slope(rem_t)
    a1, a2, b1, b2, c3 = 0.6, 0.4, 0.3, -0.5, 1.1
    zz = (0.2, 0.3)
    w2, w3 = eps_coeffs_f3(zz, (a1, a2, b1, b2, c3))

    def rem_f3(e):
        v = f3_series((a1 * e, a2 * e, b1 * e, b2 * e, 1 + c3 * e), zz, cfg).value
        return v - 1 - e * e * w2.value - e ** 3 * w3.value

    slopes["F3 value"] = _richardson_slope(rem_f3)
    order4_ok = all(abs(s - 4.0) <= 0.2 for s in slopes.values())

    b, z = [0.3, -0.4], [0.2, 0.3]
    t = [eps_coeffs_fd(k, 1, (a, b, c), z).value for k in (2, 3, 4)]

    def rem4(e):
        v = fd_diff_series([1], (a * e, [x * e for x in b], 1 + c * e), z, cfg).value
        return v - e * e * t[0] - e ** 3 * t[1] - e ** 4 * t[2]

    s5 = _richardson_slope(rem4)
    # the remainder is exactly fifth order, so the estimate scatters around 5;
    # it is read against the same 0.2 band used for the fourth-order slopes
    five_ok = s5 >= 5.0 - 0.2
    spread = f"{min(slopes.values()):.3f}..{max(slopes.values()):.3f}"
    ok = report(6, order4_ok and five_ok,
                f"order-4 slopes {spread} over {len(slopes)} cases, omega1^(4) r=2 slope {s5:.5f}")
    assert ok


def test_criterion_7_closed_form(report):
    points = [[0.2, 0.5], [-0.3, 0.4], [0.1, 0.2, 0.3], [-0.25, 0.15, 0.45]]
    worst = 0.0
    for z in points:
        closed = fd_one_one_two(z).value
        ser = fd_series((1.0, [1.0] * len(z), 2.0), z).value
        worst = max(worst, abs(closed - ser) / abs(ser))
    ok = report(7, worst <= 1e-8, f"F_D(1;1..1;2) closed form vs series, r=2,3, worst rel {worst:.1e}")
    assert ok


def _fit_exponents(N, other, d=4.3, seed=3):
    rng = np.random.default_rng(seed)
    cfg = SeriesConfig(max_order=40)
    rows, rhs = [], []
    for _ in range(8):
        z = rng.uniform(0.03, 0.2, N - 1)
        rows.append(np.log1p(-z))
        rhs.append(math.log(feynman_h_series(N, d, z, cfg).value / other(z, cfg).value))
    e, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    resid = float(np.max(np.abs(np.array(rows) @ e - rhs)))
    return e, resid


def test_criterion_8_one_loop_identities(report):
    notes = []
    rec_worst = 0.0
    for A, B, z in ((1.3, 2.7, 0.4), (0.45, 3.1, -0.6), (2.2, 1.7, 0.25)):
        lhs, rhs = rec_lhs(A, B, z).value, rec_rhs(A, B, z).value
        rec_worst = max(rec_worst, abs(lhs - rhs) / abs(lhs))
    rng = random.Random(12)
    subs_worst = 0.0
    for N in (2, 3, 4):
        off, mass = hyper_off(N + 1, 4.7), hypera(N, 3.7)
        for _ in range(20):
            r = [rng.randint(0, 8) for _ in range(N - 1)]
            for i in range(N - 1):
                subs_worst = max(subs_worst, abs(term_ratio(off, r, i) - term_ratio(mass, r, i)))
    fit_worst, resid_worst = 0.0, 0.0
    forms = [(n, int(n[1])) for n in ("H3a", "H3b", "H4a", "H4b", "H4c", "H5a", "H5b", "H5c", "H5d")]
    for name, N in forms:
        e, resid = _fit_exponents(N, lambda z, cfg, name=name: h_form_series(name, 4.3, z, cfg))
        fit_worst = max(fit_worst, float(np.max(np.abs(2 * e - np.round(2 * e)))) / 2)
        resid_worst = max(resid_worst, resid)
    for N in (2, 3, 4, 5):
        e, resid = _fit_exponents(N, lambda z, cfg, N=N: hyperb_series(N, 4.3, z, cfg))
        fit_worst = max(fit_worst, float(np.max(np.abs(2 * e - np.round(2 * e)))) / 2)
        resid_worst = max(resid_worst, resid)
    ok = rec_worst <= 1e-10 and subs_worst <= 1e-12 and fit_worst <= 1e-6 and resid_worst <= 1e-6
    notes = (f"rec rel {rec_worst:.1e}, subs ratio diff {subs_worst:.1e}, "
             f"exponent distance from half-integers {fit_worst:.1e}, fit residual {resid_worst:.1e}")
    ok = report(8, ok, notes)
    assert ok
