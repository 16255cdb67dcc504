"""Command-line front end.

    hyperred fd-reduce --shift "[-1,[1,-1,0],0]" --params "[a,[b1,b2,b3],c]"
    hyperred fs-eval --params "[0.5,0.2,[0.25,0.2,1/6],3]" --z "[0.2,0.1,0.15]"
    hyperred batch < requests.jsonl

Exit codes: 0 ok, 2 usage, 3 exceptional parameters, 4 numeric guard,
1 anything else.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction

from .errors import (
    DegenerateInput,
    DenominatorVanishes,
    ExceptionalStep,
    HyperredError,
    NumericGuard,
    ParseError,
    UnsupportedOrderSlot,
)
from .fdengine import FdParams, FdShift, fd_exceptional, fd_index_change
from .fsengine import FsParams, FsShift, fs_exceptional, fs_index_change
from .numerics import epsilon, feynman, series
from .numerics.verify import reduction_residual
from .symcore import format_ratfun, parse_param
from .thetaexpr import format_mono, format_theta

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_EXCEPTIONAL, EXIT_NUMERIC = 0, 1, 2, 3, 4

COMMANDS = ("fd-reduce", "fs-reduce", "fd-eval", "fs-eval", "fd-diff-eval", "fs-diff-eval",
            "eps-fd", "eps-f3", "check-exceptional", "feynman-eval")
HELP = {
    "fd-reduce": "reduce F_D(params + shift) to the F_D basis",
    "fs-reduce": "reduce F_S(params + shift) to the F_S basis",
    "fd-eval": "evaluate F_D by its series",
    "fs-eval": "evaluate F_S by its series",
    "fd-diff-eval": "evaluate theta derivatives of F_D",
    "fs-diff-eval": "evaluate theta derivatives of F_S",
    "eps-fd": "epsilon expansion of F_D",
    "eps-f3": "epsilon expansion of Appell F3",
    "check-exceptional": "list exceptional parameter conditions",
    "feynman-eval": "evaluate a one-loop Feynman-diagram form",
}


class UsageError(Exception):
    code = "usage"


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# nested list syntax: [a, [b1, b2], c-1]


def parse_nested(text):
    """Split a bracketed list into nested Python lists of leaf strings."""
    text = text.strip()
    pos = 0

    def parse_list():
        nonlocal pos
        assert text[pos] == "["
        pos += 1
        out = []
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                raise ParseError("unterminated list")
            if text[pos] == "]":
                pos += 1
                return out
            if text[pos] == "[":
                out.append(parse_list())
            else:
                start = pos
                while pos < len(text) and text[pos] not in ",]":
                    pos += 1
                leaf = text[start:pos].strip()
                if not leaf:
                    raise ParseError("empty list entry")
                out.append(leaf)
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos < len(text) and text[pos] == ",":
                pos += 1

    if not text.startswith("["):
        raise ParseError(f"expected a bracketed list, got {text!r}")
    out = parse_list()
    if text[pos:].strip():
        raise ParseError(f"trailing text after list: {text[pos:]!r}")
    return out


def _leaf(x):
    if isinstance(x, list):
        raise ParseError("expected a scalar entry, got a list")
    return x


def _int(x):
    v = parse_param(_leaf(x))
    if not v.is_integer():
        raise ParseError(f"shift entries must be integers, got {x}")
    return int(v.offset)


def _number(x):
    v = parse_param(_leaf(x))
    if not v.is_numeric():
        raise ParseError(f"expected a number, got {x}")
    return v.offset


def _floats(text):
    items = parse_nested(text)
    return [float(_number(x)) for x in items]


def _fd_params(text):
    items = parse_nested(text)
    if len(items) != 3 or not isinstance(items[1], list):
        raise ParseError("F_D parameters look like [a, [b1, ..., br], c]")
    a, b, c = items
    return FdParams(parse_param(_leaf(a)), tuple(parse_param(_leaf(x)) for x in b),
                    parse_param(_leaf(c)))


def _fs_params(text):
    items = parse_nested(text)
    if len(items) != 4 or not isinstance(items[2], list) or len(items[2]) != 3:
        raise ParseError("F_S parameters look like [a1, a2, [b1, b2, b3], c]")
    a1, a2, b, c = items
    return FsParams(parse_param(_leaf(a1)), parse_param(_leaf(a2)),
                    tuple(parse_param(_leaf(x)) for x in b), parse_param(_leaf(c)))


def _fd_shift(text):
    items = parse_nested(text)
    if len(items) != 3 or not isinstance(items[1], list):
        raise ParseError("F_D shift looks like [m_a, [m_b1, ..., m_br], m_c]")
    return FdShift(_int(items[0]), tuple(_int(x) for x in items[1]), _int(items[2]))


def _fs_shift(text):
    items = parse_nested(text)
    if len(items) != 4 or not isinstance(items[2], list) or len(items[2]) != 3:
        raise ParseError("F_S shift looks like [m_a1, m_a2, [m_b1, m_b2, m_b3], m_c]")
    return FsShift(_int(items[0]), _int(items[1]), tuple(_int(x) for x in items[2]),
                   _int(items[3]))


def _numeric_fd(p):
    if p.atoms():
        raise ParseError("numeric commands need numeric parameters")
    return (p.a.offset, [x.offset for x in p.b], p.c.offset)


def _numeric_fs(p):
    if p.atoms():
        raise ParseError("numeric commands need numeric parameters")
    return (p.a1.offset, p.a2.offset, [x.offset for x in p.b], p.c.offset)


def _cfg(args):
    kw = {"mode": args.mode}
    if args.order is not None:
        kw["max_order"] = args.order
    try:
        return series.SeriesConfig(**kw)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _nv(v):
    return {"value": float(v.value), "est_error": float(v.est_error)}


# ---------------------------------------------------------------------------
# reductions


def _sample_values(atoms, check, rng):
    """Random rationals for the atoms such that check(values) is empty."""
    for _ in range(200):
        vals = {a: Fraction(rng.randint(-60, 60), rng.choice((7, 11, 13, 17, 19))) for a in atoms}
        if not check(vals):
            return vals
    raise ExceptionalStep("could not sample non-exceptional values for --verify")


def _verify(red, exceptional, samples, seed, nz):
    rng = random.Random(seed)
    atoms = sorted(set(red.source.atoms()) | set(red.target.atoms()))

    def check(vals):
        return exceptional(red.source, vals) or exceptional(red.target, vals)

    worst = 0.0
    for _ in range(samples):
        vals = _sample_values(atoms, check, rng)
        z = [x / 100 for x in rng.sample(range(5, 36), nz)]
        res = reduction_residual(red, vals, z, series.SeriesConfig(max_order=60))
        worst = max(worst, res.residual)
    return worst


def _substituted_fd(p, vals):
    return FdParams(p.a.evaluate(vals), tuple(x.evaluate(vals) for x in p.b), p.c.evaluate(vals))


def _substituted_fs(p, vals):
    return FsParams(p.a1.evaluate(vals), p.a2.evaluate(vals),
                    tuple(x.evaluate(vals) for x in p.b), p.c.evaluate(vals))


def _reduction_result(red):
    return {
        "source": str(red.source),
        "target": str(red.target),
        "basis": [format_mono(m) or "1" for m in red.basis],
        "coefficients": [format_ratfun(c) for c in red.coeffs],
        "symbols": list(red.ctx.names),
    }


def _reduction_text(red):
    lines = [f"source: {red.source}", f"target: {red.target}"]
    for k, (m, c) in enumerate(zip(red.basis, red.coeffs), 1):
        lines.append(f"A{k} [{format_mono(m) or '1'}] = {format_ratfun(c)}")
    lines.append("operator:")
    lines.append(format_theta(red.as_theta()))
    return "\n".join(lines)


def cmd_fd_reduce(args):
    params = _fd_params(args.params)
    shift = _fd_shift(args.shift)
    if args.vars is not None and args.vars != params.r:
        raise UsageError(f"--vars {args.vars} does not match {params.r} b parameters")
    if len(shift.m_b) != params.r:
        raise UsageError("shift and parameters have different numbers of b entries")
    t0 = time.perf_counter()
    red = fd_index_change(shift, params)
    diag = {"exceptional": [], "steps": red.steps, "seconds": time.perf_counter() - t0}
    if args.verify:
        diag["residual"] = _verify(
            red, lambda p, v: fd_exceptional(_substituted_fd(p, v)), args.verify_samples,
            args.seed, params.r)
    return _reduction_result(red), diag, _reduction_text(red)


def cmd_fs_reduce(args):
    params = _fs_params(args.params)
    shift = _fs_shift(args.shift)
    t0 = time.perf_counter()
    red = fs_index_change(shift, params)
    diag = {"exceptional": [], "steps": red.steps, "seconds": time.perf_counter() - t0}
    if args.verify:
        diag["residual"] = _verify(
            red, lambda p, v: fs_exceptional(_substituted_fs(p, v)), args.verify_samples,
            args.seed, 3)
    return _reduction_result(red), diag, _reduction_text(red)


# ---------------------------------------------------------------------------
# numeric commands


def _which(args):
    if args.which is None:
        raise UsageError("--which is required")
    return [int(x) for x in _floats(args.which)]


def _value_text(v):
    return f"{float(v.value)!r} +- {float(v.est_error):.3g}"


def cmd_fd_eval(args):
    v = series.fd_series(_numeric_fd(_fd_params(args.params)), _z(args), _cfg(args))
    return _nv(v), {}, _value_text(v)


def cmd_fs_eval(args):
    v = series.fs_series(_numeric_fs(_fs_params(args.params)), _z(args), _cfg(args))
    return _nv(v), {}, _value_text(v)


def cmd_fd_diff_eval(args):
    v = series.fd_diff_series(_which(args), _numeric_fd(_fd_params(args.params)), _z(args),
                              _cfg(args))
    return _nv(v), {}, _value_text(v)


def cmd_fs_diff_eval(args):
    v = series.fs_diff_series(_which(args), _numeric_fs(_fs_params(args.params)), _z(args),
                              _cfg(args))
    return _nv(v), {}, _value_text(v)


def cmd_eps_fd(args):
    if args.order is None:
        raise UsageError("--order (the epsilon power) is required")
    v = epsilon.eps_coeffs_fd(args.order, args.slot, _numeric_fd(_fd_params(args.params)),
                              _z(args))
    return _nv(v), {}, _value_text(v)


def cmd_eps_f3(args):
    vals = [_number(x) for x in parse_nested(args.params)]
    if len(vals) != 5:
        raise ParseError("F3 parameters look like [a1, a2, b1, b2, c]")
    two, three = epsilon.eps_coeffs_f3(_z(args), vals)
    result = {"eps2": _nv(two), "eps3": _nv(three)}
    return result, {}, f"eps^2: {_value_text(two)}\neps^3: {_value_text(three)}"


def cmd_check_exceptional(args):
    items = parse_nested(args.params)
    family = args.family or ("fs" if len(items) == 4 else "fd")
    if family == "fd":
        hits = fd_exceptional(_fd_params(args.params))
    else:
        hits = fs_exceptional(_fs_params(args.params))
    result = {"family": family, "exceptional": hits}
    return result, {"exceptional": hits}, "\n".join(hits) if hits else "none"


def cmd_feynman_eval(args):
    if args.d is None:
        raise UsageError("--d is required")
    z = _z(args)
    cfg = _cfg(args)
    form = args.form
    if form == "hypera":
        v = feynman.feynman_h_series(_need_n(args), args.d, z, cfg)
    elif form == "hyperb":
        v = feynman.hyperb_series(_need_n(args), args.d, z, cfg)
    elif form == "offshell":
        v = feynman.offshell_series(_need_n(args), args.d, z, cfg)
    else:
        v = feynman.h_form_series(form, args.d, z, cfg)
    return _nv(v), {}, _value_text(v)


def _need_n(args):
    if args.N is None:
        raise UsageError("--N is required for this form")
    return args.N


def _z(args):
    if args.z is None:
        raise UsageError("--z is required")
    return _floats(args.z)


HANDLERS = {
    "fd-reduce": cmd_fd_reduce,
    "fs-reduce": cmd_fs_reduce,
    "fd-eval": cmd_fd_eval,
    "fs-eval": cmd_fs_eval,
    "fd-diff-eval": cmd_fd_diff_eval,
    "fs-diff-eval": cmd_fs_diff_eval,
    "eps-fd": cmd_eps_fd,
    "eps-f3": cmd_eps_f3,
    "check-exceptional": cmd_check_exceptional,
    "feynman-eval": cmd_feynman_eval,
}


def build_parser():
    p = _ArgParser(prog="hyperred", description="Differential reduction of F_D and F_S.")
    sub = p.add_subparsers(dest="command", metavar="command")
    sub.required = True
    common = _ArgParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    for name in COMMANDS:
        s = sub.add_parser(name, parents=[common], help=HELP[name])
        if name != "feynman-eval":
            s.add_argument("--params", required=True)
        if name.endswith("reduce"):
            s.add_argument("--shift", required=True)
            s.add_argument("--vars", type=int)
            s.add_argument("--verify", action="store_true")
            s.add_argument("--verify-samples", type=int, default=2)
            s.add_argument("--seed", type=int, default=0)
        else:
            s.add_argument("--z")
            s.add_argument("--order", type=int)
            s.add_argument("--mode", choices=("float64", "extended"), default="float64")
        if name.endswith("diff-eval"):
            s.add_argument("--which")
        if name == "eps-fd":
            s.add_argument("--slot", default="value")
        if name == "check-exceptional":
            s.add_argument("--family", choices=("fd", "fs"))
        if name == "feynman-eval":
            s.add_argument("--form", default="hypera")
            s.add_argument("--N", type=int)
            s.add_argument("--d", type=float)
    sub.add_parser("batch", help="read one JSON request per line from stdin")
    return p


def _exit_code(exc):
    if isinstance(exc, (UsageError, ParseError, DegenerateInput, UnsupportedOrderSlot, ValueError)):
        return EXIT_USAGE
    if isinstance(exc, ExceptionalStep):
        return EXIT_EXCEPTIONAL
    if isinstance(exc, (NumericGuard, DenominatorVanishes)):
        return EXIT_NUMERIC
    return EXIT_ERROR


def _error_response(command, exc, diag=None):
    code = getattr(exc, "code", "error")
    return {"status": "error", "command": command, "code": code, "message": str(exc),
            "diagnostics": diag or {}}


def execute(argv):
    """(exit code, response dict, text, format) for one request."""
    command = argv[0] if argv else None
    # best guess until the parser has run
    pairs = zip(argv, argv[1:])
    fmt = "text" if "--format=text" in argv or ("--format", "text") in pairs else "json"
    try:
        args = build_parser().parse_args(argv)
        command, fmt = args.command, getattr(args, "format", "json")
        result, diag, text = HANDLERS[command](args)
    except ExceptionalStep as e:
        diag = {"exceptional": _exceptional_hint(argv)}
        return EXIT_EXCEPTIONAL, _error_response(command, e, diag), f"error: {e}", fmt
    except (UsageError, HyperredError, ValueError) as e:
        return _exit_code(e), _error_response(command, e), f"error: {e}", fmt
    return EXIT_OK, {"status": "ok", "command": command, "result": result,
                     "diagnostics": diag}, text, fmt


def _exceptional_hint(argv):
    try:
        args = build_parser().parse_args(argv)
        items = parse_nested(args.params)
        if len(items) == 4:
            return fs_exceptional(_fs_params(args.params))
        return fd_exceptional(_fd_params(args.params))
    except Exception:
        return []


def request_to_argv(req):
    """Turn a JSON request object into an argv list."""
    if not isinstance(req, dict) or "command" not in req:
        raise UsageError("request must be an object with a 'command' key")
    argv = [str(req["command"])]
    for key, val in req.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-") if key != "N" else "--N"
        if isinstance(val, bool):
            if val:
                argv.append(flag)
            continue
        if isinstance(val, list):
            val = json.dumps(val)
        argv.extend([flag, str(val)])
    return argv


def run_batch(stdin, stdout):
    worst = EXIT_OK
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            argv = request_to_argv(json.loads(line))
        except (json.JSONDecodeError, UsageError) as e:
            code, resp = EXIT_USAGE, _error_response(None, UsageError(str(e)))
        else:
            if argv[0] == "batch":
                code, resp = EXIT_USAGE, _error_response("batch", UsageError("nested batch"))
            else:
                code, resp, _, _ = execute(argv + ["--format", "json"])
        stdout.write(json.dumps(resp) + "\n")
        if worst == EXIT_OK:
            worst = code
    return worst


def run(argv, stdin=None, stdout=None):
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    if argv and argv[0] == "batch":
        if len(argv) > 1:
            stdout.write(json.dumps(_error_response("batch", UsageError("batch takes no options")))
                         + "\n")
            return EXIT_USAGE
        return run_batch(stdin, stdout)
    code, resp, text, fmt = execute(argv)
    if fmt == "text":
        stdout.write(text + "\n")
    else:
        stdout.write(json.dumps(resp, indent=2) + "\n")
    return code


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    if argv in ([], ["-h"], ["--help"]):
        build_parser().print_help()
        return EXIT_OK if argv else EXIT_USAGE
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
