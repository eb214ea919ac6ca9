"""Command-line front end: ``qzeros eval | zeros | verify | atlas | pf``.

Exit codes: 0 success, 1 verification failure, 2 argument or domain
error, 3 numerical guard failure, 64 usage error.

Numbers are printed as decimal strings at full working precision unless
``--digits`` asks for rounding.  CSV columns are fixed per command:

    eval    re, im, N, R, tail
    zeros   index, re, im, residual, real
    verify  tag, run, passed, skipped, metric, worst
    atlas   <grid keys...>, index, zero, residual, error

Config files hold one ``key = value`` per line (``#`` starts a comment,
``[section]`` lines are ignored).  For ``verify`` the keys are grid fields
(``q``, ``alpha``, ``n``, ``a``, ``b``, ``K``, ``count``, ``seed``, ...);
for ``atlas`` each key is a family parameter with a comma-separated list
of values.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys

import mpmath

from . import __version__
from .errors import (CostGuardError, DomainError, GuardFailure, InconsistencyError,
                     NonConvergenceError, QZerosError)
from .pfcheck import pf_finite_via_roots, toeplitz_minors, turan_ratios
from .qcore import PrecisionContext, num
from .roots import (certify_entire_zeros, certify_real_roots, find_poly_roots,
                    locate_entire_zeros)
from .series import (RAS, GeneralizedQ, LimitEntire, LimitPoly, QBessel, RamanujanA, RPhiS,
                     coefficients, evaluate, from_values)
from .verify import SUITES, reports_json, run_suite

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_GUARD, EXIT_USAGE = 0, 1, 2, 3, 64
PRECISION_ENV = "QZEROS_PRECISION"
FAMILY_NAMES = ("ramanujan-a", "generalized-q", "limit-poly", "limit-entire", "ras", "rphis",
                "qbessel1", "qbessel2", "qbessel3")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def _list(text):
    if text is None:
        return ()
    return tuple(s for s in str(text).replace(" ", "").split(",") if s)


def _pairs(text, first=str):
    out = []
    for item in _list(text):
        left, sep, right = item.partition(":")
        if not sep:
            raise DomainError(f"expected value:base pairs, got {item!r}")
        out.append((first(left), right))
    return tuple(out)


def read_config(path) -> dict:
    """``key = value`` lines; comments and section headers are skipped."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line or (line.startswith("[") and line.endswith("]")):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            out[key.strip()] = value.strip().strip('"').strip("'")
    return out


def build_spec(family: str, p: dict):
    """Series spec from CLI-style string parameters."""
    def get(key, default=None):
        v = p.get(key)
        return default if v is None else v

    if family == "ramanujan-a":
        if get("n") is not None:
            return RamanujanA(get("alpha", "1"), get("q", "0.5"), n=int(get("n")))
        return RamanujanA(get("alpha", "1"), get("q", "0.5"), a=get("a", "0"))
    if family == "generalized-q":
        return GeneralizedQ(get("alpha", "1"), get("q", "0.5"),
                            orders=_pairs(get("orders"), int), shifts=_pairs(get("shifts")),
                            denominators=_pairs(get("denominators")))
    if family == "limit-poly":
        return LimitPoly(tuple(int(n) for n in _list(get("orders", "1"))), _list(get("betas")))
    if family == "limit-entire":
        return LimitEntire(int(get("m", "0")), _list(get("betas", "1")))
    if family == "ras":
        return RAS(get("alpha", "1"), get("q", "0.5"), _list(get("a")), _list(get("b")))
    if family == "rphis":
        return RPhiS(get("q", "0.5"), _list(get("a")), _list(get("b")))
    if family.startswith("qbessel") and family[-1] in "123":
        return QBessel(int(family[-1]), get("nu", "0"), get("q", "0.5"))
    raise DomainError(f"unknown family {family!r}")


SPEC_KEYS = ("alpha", "q", "a", "b", "n", "nu", "m", "orders", "shifts", "denominators", "betas")


def _spec_params(args) -> dict:
    return {k: getattr(args, k) for k in SPEC_KEYS if getattr(args, k, None) is not None}


class Formatter:
    def __init__(self, ctx: PrecisionContext, digits: int | None):
        self.ctx = ctx
        self.digits = digits

    def __call__(self, x) -> str:
        x = mpmath.mpmathify(x)
        if self.digits is not None:
            return mpmath.nstr(x, self.digits)
        if x == 0:
            return "0.0"
        if not mpmath.isfinite(x):
            return str(x)
        return mpmath.nstr(x, int(self.ctx.bits * 0.30103) + 1, min_fixed=-6, max_fixed=20)


# ---------------------------------------------------------------------------
# commands


def _emit(args, payload: dict, rows: list, header: list, table: str):
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = table.rstrip("\n") + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args, ctx) -> int:
    spec = build_spec(args.family, _spec_params(args))
    fmt = Formatter(ctx, args.digits)
    with ctx.workprec():
        z = num(args.z)
        value, cert = evaluate(spec, z, ctx)
        re, im = mpmath.re(value), mpmath.im(value)
        payload = {"spec": spec.to_dict(), "z": args.z, "precision_bits": ctx.bits,
                   "value": {"re": fmt(re), "im": fmt(im)},
                   "certificate": {"N": cert.N, "R": fmt(cert.R), "tail": fmt(cert.tail)}}
        rows = [[fmt(re), fmt(im), cert.N, fmt(cert.R), fmt(cert.tail)]]
        table = (f"{spec.family} {json.dumps(spec.params(), sort_keys=True)} at z = {args.z}\n"
                 f"value = {fmt(re)}" + (f" + {fmt(im)}i" if im != 0 else "") +
                 f"\ntruncation N = {cert.N}, |x| = {fmt(cert.R)}, tail <= {fmt(cert.tail)}")
    _emit(args, payload, rows, ["re", "im", "N", "R", "tail"], table)
    return EXIT_OK


def _zeros_for(spec, K, ctx):
    if spec.terminating:
        seq = coefficients(spec, spec.degree, ctx)
        zs = find_poly_roots(seq, ctx)
        rep = certify_real_roots(seq, zs, ctx)
    else:
        if K is None:
            raise UsageError(f"{spec.family} is entire: pass --count K")
        zs = locate_entire_zeros(spec, K, ctx)
        rep = certify_entire_zeros(spec, zs, ctx)
    zs.all_real, zs.all_negative = rep.all_real, rep.all_negative
    return zs, rep


def cmd_zeros(args, ctx) -> int:
    if args.count is not None and args.count < 1:
        raise UsageError("--count must be >= 1")
    spec = build_spec(args.family, _spec_params(args))
    fmt = Formatter(ctx, args.digits)
    with ctx.workprec():
        zs, rep = _zeros_for(spec, args.count, ctx)
        entries = [{"re": fmt(mpmath.re(z)), "im": fmt(mpmath.im(z)), "residual": fmt(r)}
                   for z, r in zip(zs.zeros, zs.residuals)]
        cert = {k: (v if isinstance(v, (int, str)) else str(v)) for k, v in zs.certificate.items()}
        payload = {"spec": spec.to_dict(), "zeros": entries, "all_real": bool(rep.all_real),
                   "all_negative": bool(rep.all_negative), "all_positive": bool(rep.all_positive),
                   "certificate": cert, "precision_bits": ctx.bits,
                   "realness": {"max_imag_ratio": fmt(rep.max_imag_ratio),
                                "sign_change_count": rep.sign_change_count}}
        rows = [[i + 1, e["re"], e["im"], e["residual"], bool(flag)]
                for i, (e, flag) in enumerate(zip(entries, zs.real_flags))]
        lines = [f"{spec.family} {json.dumps(spec.params(), sort_keys=True)}: "
                 f"{len(entries)} zeros, all_real={rep.all_real}, "
                 f"all_negative={rep.all_negative}, all_positive={rep.all_positive}"]
        lines += [f"  {i + 1:>3}  {e['re']}" + (f" {e['im']}i" if mpmath.im(z) != 0 else "")
                  for i, (e, z) in enumerate(zip(entries, zs.zeros))]
    _emit(args, payload, rows, ["index", "re", "im", "residual", "real"], "\n".join(lines))
    return EXIT_OK


def cmd_verify(args, ctx) -> int:
    overrides = read_config(args.config) if args.config else {}
    for item in args.set or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    reports = run_suite(args.suite, ctx=ctx, extended=args.extended, overrides=overrides or None)
    text = reports_json(reports, ctx)
    rows = [[r.tag, r.run, r.passed, len(r.skipped), r.metric,
             "" if r.worst is None else mpmath.nstr(r.worst, 10)] for r in reports]
    _emit(args, json.loads(text), rows, ["tag", "run", "passed", "skipped", "metric", "worst"],
          "\n".join(r.table() for r in reports))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_atlas(args, ctx) -> int:
    if args.count is None or args.count < 1:
        raise UsageError("atlas needs --count K >= 1")
    grid = read_config(args.config) if args.config else {}
    for item in args.grid or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise DomainError(f"--grid expects key=v1,v2,..., got {item!r}")
        grid[key.strip()] = value
    keys = list(grid)
    values = [_list(grid[k]) for k in keys]
    base = _spec_params(args)
    fmt = Formatter(ctx, args.digits)
    rows, failures = [], 0
    for point in itertools.product(*values) if keys else ():
        params = dict(base, **dict(zip(keys, point)))
        try:
            spec = build_spec(args.family, params)
            with ctx.workprec():
                zs, _ = _zeros_for(spec, args.count, ctx)
                for i, (z, r) in enumerate(zip(zs.zeros[: args.count], zs.residuals), 1):
                    zero = fmt(mpmath.re(z)) if mpmath.im(z) == 0 or zs.real_flags[i - 1] else str(z)
                    rows.append(list(point) + [i, zero, fmt(r), ""])
        except (QZerosError, ValueError) as exc:
            failures += 1
            rows.append(list(point) + ["", "", "", f"{type(exc).__name__}: {exc}"])
    header = keys + ["index", "zero", "residual", "error"]
    payload = {"family": args.family, "columns": header, "rows": rows, "precision_bits": ctx.bits}
    table = "\n".join([" ".join(header)] + [" ".join(str(c) for c in row) for row in rows])
    _emit(args, payload, rows, header, table)
    points = len(rows) and len({tuple(r[: len(keys)]) for r in rows})
    return EXIT_GUARD if rows and failures == points else EXIT_OK


def cmd_pf(args, ctx) -> int:
    with ctx.workprec():
        seq = from_values(list(_list(args.coeffs)), ctx)
        payload = {"coeffs": list(_list(args.coeffs)), "precision_bits": ctx.bits}
        if args.window:
            payload["minors"] = toeplitz_minors(seq, args.window, args.order, ctx).to_dict()
        payload["pf_by_roots"] = pf_finite_via_roots(seq, ctx)
        if len(seq) >= 3 and all(num(c) > 0 for c in seq.coeffs):
            payload["turan"] = turan_ratios(seq, ctx).to_dict()
    rows = [[payload["pf_by_roots"], payload.get("minors", {}).get("pf_consistent", ""),
             payload.get("turan", {}).get("min_ratio", "")]]
    table = "\n".join(f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(payload.items()))
    _emit(args, payload, rows, ["pf_by_roots", "minors_consistent", "min_turan_ratio"], table)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--precision", type=int, default=None,
                   help=f"working precision in bits (default ${PRECISION_ENV} or 256)")
    p.add_argument("--format", choices=("json", "csv", "table"), default="json")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--digits", type=int, default=None, help="round printed numbers")


def _add_family(p, required=True):
    p.add_argument("--family", required=required, choices=FAMILY_NAMES)
    p.add_argument("--alpha")
    p.add_argument("--q")
    p.add_argument("--a", help="a (ramanujan-a) or comma list a_1,...,a_r (ras, rphis)")
    p.add_argument("--b", help="comma list b_1,...,b_s (ras, rphis)")
    p.add_argument("--n", help="terminating order: a = q^-n (ramanujan-a)")
    p.add_argument("--nu")
    p.add_argument("--m")
    p.add_argument("--orders", help="n:q_n pairs (generalized-q) or n list (limit-poly)")
    p.add_argument("--shifts", help="a:q_a pairs (generalized-q)")
    p.add_argument("--denominators", help="beta:q_r pairs (generalized-q)")
    p.add_argument("--betas", help="comma list (limit-poly, limit-entire)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qzeros", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"qzeros {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("eval", help="evaluate a series with a truncation certificate")
    _add_family(p)
    p.add_argument("--z", required=True, help="point, e.g. 0.5 or 1+2j")
    _add_common(p)

    p = sub.add_parser("zeros", help="zeros with realness certificates")
    _add_family(p)
    p.add_argument("--count", "-K", type=int, help="number of zeros (required for entire series)")
    _add_common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--config", help="key = value grid file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="grid override")
    p.add_argument("--seed", type=int)
    p.add_argument("--extended", action="store_true", help="use the large sweeps")
    _add_common(p)
    p.set_defaults(format="table")

    p = sub.add_parser("atlas", help="tabulate zeros over a parameter grid")
    _add_family(p)
    p.add_argument("--count", "-K", type=int)
    p.add_argument("--grid", action="append", metavar="KEY=V1,V2", help="grid axis")
    p.add_argument("--config", help="key = v1, v2 grid file")
    _add_common(p)
    p.set_defaults(format="csv")

    p = sub.add_parser("pf", help="PF checks of a finite nonnegative sequence")
    p.add_argument("--coeffs", required=True, help="comma list c_0,...,c_n")
    p.add_argument("--window", type=int, default=0, help="Toeplitz window (0 skips minors)")
    p.add_argument("--order", type=int, default=2)
    _add_common(p)
    return parser


COMMANDS = {"eval": cmd_eval, "zeros": cmd_zeros, "verify": cmd_verify, "atlas": cmd_atlas,
            "pf": cmd_pf}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        bits = args.precision if args.precision is not None else int(os.environ.get(PRECISION_ENV, 256))
        ctx = PrecisionContext(bits)
        return COMMANDS[args.command](args, ctx)
    except UsageError as exc:
        print(f"qzeros: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GuardFailure, NonConvergenceError, InconsistencyError) as exc:
        print(f"qzeros: {type(exc).__name__}: {exc}\n"
              f"hint: raise --precision or the truncation degree", file=sys.stderr)
        return EXIT_GUARD
    except (DomainError, CostGuardError, ValueError) as exc:
        print(f"qzeros: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
