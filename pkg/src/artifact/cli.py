"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _ints(text: str, count: int | None = None, flag: str = "") -> tuple:
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag}: expected comma separated integers, got {text!r}")
    if count is not None and len(vals) != count:
        raise UsageError(f"{flag}: expected {count} values, got {len(vals)}")
    return vals


def _floats(text: str, count: int, flag: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag}: expected comma separated numbers, got {text!r}")
    if len(vals) != count:
        raise UsageError(f"{flag}: expected {count} values, got {len(vals)}")
    return vals


def _frac(text: str, flag: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag}: not a rational number: {text!r}")


def _emit(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def cmd_classes(args) -> int:
    from .hermitian import enumerate_classes, valid_index
    det = _frac(args.det, "--det")
    coset = _ints(args.coset, 2, "--coset")
    if not valid_index(args.disc, det, coset):
        raise UsageError(f"--det {det} is not a valid index for coset {coset}")
    cl = enumerate_classes(args.disc, det, coset, primitive=args.primitive)
    if args.json:
        _emit(cl.to_json())
    else:
        print(f"D={args.disc} det={det} coset={coset} primitive={args.primitive}: {len(cl)} classes")
        for e in cl:
            print(f"  {e.form}  |stab|={e.stab}")
    return EXIT_OK


def cmd_green(args) -> int:
    from .hyperbolic import Point3, green_function
    pts = []
    for flag, text in (("--p1", args.p1), ("--p2", args.p2)):
        re, im, r = _floats(text, 3, flag)
        if r <= 0:
            raise UsageError(f"{flag}: height must be positive")
        pts.append(Point3(complex(re, im), r))
    if args.s <= 1:
        raise UsageError("--s must exceed 1")
    g = green_function(pts[0], pts[1], args.s, T=args.T, extrapolate=args.extrapolate, D=args.disc)
    _emit(g.to_json())
    return EXIT_OK


def _gram(text: str):
    vals = _ints(text, None, "--gram")
    if len(vals) == 3:
        return [[vals[i] if i == j else 0 for j in range(3)] for i in range(3)]
    if len(vals) == 6:
        a, b, c, d, e, f = vals  # upper triangle g11 g12 g13 g22 g23 g33
        return [[a, b, c], [b, d, e], [c, e, f]]
    if len(vals) == 9:
        return [list(vals[0:3]), list(vals[3:6]), list(vals[6:9])]
    raise UsageError("--gram: give 3 (diagonal), 6 (upper triangle) or 9 entries")


def cmd_eisenstein(args) -> int:
    from .eisenstein import TernaryLattice, eis_coefficient_minus, eis_coefficient_plus, numeric_limit_oracle
    try:
        lat = TernaryLattice(_gram(args.gram))
    except ValueError as exc:
        raise UsageError(f"--gram: {exc}")
    n = _frac(args.n, "--n")
    coset = _ints(args.coset, 3, "--coset")
    try:
        lat.check_index(coset, n)
    except ValueError as exc:
        raise UsageError(str(exc))
    coef = eis_coefficient_plus(lat, n, coset) if n >= 0 else eis_coefficient_minus(lat, n, coset)
    doc = coef.to_json()
    if args.oracle and n >= 0:
        doc["oracle_numeric"] = float(numeric_limit_oracle(lat, n, coset))
    _emit(doc)
    return EXIT_OK


def _principal_part(D: int, n: int, text: str):
    from .traces import PrincipalPart
    items = []
    for chunk in text.split(";"):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise UsageError(f"--pp: expected m:x,y:coefficient, got {chunk!r}")
        items.append((_frac(parts[0], "--pp"), _ints(parts[1], 2, "--pp"), _frac(parts[2], "--pp")))
    return PrincipalPart.symmetric(D, n, items)


def cmd_double_trace(args) -> int:
    from .traces import double_trace_lhs, double_trace_rhs, double_trace_rhs_kappa, twisted_partial_rhs
    pp = _principal_part(args.disc, args.n, args.pp)
    mprime = _frac(args.mprime, "--mprime")
    muprime = _ints(args.muprime, 2, "--muprime")
    if args.twisted:
        rhs = twisted_partial_rhs(args.disc, pp, mprime)
        doc = {"rhs_symbolic": str(rhs), "rhs_terms": rhs.to_json(), "rhs_numeric": float(rhs.numeric_eval())}
    else:
        rhs = double_trace_rhs(args.disc, pp, mprime, muprime)
        alt = double_trace_rhs_kappa(args.disc, pp, mprime, muprime)
        doc = {"rhs_symbolic": str(rhs), "rhs_terms": rhs.to_json(), "rhs_numeric": float(rhs.numeric_eval()),
               "kappa_route_agrees": rhs == alt}
    if args.lhs:
        lv = double_trace_lhs(args.disc, pp, mprime, muprime, twisted=args.twisted, T=args.T)
        doc.update({"lhs_numeric": lv.value, "lhs_bound": lv.bound})
    _emit(doc)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .traces import REGISTRY, verify
    if args.all == bool(args.id):
        raise UsageError("give exactly one of --id or --all")
    ids = list(REGISTRY) if args.all else [args.id]
    unknown = [i for i in ids if i not in REGISTRY]
    if unknown:
        raise UsageError(f"--id: unknown identity {unknown[0]!r}")
    reports = [verify(i, T=args.T) for i in ids]
    if args.json:
        docs = []
        for r in reports:
            d = r.to_json()
            d.pop("runtime")
            docs.append(d)
        _emit(docs if args.all else docs[0])
    else:
        for r in reports:
            print(r.line())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="artifact", description="Green's function special values on hyperbolic 3-space")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("classes", help="class representatives of positive Hermitian forms")
    c.add_argument("--disc", type=int, default=-4)
    c.add_argument("--det", required=True)
    c.add_argument("--coset", default="0,0")
    c.add_argument("--primitive", action="store_true")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_classes)

    g = sub.add_parser("green", help="truncated automorphic Green's function")
    g.add_argument("--disc", type=int, default=-4)
    g.add_argument("--s", type=float, required=True)
    g.add_argument("--p1", required=True, help="re,im,height")
    g.add_argument("--p2", required=True, help="re,im,height")
    g.add_argument("--T", type=float, default=400.0)
    g.add_argument("--extrapolate", action="store_true")
    g.set_defaults(func=cmd_green)

    e = sub.add_parser("eisenstein", help="Eisenstein series coefficient")
    e.add_argument("--gram", required=True)
    e.add_argument("--n", required=True)
    e.add_argument("--coset", required=True)
    e.add_argument("--oracle", action="store_true", help="also evaluate the numeric limit")
    e.set_defaults(func=cmd_eisenstein)

    d = sub.add_parser("double_trace", help="both sides of the double trace formula")
    d.add_argument("--disc", type=int, default=-4)
    d.add_argument("--n", type=int, default=1)
    d.add_argument("--pp", required=True, help="m:x,y:lambda[;...] meaning lambda q^-m (e_mu + e_-mu)")
    d.add_argument("--mprime", required=True)
    d.add_argument("--muprime", default="0,0")
    d.add_argument("--twisted", action="store_true")
    d.add_argument("--lhs", action="store_true", help="also sum Green's functions numerically")
    d.add_argument("--T", type=float, default=400.0)
    d.set_defaults(func=cmd_double_trace)

    v = sub.add_parser("verify", help="run registered identities")
    v.add_argument("--id")
    v.add_argument("--all", action="store_true")
    v.add_argument("--json", action="store_true")
    v.add_argument("--T", type=float, default=400.0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"artifact {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
