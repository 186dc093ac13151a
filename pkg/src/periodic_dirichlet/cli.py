"""Command-line front end."""

from __future__ import annotations

import argparse
import logging
import sys

from . import decomposition, offzero, zerocount
from .characters import primitive_characters_dividing
from .errors import (
    CertificationFailed,
    DegenerateInput,
    InfeasibleRadius,
    NoSolution,
    ParseError,
    PoleError,
    PrecisionError,
    SplitUnattainable,
)
from .io import emit, parse_sequence_file
from .special import DirichletPolynomial, EvalOptions, f_eval

log = logging.getLogger(__name__)

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_CERT = 0, 2, 3, 4


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _rect(text: str) -> zerocount.Rectangle:
    try:
        return zerocount.Rectangle.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="sequence file {\"q\": int, \"values\": [[re, im], ...]}")
    common.add_argument("--prec", type=float, default=1e-12, help="target absolute error (default 1e-12)")
    common.add_argument("--pmax", type=int, default=10**7, help="prime budget")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="periodic-dirichlet",
                                description="Zeros of Dirichlet series with periodic coefficients.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("decompose", parents=[common], help="primitive-character decomposition")

    ev = sub.add_parser("eval", parents=[common], help="evaluate F(s, a)")
    ev.add_argument("s", nargs="+", type=_complex)

    ct = sub.add_parser("count", parents=[common], help="count zeros in a rectangle")
    ct.add_argument("--rect", type=_rect, required=True, help="sigma1,sigma2,t1,t2")
    ct.add_argument("--step", type=float, default=zerocount.DEFAULT_STEP)
    ct.add_argument("--distinct", action="store_true", help="also locate distinct zeros")

    sc = sub.add_parser("scan", parents=[common], help="zero density table")
    sc.add_argument("--sigma1", type=float, required=True)
    sc.add_argument("--sigma2", type=float, required=True)
    sc.add_argument("--T", type=float, nargs="+", required=True)
    sc.add_argument("--symmetric", action="store_true", help="count over [-T, T] instead of [0, T]")
    sc.add_argument("--workers", type=int, default=1)

    mo = sub.add_parser("moment", parents=[common], help="mean square on a vertical line")
    mo.add_argument("--sigma", type=float, required=True)
    mo.add_argument("--T", type=float, required=True)

    t3 = sub.add_parser("t3ratio", parents=[common], help="N(1/2+u, cap, T) u / (T log(1/u))")
    t3.add_argument("--u", type=float, nargs="+", required=True)
    t3.add_argument("--T", type=float, required=True)

    oz = sub.add_parser("offzero", parents=[common], help="certified zeros with Re s > 1")
    oz.add_argument("--q", type=int, help="use all primitive characters of conductor dividing q, P = 1")
    oz.add_argument("--sigma1", type=float, default=1.02)
    oz.add_argument("--sigma2", type=float, default=1.2)
    oz.add_argument("--budget", type=float, default=1e4)
    oz.add_argument("--delta", type=float, default=0.1)
    oz.add_argument("--eps", type=float, default=0.3)
    return p


def _sequence(args):
    if not args.input:
        raise ParseError("--input is required for this command")
    return parse_sequence_file(args.input)


def _offzero_components(args):
    if args.input:
        comps = decomposition.primitive_components(_sequence(args))
        return [(c.psi.inducer, c.poly) for c in comps]
    if args.q is None:
        raise ParseError("offzero needs --q or --input")
    one = DirichletPolynomial({1: 1})
    return [(d.inducer, one) for d in primitive_characters_dividing(args.q)]


def run(args) -> tuple[int, object]:
    opts = EvalOptions(target_abs_error=args.prec)
    cmd = args.command
    if cmd == "offzero":
        comps = _offzero_components(args)
        if len(comps) < 2:
            return EXIT_INFEASIBLE, {"error": "at least two primitive characters are required",
                                     "characters": len(comps)}
        report = offzero.theorem2_demo(comps, args.sigma1, args.sigma2, args.budget, p_max=args.pmax,
                                       delta=args.delta, eps=args.eps, seed=args.seed)
        return (EXIT_OK if report.certificates else EXIT_CERT), report
    a = _sequence(args)
    if cmd == "decompose":
        return EXIT_OK, decomposition.primitive_components(a)
    if cmd == "eval":
        return EXIT_OK, [{"s": s, "value": f_eval(a, s, opts)} for s in args.s]
    if cmd == "count":
        if args.distinct:
            return EXIT_OK, zerocount.distinct_zeros(a, args.rect, step=args.step, opts=opts)
        n = zerocount.count_zeros(a, args.rect, step=args.step, opts=opts)
        return EXIT_OK, {"count": n}
    if cmd == "scan":
        return EXIT_OK, zerocount.density_table(a, args.sigma1, args.sigma2, args.T,
                                                symmetric=args.symmetric, workers=args.workers, opts=opts)
    if cmd == "moment":
        return EXIT_OK, zerocount.second_moment(a, args.sigma, args.T, opts)
    if cmd == "t3ratio":
        cap = zerocount.certified_sigma_cap(a)
        return EXIT_OK, [zerocount.theorem3_ratio(a, u, args.T, sigma_cap=cap) for u in args.u]
    raise AssertionError(cmd)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code, result = run(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleRadius, SplitUnattainable, NoSolution, DegenerateInput, PoleError, PrecisionError,
            ValueError) as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CertificationFailed as exc:
        sys.stdout.buffer.write(emit({"failure": exc.report}, "json"))
        return EXIT_CERT
    sys.stdout.buffer.write(emit(result, args.format))
    sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
