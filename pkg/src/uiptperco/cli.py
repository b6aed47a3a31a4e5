"""Command-line front end: CSV/JSON tables for every observable.

Subcommands
-----------
prob        percolation probability (closed form and/or integral route)
perimeter   critical perimeter law and the extrapolated constant
volume      volume generating values on a g-ladder and the tail fit
coeffs      exact or bigfloat series coefficients (U, T1, Z, q, delta, theta)
expansions  fitted vs derived singular-expansion coefficients
verify      run the acceptance suite (exit 1 on failure)

CSV is canonical: `#`-prefixed metadata header lines carry the run
configuration; JSON mirrors the same rows with a schema_version field.
Exit codes: 0 ok, 1 verification failure, 2 usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import mpmath as mp

from .config import DEFAULT_PRECISION_BITS, DEFAULT_SERIES_ORDER, RunConfig
from .parametrization import NumericalError, RangeError

SCHEMA_VERSION = 1


def _emit(rows, header, config: RunConfig, fmt: str, out=None):
    if out is None:
        out = sys.stdout
    meta = config.header_fields()
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": meta,
            "columns": header,
            "rows": [[_jsonable(v) for v in row] for row in rows],
        }
        json.dump(doc, out, indent=2)
        out.write("\n")
        return
    for key, value in meta.items():
        out.write(f"# {key} = {value}\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, (mp.mpf,)):
        return mp.nstr(v, 17)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, (mp.mpf,)):
        return float(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def _grid(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be min:max:step")
    lo, hi, step = (float(x) for x in parts)
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("bad grid range")
    out = []
    v = lo
    while v <= hi + 1e-12:
        out.append(round(v, 12))
        v += step
    return out


def cmd_prob(args, config: RunConfig) -> int:
    from .observables import prob_finite_integral, prob_infinite_closed

    ps = args.grid if args.grid else [args.p]
    if any(not (0 <= p <= 1) for p in ps):
        print("error: p outside [0, 1]", file=sys.stderr)
        return 2
    rows = []
    for p in sorted(ps):
        row = [p]
        closed = None
        if args.method in ("closed", "both"):
            closed = prob_infinite_closed(p, config.precision_bits)
            row.append(closed)
        if args.method in ("integral", "both"):
            fin = prob_finite_integral(p, prec=config.precision_bits,
                                       quad_tol=config.quadrature_tol)
            row.append(fin)
            if closed is not None:
                row.append(abs(1 - fin - closed))
        rows.append(row)
    header = ["p"]
    if args.method in ("closed", "both"):
        header.append("P_infinite_closed")
    if args.method in ("integral", "both"):
        header.append("P_finite_integral")
        if args.method == "both":
            header.append("abs_1_minus_sum")
    _emit(rows, header, config, config.output_format)
    return 0


def cmd_perimeter(args, config: RunConfig) -> int:
    from .observables import PerimeterLaw, kappa_prime_extrapolated

    law = PerimeterLaw(args.p, args.kmax)
    rows = []
    with mp.workprec(law.prec):
        for k in range(1, args.kmax + 1):
            v = law.pmf(k)
            rows.append([k, v, mp.power(k, mp.mpf(4) / 3) * v])
    kp, err = kappa_prime_extrapolated(args.kmax, law=law)
    rows.append(["extrapolated_kappa_prime", kp, err])
    _emit(rows, ["k", "pmf", "k43_pmf"], config, config.output_format)
    return 0


def cmd_volume(args, config: RunConfig) -> int:
    from .observables import VolumeLaw, volume_tail_fit

    lo, hi, n = args.ladder
    law = VolumeLaw()
    rows = []
    with mp.workprec(law.prec):
        eps = [mp.mpf(lo) * mp.power(mp.mpf(hi) / lo, mp.mpf(i) / (n - 1))
               for i in range(int(n))]
        for e in sorted(eps):
            g = 1 - e
            rows.append([float(g), law.value(g), law.tail_series_value(g)])
    fit, kappa = volume_tail_fit(law, ladder=(lo, hi, int(n)))
    rows.append(["fit_exponent", fit.exponent, float(kappa)])
    _emit(rows, ["g", "E_g_volume", "tail_series"], config, config.output_format)
    return 0


def cmd_coeffs(args, config: RunConfig) -> int:
    from .gfseries import t_t1_series, u_series, z_series
    from .gfseries import qtilde_series_fast
    from .singular import delta_series, theta_series

    n = args.order
    p = Fraction(args.p).limit_denominator(10 ** 6)
    rows = []
    if args.series == "U":
        s = u_series(n)
        rows = [[k, s.coeff(k)] for k in range(n + 1)]
    elif args.series == "T1":
        s = t_t1_series(p, n)
        rows = [[k, s.coeff(k)] for k in range(n + 1)]
    elif args.series == "Z":
        s = z_series(p, n)
        rows = [[k, s.coeff(k)] for k in range(n + 1)]
    elif args.series == "q":
        qs = qtilde_series_fast(p, n, args.k)
        s = qs[args.k - 1]
        rows = [[k, s.coeff(k)] for k in range(n + 1)]
    elif args.series == "delta":
        s = delta_series(float(p), n)
        rows = [[k, s.coeffs[k]] for k in range(n + 1)]
    elif args.series == "theta":
        s = theta_series(float(p), n)
        rows = [[k, s.coeffs[k]] for k in range(n + 1)]
    _emit(rows, ["n", "coefficient"], config, config.output_format)
    return 0


def cmd_expansions(args, config: RunConfig) -> int:
    from .singular import derived_expansions

    rows = []
    for name, exponent, fitted, derived in derived_expansions(config.precision_bits):
        rows.append([name, str(exponent), fitted, derived,
                     abs(fitted - derived) / (1 + abs(derived))])
    _emit(rows, ["expansion", "exponent", "fitted", "derived", "rel_diff"],
          config, config.output_format)
    return 0


def cmd_verify(args, config: RunConfig) -> int:
    import subprocess

    cmd = [sys.executable, "-m", "pytest", "-q",
           os.path.join(os.path.dirname(__file__), os.pardir, os.pardir,
                        "tests", "test_acceptance.py"),
           "-p", "no:cacheprovider", "-s"]
    proc = subprocess.run(cmd)
    return 1 if proc.returncode else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="uiptperco",
        description="Site-percolation observables on the UIPT")
    parser.add_argument("--precision-bits", type=int,
                        default=int(os.environ.get("UIPTPERCO_PREC_BITS",
                                                   DEFAULT_PRECISION_BITS)))
    parser.add_argument("--series-order", type=int, default=DEFAULT_SERIES_ORDER)
    parser.add_argument("--quadrature-tol", type=float, default=1e-10)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p_prob = sub.add_parser("prob", help="percolation probability")
    p_prob.add_argument("--p", type=float)
    p_prob.add_argument("--grid", type=_grid)
    p_prob.add_argument("--method", choices=("closed", "integral", "both"),
                        default="closed")
    p_prob.set_defaults(func=cmd_prob)

    p_per = sub.add_parser("perimeter", help="critical perimeter law")
    p_per.add_argument("--p", type=float, default=0.5)
    p_per.add_argument("--kmax", type=int, default=100)
    p_per.set_defaults(func=cmd_perimeter)

    p_vol = sub.add_parser("volume", help="volume generating values")
    p_vol.add_argument("--ladder", type=lambda s: tuple(float(x) for x in s.split(":")),
                       default=(1e-5, 1e-2, 6),
                       help="epsilon ladder min:max:count for g = 1-eps")
    p_vol.set_defaults(func=cmd_volume)

    p_coef = sub.add_parser("coeffs", help="series coefficients")
    p_coef.add_argument("--series", required=True,
                        choices=("U", "T1", "Z", "q", "delta", "theta"))
    p_coef.add_argument("--order", type=int, default=10)
    p_coef.add_argument("--p", type=float, default=0.5)
    p_coef.add_argument("--k", type=int, default=1, help="weight index for q")
    p_coef.set_defaults(func=cmd_coeffs)

    p_exp = sub.add_parser("expansions", help="critical singular expansions")
    p_exp.set_defaults(func=cmd_expansions)

    p_ver = sub.add_parser("verify", help="run the acceptance suite")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "prob" and args.p is None and args.grid is None:
        parser.error("prob needs --p or --grid")
    config = RunConfig(precision_bits=args.precision_bits,
                       series_order=args.series_order,
                       quadrature_tol=args.quadrature_tol,
                       output_format=args.format)
    try:
        return args.func(args, config)
    except (RangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
