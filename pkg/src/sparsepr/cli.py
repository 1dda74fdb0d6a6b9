"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 guard violation
(desk-scale or enumeration caps), 1 anything else.
"""
import argparse
import csv
import io
import sys

import numpy as np

from . import io as sio
from .bounds import bounds_table, dimension_gap, generic_fiber_gap, predicted_guarantee
from .certify import CertifyConfig, SearchConfig, certify_basis
from .exceptions import ConfigError, GuardError
from .harness import ScanConfig, format_report, run_scan
from .model import Support, embed, sample_generic_basis, sample_sparse_vector
from .recover import RecoveryConfig, RecoveryProblem, solve_fixed_support, solve_support_search
from .signal import measurement

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _int_list(text):
    try:
        out = []
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        return tuple(out)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like '8,10,12' or '1-5', got {text!r}")


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="base random seed (default 0)")
    parser.add_argument("--threads", type=int, default=default(1), help="worker processes (default 1)")
    parser.add_argument("--out", default=default(None), help="output file (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=default(None),
                        help="output format (default depends on the command)")


def build_parser():
    parser = _Parser(prog="sparsepr", description="Sparse signal recovery from power spectra.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        return p

    p = add("spectrum", "measure a signal")
    p.add_argument("--input", required=True, help="signal JSON (numbers or [re, im] pairs)")
    p.add_argument("--what", choices=("power", "autocorr", "b"), default="power")

    p = add("model", "sample bases and sparse signals")
    msub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = msub.add_parser("sample-basis", help="Gaussian generic basis")
    _global_flags(q, suppress=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--field", choices=("real", "complex"), default="real")
    q.add_argument("--condition-cap", type=float, default=1e6)
    q = msub.add_parser("sample-signal", help="random sparse signal in a basis")
    _global_flags(q, suppress=True)
    q.add_argument("--basis", required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--support", type=_int_list, help="fixed support, e.g. 0,3,5 (default random)")

    p = add("certify", "search for uniqueness violations")
    p.add_argument("--basis", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("every", "generic"), default="every")
    p.add_argument("--field", choices=("real", "complex"), default=None)
    p.add_argument("--starts", type=int, default=200)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--trials", type=int, default=20, help="generic mode: random signals")
    p.add_argument("--support-cap", type=int, default=2000)
    p.add_argument("--pair-cap", type=int, default=5000)
    p.add_argument("--no-sampling", action="store_true", help="fail instead of sampling past the caps")

    p = add("recover", "recover a sparse signal from measurements")
    p.add_argument("--basis", required=True)
    p.add_argument("--measurements", required=True, help="b or power spectrum, CSV or JSON")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--field", choices=("real", "complex"), default=None)
    p.add_argument("--support", type=_int_list, help="solve on this support only")
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--accept-tol", type=float, default=1e-8)
    p.add_argument("--enumeration-cap", type=int, default=5000)

    p = add("bounds", "predicted thresholds and dimension gaps")
    p.add_argument("--table", action="store_true", help="emit the full table")
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--field", choices=("real", "complex"), default="real")

    p = add("scan", "Monte Carlo phase-transition scan")
    p.add_argument("--n", type=_int_list, required=True, help="N values, e.g. 8,10,12 or 8-12")
    p.add_argument("--m", type=_int_list, default=None, help="M values (default 1..N//2+2)")
    p.add_argument("--field", choices=("real", "complex"), default="real")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mode", choices=("recover", "certify-generic", "certify-every"), default="recover")
    p.add_argument("--starts", type=int, default=50)
    p.add_argument("--accept-tol", type=float, default=1e-8)
    p.add_argument("--alt-supports", type=int, default=2)
    p.add_argument("--support-strategy", choices=("oracle", "enumerate"), default="oracle")
    p.add_argument("--timing", action="store_true", help="fill the ms column (breaks byte-identity)")
    return parser


def _fmt(args, default, allowed=("csv", "json")):
    fmt = args.format or default
    if fmt not in allowed:
        raise ConfigError(f"{args.command} does not support --format {fmt}")
    return fmt


def _check_field(basis, field):
    if field == "real" and basis.field == "complex":
        raise ConfigError("basis is complex but --field real was given")
    return field or basis.field


def cmd_spectrum(args):
    x = sio.read_signal(args.input)
    values = measurement(x, args.what)
    if _fmt(args, "csv") == "json":
        return sio.dumps_json(sio.encode_array(values))
    return sio.vector_csv(values)


def cmd_model(args):
    _fmt(args, "json", ("json",))
    if args.action == "sample-basis":
        basis = sample_generic_basis(args.n, args.field, args.seed, args.condition_cap)
        return sio.dumps_json(sio.basis_to_dict(basis))
    basis = sio.read_basis(args.basis)
    n = basis.n
    if args.support is not None:
        support = Support.of(args.support, n)
        if support.m != args.m:
            raise ConfigError(f"--support has {support.m} entries but --m is {args.m}")
    else:
        if not 1 <= args.m <= n:
            raise ConfigError(f"need 1 <= m <= {n}, got {args.m}")
        rng = np.random.default_rng([args.seed & 0xFFFFFFFF, n, args.m])
        support = Support.of(rng.choice(n, args.m, replace=False), n)
    v = sample_sparse_vector(support, basis.field, [args.seed & 0xFFFFFFFF, 1])
    return sio.dumps_json({"support": list(support.indices), "coeffs": sio.encode_array(v.coeffs),
                           "signal": sio.encode_array(embed(v, basis))})


def cmd_certify(args):
    _fmt(args, "json", ("json",))
    basis = sio.read_basis(args.basis, args.field)
    _check_field(basis, args.field)
    cfg = CertifyConfig(search=SearchConfig(starts=args.starts, max_iter=args.max_iter, seed=args.seed),
                        support_cap=args.support_cap, pair_cap=args.pair_cap,
                        allow_sampling=not args.no_sampling, trials=args.trials,
                        seed=args.seed, workers=args.threads)
    report = certify_basis(basis, args.m, args.mode, cfg)
    return sio.dumps_json(report.to_dict())


def cmd_recover(args):
    basis = sio.read_basis(args.basis, args.field)
    field = _check_field(basis, args.field)
    target = sio.read_vector(args.measurements)
    if np.iscomplexobj(target):
        raise ConfigError("measurements must be real")
    problem = RecoveryProblem.from_target(target, basis, args.m, field)
    cfg = RecoveryConfig(starts=args.starts, accept_tol=args.accept_tol, seed=args.seed,
                         enumeration_cap=args.enumeration_cap, workers=args.threads)
    if args.support is not None:
        result = solve_fixed_support(problem, Support.of(args.support, basis.n), cfg)
    else:
        result = solve_support_search(problem, cfg)
    if _fmt(args, "json") == "csv":
        return sio.vector_csv(result.signal)
    amb = result.ambiguity
    return sio.dumps_json({
        "support": list(result.support.indices),
        "coeffs": sio.encode_array(result.coeffs),
        "signal": sio.encode_array(result.signal),
        "residual": result.residual,
        "normalized_residual": result.normalized_residual,
        "converged": result.converged,
        "canonical": result.canonical,
        "ambiguity": None if amb is None else {"support": list(amb.support.indices),
                                               "coeffs": sio.encode_array(amb.coeffs)},
    })


def cmd_bounds(args):
    fmt = _fmt(args, "csv" if args.table else "json")
    if args.table:
        rows = bounds_table(args.m_max, args.n_max)
    else:
        if args.n is None or args.m is None:
            raise ConfigError("bounds needs --table or both --n and --m")
        v = predicted_guarantee(args.n, args.m, args.field)
        cases = ("complex-pair",) if args.field == "complex" else ("real-single", "real-pair")
        rows = [{"n": args.n, "m": args.m, "field": args.field, **v.as_dict(),
                 **{f"gap_{c}": dimension_gap(args.m, args.n, 0, c) for c in cases},
                 "gap_generic": generic_fiber_gap(args.m, args.n, args.field)}]
    if fmt == "json":
        return sio.dumps_json(rows if args.table else rows[0])
    return _rows_csv(rows)


def _rows_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_scan(args):
    cfg = ScanConfig(n_values=args.n, m_values=args.m, field=args.field, trials=args.trials,
                     seed=args.seed, mode=args.mode, starts=args.starts, accept_tol=args.accept_tol,
                     alt_supports=args.alt_supports, support_strategy=args.support_strategy,
                     workers=args.threads, timing=args.timing)
    return format_report(run_scan(cfg), _fmt(args, "csv"))


COMMANDS = {"spectrum": cmd_spectrum, "model": cmd_model, "certify": cmd_certify,
            "recover": cmd_recover, "bounds": cmd_bounds, "scan": cmd_scan}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        text = COMMANDS[args.command](args)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except GuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
