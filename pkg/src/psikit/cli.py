"""Command-line front end.

Exit codes: 0 success, 2 divergence or non-convergence, 3 bad input (parse,
usage, hypothesis or pole errors), 4 an identity check failed.  CSV goes to
stdout (or ``--out``); human-readable diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

from . import harness, identities, series
from .casefile import (
    format_case,
    format_complex,
    format_float,
    read_casefile,
    report_text,
)
from .errors import (
    CaseFileError,
    ConstraintError,
    DivergentError,
    ExhaustedError,
    NoConvergence,
    PoleError,
    PsiKitError,
)
from .oracle import evaluate_mp

EXIT_OK = 0
EXIT_NUMERIC = 2
EXIT_INPUT = 3
EXIT_FAIL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="psikit", description="Unit-argument hypergeometric and digamma series, and identity checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate one series from a case file")
    e.add_argument("subject", choices=["pfq", "psi_series", "psi_series_m", "kdf"])
    e.add_argument("casefile")
    e.add_argument("--extended", action="store_true", help="use the mpmath reference summation")
    e.add_argument("--digits", type=int, default=30)

    v = sub.add_parser("verify", help="verify one identity case")
    v.add_argument("casefile")
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--extended", action="store_true")

    s = sub.add_parser("sweep", help="seeded random sweep over one identity")
    s.add_argument("--identity", required=True)
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--count", type=_positive_int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--out", default=None, help="CSV path (stdout when omitted)")
    s.add_argument("--m", type=int, default=None, help="fix m instead of drawing it")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--s", type=int, default=None)
    s.add_argument("--sign", default=None)
    s.add_argument("--min-excess", type=float, default=0.3)
    s.add_argument("--extended", action="store_true")
    s.add_argument("--failures", default=None, help="directory for shrunk failing case files")

    g = sub.add_parser("gradcheck", help="digamma series versus finite-difference gradient")
    g.add_argument("casefile")
    g.add_argument("--h", type=float, default=1e-5)
    g.add_argument("--tol", type=float, default=None)
    return p


def _err(msg):
    print(f"psikit: {msg}", file=sys.stderr)


def cmd_eval(args) -> int:
    cf = read_casefile(args.casefile)
    sign = int(cf.get("sign", 1))
    subj = args.subject
    if subj == "psi_series_m":
        num = cf.get("c", cf.get("a", ()))
        den = cf.get("d", cf.get("b", ()))
    else:
        num, den = cf.get("a", ()), cf.get("b", ())
    m = cf.get("m", 0)
    x = None
    if subj == "kdf":
        c = cf.get("c", ())
        if len(c) != 1:
            raise CaseFileError("kdf needs its inner parameter as a one-entry vector c")
        x = c[0]
    if args.extended:
        out = evaluate_mp(subj, num, den, sign, m=m, x=x, digits=args.digits)
        print(f"value = {format_complex(complex(out.value))}")
        print(f"err_estimate = {format_float(float(out.err_bound))}")
        print(f"terms_used = {out.terms}")
        return EXIT_OK
    if subj == "pfq":
        r = series.pfq_unit(num, den, sign)
    elif subj == "psi_series":
        r = series.digamma_series(num, den, sign)
    elif subj == "psi_series_m":
        r = series.digamma_series_m(num, den, m)
    else:
        r = series.kdf_series(num, den, x, sign)
    print(f"value = {format_complex(r.value)}")
    print(f"err_estimate = {format_float(r.err_estimate)}")
    print(f"terms_used = {r.terms_used}")
    print(f"method = {r.method.value}")
    if not r.converged:
        _err("series did not reach the acceptance tolerance")
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_verify(args) -> int:
    cf = read_casefile(args.casefile)
    case = cf.to_case()
    tol = args.tol if args.tol is not None else cf.get("tol")
    rep = identities.verify(case, tol, extended=args.extended)
    sys.stdout.write(report_text([(case, rep)]))
    for d in rep.diagnostics:
        _err(d)
    _err(f"residual {rep.residual:.3e} (tol {rep.tol:.1e}): {'pass' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    m_range = (args.m, args.m) if args.m is not None else None
    sign = int(series.as_sign(args.sign)) if args.sign is not None else None
    try:
        spec = harness.SampleSpec(
            identities.IdentityId.parse(args.identity), p=args.p, m_range=m_range, seed=args.seed,
            n=args.n, s=args.s, sign=sign, min_excess=args.min_excess,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    stats = harness.sweep(spec, args.count, args.tol, extended=args.extended)
    text = report_text(zip(stats.cases, stats.reports))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.failures and stats.failures:
        os.makedirs(args.failures, exist_ok=True)
        tol = args.tol if args.tol is not None else (identities.TOL_EXTENDED if args.extended else identities.TOL_IDENTITY)
        for k, (case, _rep) in enumerate(stats.failures):
            small = harness.shrink(case, lambda c: not harness.run_case(c, tol, args.extended).passed, spec)
            path = os.path.join(args.failures, f"{spec.identity.value}_{k:04d}.case")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(format_case(small, tol=tol, seed=args.seed))
    _err(
        f"{spec.identity.value} p={spec.p}: {stats.passed}/{stats.total} passed, "
        f"worst residual {stats.worst_residual:.3e}, {stats.wall_time:.2f}s"
    )
    return EXIT_OK if stats.passed == stats.total else EXIT_FAIL


def cmd_gradcheck(args) -> int:
    if not (1e-6 <= args.h <= 1e-4):
        raise UsageError(f"--h must lie in [1e-6, 1e-4], got {args.h:g}")
    cf = read_casefile(args.casefile)
    rep = identities.gradient_form_check(cf.get("a", ()), cf.get("b", ()), cf.get("sign", 1), args.h, tol=args.tol)
    print(f"lhs = {format_complex(rep.lhs)}")
    print(f"rhs = {format_complex(rep.rhs)}")
    print(f"residual = {format_float(rep.residual)}")
    print(f"pass = {'true' if rep.passed else 'false'}")
    return EXIT_OK if rep.passed else EXIT_FAIL


_COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep, "gradcheck": cmd_gradcheck}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        _err(f"usage: {exc}")
        return EXIT_INPUT
    except ConstraintError as exc:
        _err(f"hypothesis violated: {exc.hypothesis} ({exc})")
        return EXIT_INPUT
    except (CaseFileError, PoleError, ExhaustedError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except (DivergentError, NoConvergence) as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except PsiKitError as exc:
        _err(str(exc))
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        _err(f"bad input: {exc}")
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
