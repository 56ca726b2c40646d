"""``ballavg`` command line: synth, norm, equiv, slope, gradient, maximal, check.

Exit codes: 0 success, 2 usage or parameter-domain error, 3 a numerical
invariant failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional

from . import io as gio
from .functionals import FUNCTIONALS, SpaceParams, evaluate
from .grid import make_ladder

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 2, 3


class UsageError(Exception):
    pass


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _ladder(args, N: int):
    return make_ladder(N, args.k_min, getattr(args, "k_max", None))


# --- synth -------------------------------------------------------------------


def cmd_synth(args) -> int:
    from .synth import GeneratorSpec, generate

    kind = "poly_patch" if args.kind == "poly" else args.kind
    params = {}
    if kind in ("weierstrass", "cusp"):
        if args.alpha0 is None:
            raise UsageError(f"{kind} needs --alpha0")
        params["alpha0"] = args.alpha0
    if kind == "weierstrass":
        params.update(K=args.K, seed=args.seed)
    elif kind == "bandlimited":
        params.update(kmax=args.kmax, decay=args.decay, seed=args.seed)
    elif kind == "poly_patch":
        params.update(degree=args.degree, window=args.window, center=args.center)
    elif kind == "gaussian":
        params.update(width=args.width, center=args.center)
    elif kind == "cusp":
        params["center"] = args.center
    spec = GeneratorSpec(kind, args.N, args.dim, params)
    f = generate(spec)
    header = gio.parse_kv(spec.to_text())
    text = gio.format_gf1(f, header)
    if args.out:
        Path(args.out).write_text(text)
        sys.stdout.write(spec.to_text())
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- norm --------------------------------------------------------------------


def _params(args) -> SpaceParams:
    return SpaceParams(
        args.alpha,
        args.p,
        args.q,
        r=getattr(args, "r", None),
        lam=getattr(args, "lam", None),
        beta=getattr(args, "beta", None),
    )


def cmd_norm(args) -> int:
    f, _ = gio.read_gf1(args.file)
    if args.functional == "gstar" and math.isinf(args.q):
        raise UsageError("the g*_lambda functional requires q in (1, inf); got q=inf")
    if args.functional == "area" and args.r is not None and args.r >= args.q:
        raise UsageError(f"the inner-average form needs r in [1, q); got r={args.r}, q={args.q} (use area_tilde for r=q)")
    if args.functional == "difference" and args.alpha >= 1:
        sys.stderr.write("note: first differences saturate at order 1; alpha >= 1 gives a growing, flagged value\n")
    params = _params(args)
    if args.functional == "gstar":
        lam = args.lam or 2.0
        if lam <= args.q / min(args.q, args.p):
            sys.stderr.write(
                f"note: lambda={lam} <= q/min(q,p)={args.q / min(args.q, args.p):g}; equivalence is only guaranteed above it\n"
            )
    ladder = _ladder(args, f.N)
    kw = {}
    if args.bank:
        from .kernels import build_filter_bank

        kw["bank"] = build_filter_bank(args.bank)
    rep = evaluate(args.functional, f, params, ladder, **kw)
    sys.stdout.write(rep.to_text())
    if args.field_out:
        gio.write_gf1(args.field_out, rep.field, {"functional": rep.functional})
    return EXIT_OK


# --- equiv -------------------------------------------------------------------


def cmd_equiv(args) -> int:
    from .analysis import equivalence_study
    from .synth import read_manifest, standard_corpus

    resolutions = [int(x) for x in args.resolutions.split(",")]
    if args.manifest:
        corpus = read_manifest(Path(args.manifest).read_text())
        if not corpus:
            raise UsageError(f"manifest {args.manifest} lists no generators")
    else:
        corpus = standard_corpus(resolutions[0])
    params = SpaceParams(args.alpha, args.p, args.q)
    banks = ("alternate",) if args.both_banks else ()
    rep = equivalence_study(corpus, params, resolutions, k_min=args.k_min, extra_banks=banks)
    for m in rep.excluded:
        sys.stderr.write(f"notice: {m} is constant; excluded from the ratio matrix\n")
    sys.stdout.write(rep.to_table())
    if args.csv:
        Path(args.csv).write_text(rep.to_csv())
    return EXIT_OK if rep.all_finite() else EXIT_INVARIANT


# --- slope -------------------------------------------------------------------


def cmd_slope(args) -> int:
    from .analysis import estimate_alpha

    f, _ = gio.read_gf1(args.file)
    ladder = _ladder(args, f.N)
    fit = estimate_alpha(f, ladder, args.statistic, ell=args.ell, p=args.p)
    sys.stdout.write(fit.to_text())
    return EXIT_OK


# --- gradient ----------------------------------------------------------------


def cmd_gradient(args) -> int:
    from .pointwise import Variant, extract_gradient, import_gradient, verify_implications

    f, _ = gio.read_gf1(args.file)
    ladder = _ladder(args, f.N)
    variant = Variant(args.variant)
    kw = {}
    if variant is not Variant.HAJLASZ:
        kw = dict(c=args.c, C=args.C, const=args.const, r=args.r)
    if args.certificate:
        g, _ = gio.read_gf1(args.certificate)
        cand = import_gradient(f, g, args.alpha, ladder, variant, **kw)
    else:
        cand = extract_gradient(f, args.alpha, ladder, variant, **kw)
    status = EXIT_OK if cand.violations == 0 else EXIT_INVARIANT
    _emit(cand.to_text(), args.out)
    if args.out:
        sys.stdout.write(f"variant={cand.variant.value}\nviolations={cand.violations}\nchecks={cand.checks}\n")
    if args.verify and cand.statement is not None:
        rep = verify_implications(f, cand, ladder)
        sys.stderr.write(rep.to_text())
        if rep.total_violations:
            status = EXIT_INVARIANT
    return status


# --- maximal -----------------------------------------------------------------


def cmd_maximal(args) -> int:
    from .grid import lp_norm
    from .pointwise import hl_maximal

    f, _ = gio.read_gf1(args.file)
    ladder = _ladder(args, f.N)
    mf = hl_maximal(f, ladder)
    _emit(gio.format_gf1(mf.Mf, {"operator": "maximal", "k_min": ladder.k_min, "k_max": ladder.k_max}), args.out)
    if args.out:
        sys.stdout.write(f"lp_ratio_p2={lp_norm(mf.Mf, 2) / max(lp_norm(f, 2), 1e-300)!r}\n")
    return EXIT_OK


# --- check -------------------------------------------------------------------


def cmd_check(args) -> int:
    from contextlib import nullcontext

    from .checks import SUITES, run_suites
    from .kernels import inject_fault

    names = list(SUITES) if args.suite == "all" else [args.suite]
    ctx = inject_fault() if args.inject_fault else nullcontext()
    with ctx:
        results = run_suites(names, trials=args.trials, seed=args.seed)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print(f"{'ALL PASS' if ok else 'FAILURES'} ({sum(r.passed for r in results)}/{len(results)})")
    return EXIT_OK if ok else EXIT_INVARIANT


# --- parser ------------------------------------------------------------------


def _add_ladder(p, k_max=False):
    p.add_argument("--k-min", dest="k_min", type=int, default=2)
    if k_max:
        p.add_argument("--k-max", dest="k_max", type=int, default=None)


def _add_space(p, q_default=2.0):
    p.add_argument("--alpha", type=_float, required=True)
    p.add_argument("--p", type=_float, default=2.0)
    p.add_argument("--q", type=_float, default=q_default)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ballavg", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a test function as GF1", allow_abbrev=False)
    s.add_argument("--kind", required=True, choices=["weierstrass", "bandlimited", "poly", "poly_patch", "cusp", "gaussian"])
    s.add_argument("--N", type=int, default=1024)
    s.add_argument("--dim", type=int, default=1)
    s.add_argument("--alpha0", type=_float)
    s.add_argument("--K", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kmax", type=int, default=8)
    s.add_argument("--decay", type=_float, default=2.0)
    s.add_argument("--degree", type=int, default=2)
    s.add_argument("--window", type=_float, default=0.25)
    s.add_argument("--center", type=_float, default=0.5)
    s.add_argument("--width", type=_float, default=0.05)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    n = sub.add_parser("norm", help="evaluate one functional", allow_abbrev=False)
    n.add_argument("file")
    n.add_argument("--functional", required=True, choices=FUNCTIONALS)
    _add_space(n)
    n.add_argument("--r", type=_float)
    n.add_argument("--lambda", dest="lam", type=_float)
    n.add_argument("--beta", type=_float)
    n.add_argument("--bank", choices=["standard", "alternate"])
    n.add_argument("--field-out", dest="field_out")
    _add_ladder(n, k_max=True)
    n.set_defaults(func=cmd_norm)

    e = sub.add_parser("equiv", help="equivalence-ratio study over a corpus", allow_abbrev=False)
    e.add_argument("--manifest")
    _add_space(e)
    e.add_argument("--resolutions", default="512,1024")
    e.add_argument("--csv")
    e.add_argument("--both-banks", dest="both_banks", action="store_true")
    _add_ladder(e)
    e.set_defaults(func=cmd_equiv)

    sl = sub.add_parser("slope", help="fit the smoothness exponent", allow_abbrev=False)
    sl.add_argument("file")
    sl.add_argument("--statistic", choices=["ball", "higher", "difference"], default="ball")
    sl.add_argument("--ell", type=int, default=2)
    sl.add_argument("--p", type=_float, default=math.inf)
    _add_ladder(sl, k_max=True)
    sl.set_defaults(func=cmd_slope)

    g = sub.add_parser("gradient", help="extract or verify a pointwise gradient", allow_abbrev=False)
    g.add_argument("file")
    g.add_argument("--alpha", type=_float, required=True)
    g.add_argument(
        "--variant",
        default="SUP_POINT",
        choices=["SUP_POINT", "SUP_NBHD", "BALL_SUP", "BALL_AVG", "BALL_RAVG", "POINT_CTR", "HAJLASZ"],
    )
    g.add_argument("--c", type=_float, default=1.0)
    g.add_argument("--C", type=_float, default=1.0)
    g.add_argument("--const", type=_float, default=1.0)
    g.add_argument("--r", type=_float, default=1.0)
    g.add_argument("--certificate", help="GF1 file with a candidate g to check instead of extracting one")
    g.add_argument("--verify", action="store_true", help="also check every implied statement")
    g.add_argument("--out")
    _add_ladder(g, k_max=True)
    g.set_defaults(func=cmd_gradient)

    m = sub.add_parser("maximal", help="discrete maximal function", allow_abbrev=False)
    m.add_argument("file")
    m.add_argument("--out")
    _add_ladder(m, k_max=True)
    m.set_defaults(func=cmd_maximal)

    c = sub.add_parser("check", help="run the invariant suites", allow_abbrev=False)
    c.add_argument("--suite", default="all")
    c.add_argument("--trials", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--inject-fault", dest="inject_fault", action="store_true")
    c.set_defaults(func=cmd_check)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    from .checks import SUITES

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check" and args.suite not in ("all", *SUITES):
        parser.error(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
