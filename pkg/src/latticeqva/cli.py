"""Command-line interface.

Subcommands:
  verify  CONFIG             run the configured identity suites, emit a report
  ope     CONFIG --left .. --right ..   print field coefficients
  smatrix CONFIG             print the Yang-Baxter operator on generator pairs
  phi     --p SERIES | --r N all checks for one associate

Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .deform import DeformationMap, ModuleStructure
from .errors import ConfigInvalid, LatticeQVAError
from .fock import State, parse_state, render_state
from .report import Report, emit_report
from .scalars import mpq, render_scalar
from .series import LaurentSeries
from .suites import Context, run_suites, suite_phi
from .vertex import Engine


def _build_parser():
    ap = argparse.ArgumentParser(prog="latticeqva",
                                 description="Exact verifier for lattice vertex algebra "
                                             "deformations.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the configured identity suites")
    v.add_argument("config")
    v.add_argument("--format", choices=("json", "text"), default="json")
    v.add_argument("--out", help="write the report to a file instead of stdout")
    v.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (breaks byte-determinism)")
    v.add_argument("--suites", help="comma-separated override of the suite list")

    o = sub.add_parser("ope", help="print Y(left,x)right coefficients")
    o.add_argument("config")
    o.add_argument("--left", required=True)
    o.add_argument("--right", required=True)
    o.add_argument("--algebra", choices=("VL", "BL", "BLeps"), default="VL")
    o.add_argument("--deformed", help="name of a configured deformation map")
    o.add_argument("--window", default=None, help="lo..hi (default: configured window)")

    s = sub.add_parser("smatrix", help="print S(x) on generator tensor pairs")
    s.add_argument("config")
    s.add_argument("--deformed", help="deformation map name (default: first nonzero)")
    s.add_argument("--pairs", choices=("generators",), default="generators")
    s.add_argument("--order", type=int, default=None, help="series truncation order")

    p = sub.add_parser("phi", help="run the formal-calculus checks for one associate")
    p.add_argument("--p", help="polynomial p(x), e.g. '1+x' or 'x^-1'")
    p.add_argument("--r", type=int, help="use p(x) = x^(r+1)")
    p.add_argument("--check", default="all", choices=("all",))
    p.add_argument("--zorder", type=int, default=6)
    p.add_argument("--window", default="-8..8")
    return ap


def _parse_window(text, default):
    if not text:
        return default
    lo, _, hi = text.partition("..")
    return int(lo), int(hi)


def _parse_poly(text: str) -> LaurentSeries:
    coeffs = {}
    for piece, sign in _terms(text):
        piece = piece.strip().replace("*", "")
        if "x" in piece:
            coef, _, rest = piece.partition("x")
            exp = int(rest.lstrip("^")) if rest else 1
            c = mpq(coef) if coef else mpq(1)
        else:
            exp, c = 0, mpq(piece)
        coeffs[exp] = coeffs.get(exp, 0) + sign * c
    return LaurentSeries.from_poly("x", coeffs)


def _terms(text):
    out, cur, sign = [], "", 1
    depth = 0
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip():
            out.append((cur, sign))
            cur, sign = "", (1 if ch == "+" else -1)
        elif ch in "+-" and depth == 0:
            sign = sign if ch == "+" else -sign
        else:
            cur += ch
    if cur.strip():
        out.append((cur, sign))
    return out


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    suites = args.suites.split(",") if args.suites else cfg.suites
    ctx = cfg.context()
    records = run_suites(ctx, suites)
    report = Report(cfg.name, records)
    payload = emit_report(report, args.format, timings=args.timings)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0 if report.all_pass() else 1


def cmd_ope(args) -> int:
    cfg = load_config(args.config)
    ctx = cfg.context()
    lo, hi = _parse_window(args.window, ctx.window())
    left = parse_state(args.left, cfg.lattice.rank)
    right = parse_state(args.right, cfg.lattice.rank)
    if args.deformed:
        if args.deformed not in cfg.fmaps:
            raise ConfigInvalid(f"no deformation named {args.deformed!r}")
        M = ModuleStructure.ymf(cfg.fmaps[args.deformed])
        xd = ctx.D.deformed_xd(M, left, right, hi)
    else:
        xd = ctx.eng.apply_field(args.algebra, left, right, hi)
    for e in range(lo, hi + 1):
        row = xd.get(e)
        if row:
            print(f"x^{{{e}}}: {render_state(State(row))}")
    return 0


def cmd_smatrix(args) -> int:
    cfg = load_config(args.config)
    ctx = cfg.context()
    name = args.deformed or next((n for n in cfg.fmaps if not cfg.fmaps[n].is_zero()),
                                 next(iter(cfg.fmaps), None))
    if name is None:
        raise ConfigInvalid("no deformation maps configured")
    f = cfg.fmaps[name]
    hi = args.order if args.order is not None else ctx.trunc["zorder"]
    print(f"S(x) for deformation '{name}' on generator pairs (through x^{hi})")
    for (nb, b) in ctx.core_gens:
        for (na, a) in ctx.core_gens:
            tensor = State({(mb, ma): cb * ca for mb, cb in b.terms.items()
                            for ma, ca in a.terms.items()})
            xd = ctx.D.s_apply_xd(f, tensor, hi)
            terms = []
            for e in sorted(xd):
                for (m1, m2), c in sorted(xd[e].items()):
                    from .fock import render_mono
                    terms.append(f"x^{e}·{render_scalar(c)}·{render_mono(m1)}⊗{render_mono(m2)}")
            print(f"  S({nb} ⊗ {na}) = " + (" + ".join(terms) if terms else "0"))
    return 0


def cmd_phi(args) -> int:
    if (args.p is None) == (args.r is None):
        print("phi: exactly one of --p or --r is required", file=sys.stderr)
        return 2
    W = _parse_window(args.window, (-8, 8))
    Z = args.zorder
    trunc = {"xlo": W[0], "xhi": W[1], "zorder": Z, "maxWeight": 2, "coordBox": 1}
    from .lattice import Lattice
    from .scalars import CyclotomicField
    ctx = Context(Lattice([[2]]), CyclotomicField(2), {}, [], trunc,
                  {"seed": 0, "pairs": 4, "triples": 4, "tensorTriples": 2})
    records = suite_phi(ctx)
    if args.r is not None:
        from .phicalc import phi_r_closed, pi_phi
        a = phi_r_closed(args.r, Z, W)
        from .suites import _f_r
        f = pi_phi(_f_r(args.r), a)
        print(f"pi(F_{args.r}) = {f!r}")
    else:
        from .phicalc import associate_expand
        p = _parse_poly(args.p)
        a = associate_expand(p, Z, W)
        print(f"phi(x,z) coefficients for p = {p!r}:")
        for n, g in enumerate(a.table):
            print(f"  z^{n}: {g!r}")
    ok = True
    for r in records:
        mark = "PASS" if r.status == "pass" else "FAIL"
        ok = ok and r.status == "pass"
        print(f"{mark} {r.instance}")
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "ope":
            return cmd_ope(args)
        if args.command == "smatrix":
            return cmd_smatrix(args)
        if args.command == "phi":
            return cmd_phi(args)
    except ConfigInvalid as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, LatticeQVAError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
