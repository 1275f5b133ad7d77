"""Command-line front end.

Exit codes: 0 for success or a positive verdict, 1 when the mathematical
answer is no (e.g. the domain is not tubular), 2 for bad input or usage.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .analysis import classify_domain, lift, scan_defects, verify_solution
from .errors import LineFieldError, RoughFieldError
from .geometry import DomainSpec, FourierCurve
from .grid import divergence_tensor, lp_norm
from .io import load_domain, load_field, save_field, save_raster, save_report
from .patterns import PATTERN_NAMES, make_pattern

log = logging.getLogger("linefield")


class UsageError(Exception):
    pass


def _params(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--params expects key=value, got {item!r}")
        try:
            out[key] = float(val) if any(ch in val for ch in ".eE") or val.lstrip("+-") in ("inf", "nan") else int(val)
        except ValueError:
            raise UsageError(f"--params value for {key!r} is not a number: {val!r}") from None
    return out


def _write_report(path, report):
    if path:
        save_report(path, report)


# --------------------------------------------------------------------------
def cmd_solve(args):
    spec = load_domain(args.domain)
    if spec.mode != "tubular":
        raise UsageError("solve needs a tubular-mode domain (curve plus delta)")
    field = make_pattern("tubular", spec, args.h)
    save_field(args.out, field)
    rep = verify_solution(field)
    _write_report(args.report, rep)
    print(f"solve: {int(field.mask.sum())} cells, verification {'pass' if rep.passed else 'FAIL'}")
    return 0 if rep.passed else 1


def cmd_verify(args):
    spec = load_domain(args.domain) if args.domain else None
    field = load_field(args.field, spec)
    spec = spec or field.grid.spec
    hs = None
    if args.refine:
        if args.refine < 0:
            raise UsageError("--refine must be non-negative")
        if field.name not in PATTERN_NAMES or spec is None:
            raise UsageError("--refine needs a field generated by 'pattern' or 'solve' on a known domain")
        hs = [field.grid.h / 2**k for k in range(args.refine + 1)]
    rep = verify_solution(field, spec, hs)
    _write_report(args.report, rep)
    v = rep.verdict
    msg = "pass" if v["pass"] else f"FAIL ({v['reason']})"
    if v["untested"]:
        msg += f"; untested: {', '.join(v['untested'])}"
    print(f"verify: {msg}")
    return 0 if v["pass"] else 1


def cmd_classify(args):
    spec = load_domain(args.domain)
    if args.samples < 64:
        raise UsageError("--samples must be at least 64")
    verdict = classify_domain(spec, n_samples=args.samples, h=args.h)
    _write_report(args.report, verdict)
    if verdict.is_tubular:
        print(f"classify: tubular, delta = {verdict.delta:.6g}, mean T = {verdict.T_stats['mean']:.6g}")
        return 0
    print(f"classify: not tubular ({verdict.reason})")
    return 1


def _default_domain(name):
    if name == "tubular":
        return DomainSpec(FourierCurve.circle(1.0), 0.4)
    return DomainSpec(FourierCurve.circle(1.0), mode="raw")


def cmd_pattern(args):
    spec = load_domain(args.domain) if args.domain else _default_domain(args.name)
    if args.name == "tubular" and spec.mode != "tubular":
        raise UsageError("the tubular pattern needs a tubular-mode domain")
    field = make_pattern(args.name, spec, args.h, _params(args.params))
    save_field(args.out, field)
    if args.raster:
        save_raster(args.raster, field)
    print(f"pattern: {args.name} with {int(field.mask.sum())} cells written to {args.out}")
    return 0


def cmd_scan(args):
    field = load_field(args.field)
    scan = scan_defects(field)
    try:
        res = lift(field)
        lift_rep = res.to_dict()
        orientable = res.orientable
    except RoughFieldError as exc:
        lift_rep = {"orientable": None, "error": str(exc)}
        orientable = False
    grid = field.grid
    dext = np.linalg.norm(divergence_tensor(field.tensor(), grid, extended=True, mask=field.mask), axis=-1)
    everywhere = np.ones(grid.shape, bool)
    l1 = lp_norm(dext, 1, everywhere, grid.h)
    strong = dext * grid.h > 0.25  # cells carrying O(1/h) divergence
    conc = {"L1": l1, "L2_sq": lp_norm(dext, 2, everywhere, grid.h, root=False),
            "max": float(dext.max()), "strong_cells": int(strong.sum()),
            "strong_L1_fraction": float(dext[strong].sum() * grid.h**2 / l1) if l1 > 0 else 0.0}
    if args.map:
        save_raster(args.map, np.where(grid.inside | (dext > 0), dext, np.nan))
    report = {"defects": scan["defects"], "boundary_holes": scan["boundary_holes"], "rough_plaquettes": scan["n_rough"],
              "lift": lift_rep, "divergence": conc}
    _write_report(args.report, report)
    charges = ", ".join(f"{d['charge']:+g} at ({d['x']:.3g}, {d['y']:.3g})" for d in scan["defects"]) or "none"
    print(f"scan: defects {charges}; {'orientable' if orientable else 'NOT orientable'}")
    return 0 if orientable else 1


def cmd_norms(args):
    if not args.eps_list:
        raise UsageError("--eps-list needs at least one value")
    eps = np.asarray(args.eps_list, dtype=float)
    if np.any((eps <= 0) | (eps >= args.radius)):
        raise UsageError("every eps must lie in (0, radius)")
    if not args.p >= 1:
        raise UsageError("--p must be >= 1")
    field = load_field(args.field)
    grid = field.grid
    cx = args.center[0] if args.center else float(field.params.get("cx", 0.0))
    cy = args.center[1] if args.center else float(field.params.get("cy", 0.0))
    d = divergence_tensor(field.tensor(), grid, extended=False, mask=field.mask)
    X, Y = grid.centers()
    r = np.hypot(X - cx, Y - cy)
    rows = []
    print(f"{'eps':>10} {'ln(1/eps)':>10} {'int |div P|^p':>14}")
    for e in eps:
        region = field.mask & (r > e) & (r < args.radius)
        val = lp_norm(d, args.p, region, grid.h, root=False)
        rows.append({"eps": float(e), "value": val})
        print(f"{e:10.4g} {np.log(1 / e):10.4f} {val:14.6f}")
    report = {"p": args.p, "center": [cx, cy], "radius": args.radius, "rows": rows}
    if len(eps) >= 2:
        slope = float(np.polyfit(np.log(1 / eps), [row["value"] for row in rows], 1)[0])
        report["slope_vs_log_inv_eps"] = slope
        print(f"slope against ln(1/eps): {slope:.6f}")
    _write_report(args.report, report)
    return 0


# --------------------------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="linefield", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="exact solution on a tubular domain")
    s.add_argument("--domain", required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("verify", help="check the solution conditions for a field file")
    s.add_argument("--field", required=True)
    s.add_argument("--domain")
    s.add_argument("--refine", type=int, default=0, help="halvings of h for the L2 growth test")
    s.add_argument("--report")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("classify", help="decide whether a domain is tubular")
    s.add_argument("--domain", required=True)
    s.add_argument("--samples", type=int, default=256)
    s.add_argument("--h", type=float, default=None, help="ray marching scale (default: bbox/512)")
    s.add_argument("--report")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("pattern", help="write a catalog field")
    s.add_argument("--name", required=True, choices=PATTERN_NAMES)
    s.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    s.add_argument("--h", type=float, default=1 / 64)
    s.add_argument("--domain")
    s.add_argument("--out", required=True)
    s.add_argument("--raster", help="also write a PPM image")
    s.set_defaults(func=cmd_pattern)

    s = sub.add_parser("scan", help="singularity scan of a field file")
    s.add_argument("--field", required=True)
    s.add_argument("--report")
    s.add_argument("--map", help="write |div P| (zero-extended) as a PGM image")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("norms", help="L^p norms of div P on punctured disks")
    s.add_argument("--field", required=True)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--eps-list", type=float, nargs="*", default=None)
    s.add_argument("--radius", type=float, default=1.0)
    s.add_argument("--center", type=float, nargs=2, default=None)
    s.add_argument("--report")
    s.set_defaults(func=cmd_norms)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, LineFieldError, OSError) as exc:
        print(f"linefield {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
