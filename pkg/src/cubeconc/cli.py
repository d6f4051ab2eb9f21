"""Command line: gen, eval, sweep, alpha, mc."""
from __future__ import annotations

import argparse
import json
import sys

from . import dist as dist_mod
from .cube import CapacityError, CubePoint, InvalidParameter, NotApplicable
from .harness import CHECKS, SweepSpec, build_distribution, load_spec, parse_grid, render_csv, run_sweep, select_y
from .montecarlo import mc_estimate_mgf, mc_estimate_tail


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _rows(text):
    # "a:b,a:b" -> [(a, b), ...]
    out = []
    for chunk in text.split(","):
        a, b = chunk.split(":")
        out.append((float(a), float(b)))
    return out


def _add_dist_args(p):
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", help="distribution JSON file")
    g.add_argument("--kind", choices=["dense", "product", "markov", "delta_mix"])
    g.add_argument("--n", type=int)
    g.add_argument("--eps", type=float, default=0.0, help="delta_mix remainder mass")
    g.add_argument("--p0", help="product marginals P(x_k=0), comma-separated, or 'random'")
    g.add_argument("--init", type=float, default=0.5, help="markov P(x_1=0)")
    g.add_argument("--rows", help="markov rows 'p00:p01,...' (random when omitted)")
    p.add_argument("--seed", type=int, default=0)


def _source(args) -> dict:
    if args.dist:
        return {"path": args.dist}
    if not args.kind:
        raise InvalidParameter("give --dist or --kind")
    src = {"kind": args.kind, "n": args.n, "seed": args.seed}
    if args.kind == "product" and args.p0:
        src["p0"] = "random" if args.p0 == "random" else _floats(args.p0)
    if args.kind == "markov":
        src["initial_p0"] = args.init
        if args.rows:
            src["transitions"] = _rows(args.rows)
    if args.kind == "delta_mix":
        src["eps"] = args.eps
    if args.kind in ("product", "delta_mix", "dense") and args.n is None and "p0" not in src:
        raise InvalidParameter("--n is required for generated distributions")
    return src


def _add_sweep_args(p, single: bool):
    p.add_argument("--y", default="all", help="bit-string list, 'all', or 'sample:K'")
    p.add_argument("--t", default="0.25:2:0.25", help="t grid a:b:step or list")
    if single:
        p.add_argument("--check", required=True, choices=CHECKS)
    else:
        p.add_argument("--checks", default="inductive", help=f"comma list from {','.join(CHECKS)}")
        p.add_argument("--spec", help="SweepSpec JSON file (overrides other flags)")
    p.add_argument("--c", help="tail deviations (default n/2)")
    p.add_argument("--enlarge", help="alpha enlargement radii (default 0..n)")
    p.add_argument("--sets", type=int, default=4, help="random sets per row for set/talagrand")
    p.add_argument("--complement", action="store_true", help="also evaluate at the complement of each y")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")


def cmd_gen(args):
    mu = build_distribution(_source(args), args.seed)
    text = dist_mod.dumps(mu)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _sweep(args, checks):
    spec = SweepSpec(dist=_source(args), y=args.y, t=args.t, checks=checks, seed=args.seed, out=args.out,
                     c=args.c, enlarge=args.enlarge, sets=args.sets, complement=args.complement)
    return spec


def _emit(result):
    if not result.path:
        sys.stdout.write(render_csv(result.rows, result.header))
    bad = result.violations
    print(f"{len(result.rows)} rows, {len(bad)} violations", file=sys.stderr)
    return result.exit_code


def cmd_eval(args):
    return _emit(run_sweep(_sweep(args, [args.check])))


def cmd_sweep(args):
    if args.spec:
        spec = load_spec(args.spec)
        if args.out:
            spec.out = args.out
    else:
        spec = _sweep(args, args.checks)
    return _emit(run_sweep(spec))


def cmd_alpha(args):
    from . import sets as st

    mu = build_distribution(_source(args), args.seed)
    radii = [int(v) for v in parse_grid(args.enlarge)] if args.enlarge else list(range(mu.n + 1))
    out = []
    for eps in radii:
        try:
            out.append({"eps": eps, "alpha": st.concentration_alpha(mu, eps), "exact": True})
        except CapacityError:
            out.append({"eps": eps, "alpha_lower_bound": st.alpha_lower_bound(mu, eps), "exact": False})
    print(json.dumps({"n": mu.n, "kind": mu.kind, "values": out}, indent=2))
    return 0


def cmd_mc(args):
    mu = build_distribution(_source(args), args.seed)
    y = select_y(mu.n, args.y, args.seed)
    res = []
    for yy in y:
        if args.t is not None:
            est = mc_estimate_mgf(mu, yy, args.t, args.samples, args.seed, args.delta)
        else:
            c = args.c if args.c is not None else mu.n / 2
            est = mc_estimate_tail(mu, yy, c, args.samples, args.seed, args.delta)
        res.append({"y": str(yy), "quantity": est.quantity, "estimate": est.estimate,
                    "radius": est.radius, "samples": est.samples, "delta": est.delta})
    print(json.dumps(res, indent=2))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="cubeconc", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen", help="write a distribution JSON")
    _add_dist_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="run a single check")
    _add_dist_args(p)
    _add_sweep_args(p, single=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="run several checks over y and t grids")
    _add_dist_args(p)
    _add_sweep_args(p, single=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("alpha", help="concentration function (exact for n <= 4)")
    _add_dist_args(p)
    p.add_argument("--enlarge", help="enlargement radii (default 0..n)")
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("mc", help="Monte Carlo tail or MGF estimate")
    _add_dist_args(p)
    p.add_argument("--y", default="sample:1")
    p.add_argument("--c", type=float)
    p.add_argument("--t", type=float, help="estimate the centered MGF at t instead of a tail")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--delta", type=float, default=0.01)
    p.set_defaults(func=cmd_mc)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidParameter, CapacityError, NotApplicable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
