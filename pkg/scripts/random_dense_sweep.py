"""Inductive, small-variance and positive-correlation checks over random dense laws.

Writes one CSV row per (n, t) with the smallest relative slack seen and the
number of violations, e.g.

    python3 scripts/random_dense_sweep.py --laws 200 --out dense.csv
"""
import argparse
import csv
import sys
from dataclasses import dataclass

import numpy as np

from cubeconc.cube import CubePoint
from cubeconc.dist import make_random_dense
from cubeconc.hamming import REL_TOL, inductive_bound, pc_theorem_check, small_variance_bound


@dataclass
class Config:
    laws: int = 200
    n_min: int = 2
    n_max: int = 8
    ys: int = 4
    ts: tuple = (0.25, 0.5, 1.0, 2.0)
    seed: int = 0


def run(cfg: Config):
    stats = {}
    for i in range(cfg.laws):
        n = cfg.n_min + i % (cfg.n_max - cfg.n_min + 1)
        mu = make_random_dense(n, cfg.seed + i)
        rng = np.random.default_rng([cfg.seed, i])
        for idx in rng.integers(0, 1 << n, size=cfg.ys):
            y = CubePoint(n, int(idx))
            for t in cfg.ts:
                s = stats.setdefault((n, t), {"cases": 0, "min_inductive": np.inf, "min_smallvar": np.inf,
                                              "pc_applicable": 0, "violations": 0})
                _, ind = inductive_bound(mu, y, t)
                _, sv = small_variance_bound(mu, y, t)
                pc = pc_theorem_check(mu, y, t)
                s["cases"] += 1
                s["min_inductive"] = min(s["min_inductive"], ind.slack)
                s["min_smallvar"] = min(s["min_smallvar"], sv.slack)
                s["pc_applicable"] += pc.applicable
                s["violations"] += (not ind.passed) + (not sv.passed) + (pc.applicable and pc.slack < -REL_TOL)
    return stats


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--laws", type=int, default=200)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    stats = run(Config(laws=args.laws, n_max=args.n_max, seed=args.seed))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "t", "cases", "min_slack_inductive", "min_slack_smallvar", "pc_applicable", "violations"])
    for (n, t), s in sorted(stats.items()):
        w.writerow([n, t, s["cases"], f"{s['min_inductive']:.6g}", f"{s['min_smallvar']:.6g}",
                    s["pc_applicable"], s["violations"]])
    total = sum(s["violations"] for s in stats.values())
    print(f"violations: {total}", file=sys.stderr)
    return 1 if total else 0


if __name__ == "__main__":
    sys.exit(main())
