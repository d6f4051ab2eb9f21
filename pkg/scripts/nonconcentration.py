"""Two-atom laws do not concentrate: exact tails against the independent-case bound.

For delta_mix(n, eps) at y = 0 the exact tail P(|d_H - E d_H| >= c) is
compared with 2 exp(-c^2 / 2n). Beyond the dense cap the tail is estimated by
sequential sampling instead.

    python3 scripts/nonconcentration.py --n 8,12,16,40 --eps 0,0.1 --frac 0.45
"""
import argparse
import math
import sys

from cubeconc.cube import DENSE_MAX_N, CubePoint
from cubeconc.dist import make_delta_mix
from cubeconc.hamming import hoeffding_tail, tail_bound
from cubeconc.montecarlo import mc_estimate_tail


def _floats(text):
    return [float(v) for v in text.split(",")]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", default="8,12,16,40")
    ap.add_argument("--eps", default="0,0.1")
    ap.add_argument("--frac", type=float, default=0.45, help="deviation c as a fraction of n")
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print("n,eps,c,tail,method,radius,hoeffding,violated")
    for n in (int(v) for v in args.n.split(",")):
        for eps in _floats(args.eps):
            mu = make_delta_mix(n, eps)
            y = CubePoint.zeros(n)
            c = args.frac * n
            bound = hoeffding_tail(n, c)
            if n <= min(DENSE_MAX_N, 20):
                tail, method, radius = tail_bound(mu, y, c).exact_tail, "exact", 0.0
            else:
                est = mc_estimate_tail(mu, y, c, args.samples, args.seed)
                tail, method, radius = est.estimate, "mc", est.radius
            print(f"{n},{eps},{c:g},{tail:.6f},{method},{radius:.4g},{bound:.6f},{int(tail - radius > bound)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
