"""How many y satisfy the independent-case MGF bound, next to the counting formula.

    python3 scripts/count_good_y.py --n-max 8 --t 1
"""
import argparse
import sys

from cubeconc.dist import make_delta_mix, make_random_markov, make_uniform
from cubeconc.hamming import count_good_y


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--t", type=float, default=1.0)
    args = ap.parse_args(argv)
    print("law,n,count,cube,formula,marginals_half,hypotheses_t2,hypotheses_t2half,degenerate")
    for n in range(2, args.n_max + 1):
        for name, mu in (("uniform", make_uniform(n)), ("delta_mix", make_delta_mix(n, 0.0)),
                         ("markov", make_random_markov(n, n, initial_p0=0.5))):
            r = count_good_y(mu, args.t)
            print(f"{name},{n},{r.count},{1 << n},{r.formula},{int(r.marginals_half)},"
                  f"{int(r.hypotheses_hold)},{int(r.hypotheses_hold_half)},{int(r.degenerate)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
