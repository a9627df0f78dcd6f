#!/usr/bin/env python3
"""Exhaustive isoperimetric verification on small tori.

Enumerates every v-subset of Z_k^n and reports the minimal closure weight and
maximal inner-core weight per weight class, next to the fractional-ball
benchmarks.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from emstencil.oracles import exhaustive_isoperimetry


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--weight-cap", type=int, default=8)
    ap.add_argument("--s", type=int, default=1)
    ap.add_argument("--budget", type=int, default=10**8)
    args = ap.parse_args()
    verdicts = exhaustive_isoperimetry(args.k, args.n, args.weight_cap, args.s, args.budget)
    print(f"Z_{args.k}^{args.n}, weights 1..{args.weight_cap}, s={args.s}")
    print(f"{'v':>3} {'min closure':>12} {'ball bound':>11} {'max core':>9} "
          f"{'ball bound':>11} {'ball minimal?':>14} {'ball maximal?':>14}")
    bad = 0
    for v in verdicts:
        print(f"{v.weight:>3} {v.min_closure:>12} {v.closure_bound:>11.3f} "
              f"{v.max_core:>9} {v.core_bound:>11.3f} "
              f"{str(v.ball_is_closure_minimizer):>14} {str(v.ball_is_core_maximizer):>14}")
        if not (v.closure_ok and v.core_ok):
            bad += 1
            print(f"    COUNTEREXAMPLE: {v}")
    print("no counterexamples" if not bad else f"{bad} COUNTEREXAMPLES")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
