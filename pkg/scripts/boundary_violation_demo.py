#!/usr/bin/env python3
"""How often does S-hat exceed 2 under predetermined outcomes?

Runs violation studies for a boundary mixture (exact S = 2: violations near
50% at every sample size) and a sub-boundary model (exact S = 1.8: violations
die out as n grows), printing one table per generator.
"""

import argparse
import math

from bellsim.lhv import boundary_mixture_model, sign_cosine_model
from bellsim.stats import generator_from_lhv, significance_curve

SUB_BOUNDARY_ANGLES = (0.0, math.pi / 20, math.pi, 5 * math.pi / 4)  # exact S = 1.8


def print_curve(title, generator, n_values, trials, seed):
    result = significance_curve(generator, n_values, trials, seed)
    print(f"\n{title}  (exact S = {generator.exact_s:.4f}, trials = {trials})")
    print(f"{'n':>8} {'P(S-hat > 2)':>14} {'95% CI':>22} {'mean S':>9} {'z':>8}")
    for row in result.rows:
        ci = f"[{row.ci_lo:.3f}, {row.ci_hi:.3f}]"
        print(f"{row.n:>8} {row.frequency:>14.4f} {ci:>22} {row.mean_s:>9.4f} {row.z:>8.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
    args = parser.parse_args()

    boundary = generator_from_lhv(boundary_mixture_model())
    print_curve("Boundary mixture", boundary, args.n, args.trials, args.seed)

    sub = generator_from_lhv(sign_cosine_model(*SUB_BOUNDARY_ANGLES))
    print_curve("Sub-boundary sign-cosine", sub, args.n, args.trials, args.seed)


if __name__ == "__main__":
    main()
