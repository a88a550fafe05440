#!/usr/bin/env python3
"""Cross-validate the three surface-coefficient routes over a grid of
orders and print a summary table with the Dirichlet-power comparison."""

import argparse
import sys

from fracweyl.halfline import FractionalOrder
from fracweyl.constants import compute_weyl_coefficients


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-list", default="0.25,0.5,0.75")
    ap.add_argument("--d", type=int, default=2)
    args = ap.parse_args()
    print(f"{'s':>5} {'L1':>12} {'L2(layer)':>12} {'L2(eig)':>12} "
          f"{'L2(shift)':>12} {'tilde-L2':>12} {'worst pair':>11}")
    bad = 0
    for s_str in args.s_list.split(","):
        wc = compute_weyl_coefficients(FractionalOrder(float(s_str), args.d))
        vals = (wc.surface, wc.surface_eigenfunction_route, wc.surface_shift_route)
        worst = max(abs(a - b) / max(abs(a), abs(b))
                    for i, a in enumerate(vals) for b in vals[i + 1:])
        flag = "" if worst < 0.01 and 0 < wc.surface < wc.surface_dirichlet else "  <-- FAIL"
        bad += bool(flag)
        print(f"{s_str:>5} {wc.bulk:12.6e} {vals[0]:12.6e} {vals[1]:12.6e} "
              f"{vals[2]:12.6e} {wc.surface_dirichlet:12.6e} {worst:11.2e}{flag}")
    return 4 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
