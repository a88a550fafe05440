#!/usr/bin/env python3
"""Two-term verification campaign on the unit square.

Runs the lattice pipeline for a list of fractional exponents and prints
the fitted coefficients against their analytic targets.
"""

import argparse
import sys

from fracweyl.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-list", default="0.5", help="comma-separated exponents")
    ap.add_argument("--lattice-points", type=int, default=64)
    ap.add_argument("--outdir", default=".")
    args = ap.parse_args()
    worst = 0
    for s in args.s_list.split(","):
        out = f"{args.outdir}/square_s{s}.json"
        code = cli_main(["verify-square", "--s", s,
                         "--lattice-points", str(args.lattice_points),
                         "--format", "json", "--output", out])
        print(f"s={s}: exit {code}, report {out}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
