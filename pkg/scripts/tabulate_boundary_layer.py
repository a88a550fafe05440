#!/usr/bin/env python3
"""Tabulate the boundary-layer profile for a list of orders."""

import argparse
import sys

from fracweyl.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s-list", default="0.25,0.5,0.75")
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--outdir", default=".")
    args = ap.parse_args()
    worst = 0
    for s in args.s_list.split(","):
        out = f"{args.outdir}/layer_s{s}_d{args.d}.csv"
        code = cli_main(["layer", "--s", s, "--d", str(args.d),
                         "--output", out, "--plot-script"])
        print(f"s={s}: exit {code}, table {out}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
