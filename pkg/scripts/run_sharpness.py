#!/usr/bin/env python3
"""Sharpness probe: exponential functional over the plateau family.

Columns above the threshold exponent A(1 - a/4) grow with the inner-radius
index k; columns below it flatten.  Writes the k x beta matrix as CSV.
"""
import argparse

import heisadams as ha
from heisadams.extremals import probe_to_csv

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--a", type=float, default=0.0)
parser.add_argument("--grid", type=int, default=33)
parser.add_argument("--ks", type=int, nargs="+", default=[2, 4, 8, 16, 32])
parser.add_argument("--beta-fracs", type=float, nargs="+", default=[0.75, 1.0, 1.25],
                    help="multiples of the threshold A(1-a/4)")
parser.add_argument("--out", default="sharpness.csv")
args = parser.parse_args()

threshold = (32.0 / 9.0) * (1.0 - args.a / 4.0)
betas = [f * threshold for f in args.beta_fracs]
rows = ha.sharpness_probe(args.a, betas, args.ks, grid=ha.ball_grid(args.grid))
probe_to_csv(rows, args.out)

for k in args.ks:
    line = [f"{r.value:12.4g}" for r in rows if r.k == k]
    norm = next(r.normEstimate for r in rows if r.k == k)
    print(f"k={k:3d}  " + " ".join(line) + f"   |u|={norm:.3f}")
print(f"threshold A(1-a/4) = {threshold:.6f}; wrote {args.out}")
