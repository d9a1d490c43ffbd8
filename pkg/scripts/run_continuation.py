#!/usr/bin/env python3
"""Approach the borderline potential exponent through a_n = 4 - 1/n.

Each stage warm-starts from the previous solution; the printed drift
||u_{n+1} - u_n|| should shrink as the schedule accumulates at a = 4.
"""
import argparse

import heisadams as ha

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--grid", type=int, default=13)
parser.add_argument("--nmax", type=int, default=6)
parser.add_argument("--tol", type=float, default=1e-6)
args = parser.parse_args()

dom = ha.box_grid(args.grid)
steps = ha.critical_continuation(ha.cubic_model(), args.nmax, dom,
                                 ha.SolveOptions(tol=args.tol))
print("  n      a_n      |u_n|      drift      int f(u)u/rho^a   int F(u)/rho^a")
for s in steps:
    drift = "" if s.n == 1 else f"{s.diff_from_previous:10.4g}"
    print(f"{s.n:3d} {s.a:8.4f} {s.norm:10.4g} {drift:>10} "
          f"{s.weighted_uf:16.6g} {s.weighted_F:16.6g}")
print("tail drifts decreasing:", ha.tail_differences_decreasing(steps))
