#!/usr/bin/env python3
"""Compute the sharp constants with error bars and print the JSON document.

Closed forms for reference: V = pi^2/2, c0 = 2 pi^2, gamma1 = 3/(4 pi),
A = 32/9.
"""
import argparse

from heisadams import QuadratureOptions, compute_constants

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--tail-radius", type=float, default=50.0)
parser.add_argument("--mc-samples", type=int, default=200_000)
parser.add_argument("--seed", type=int, default=20240801)
args = parser.parse_args()

consts = compute_constants(QuadratureOptions(
    tail_radius=args.tail_radius, mc_samples=args.mc_samples, mc_seed=args.seed))
print(consts.to_json())
