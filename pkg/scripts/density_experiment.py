"""Boundary statistics of random compactly supported systems on Z.

Tracks the ratio and the boundary statistic along the index sequence and
reports the index from which both have settled.

Usage: python scripts/density_experiment.py [--trials 20] [--horizon 40] [--seed 0]
"""
import argparse
import random
from fractions import Fraction

from ratiolab import averaging as A
from ratiolab.dynamics import hopf_system


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--horizon", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = random.Random(args.seed)
    seq = A.IndexSequence()
    print("trial,limit,settled_index,nonzero_boundary_indices,upper_density")
    for t in range(args.trials):
        phi = {rng.randint(-60, 60): Fraction(rng.randint(1, 5)) for _ in range(4)}
        psi = {rng.randint(-60, 60): Fraction(rng.randint(1, 5)) for _ in range(4)}
        s = hopf_system(phi, psi)
        settled = next(i for i in range(1, args.horizon + 1) if seq.n(i) >= s.absorption_radius(0))
        nonzero = [0] * args.horizon
        for i in range(2, args.horizon + 1):
            try:
                nonzero[i - 1] = int(A.boundary_ratio_phi_i(s.ball_sum("phi", 0), i) != 0)
            except A.ZeroDenominator:
                nonzero[i - 1] = 1
        d = A.upper_density(nonzero, args.horizon)
        print(f"{t},{s.limit},{settled},{sum(nonzero)},{d.estimate}")


if __name__ == "__main__":
    main()
