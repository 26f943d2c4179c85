"""Ball growth in Z^2 and the Heisenberg group, with a log-log slope fit.

Usage: python scripts/growth_experiment.py [--n-max 24] [--out growth.csv]
"""
import argparse
import csv
import sys

from ratiolab import groups as G


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=24)
    p.add_argument("--out", default="-")
    args = p.parse_args(argv)

    z2 = G.ball_sizes(G.zd(2), args.n_max)
    heis = G.ball_sizes(G.heisenberg(), args.n_max)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["n", "z2", "heis", "heis_over_n4"])
    for n in range(args.n_max + 1):
        w.writerow([n, z2[n], heis[n], f"{heis[n] / max(n, 1) ** 4:.4f}"])
    lo = max(1, args.n_max // 2)
    print(f"slope Z2 on [{lo},{args.n_max}]: {G.loglog_slope(z2, lo, args.n_max):.3f}", file=sys.stderr)
    print(f"slope heis on [{lo},{args.n_max}]: {G.loglog_slope(heis, lo, args.n_max):.3f}", file=sys.stderr)
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
