"""Build the stacked construction stage by stage and print its statistics.

Optionally writes one JSON snapshot per stage.

Usage: python scripts/tower_experiment.py [--stages 3] [--snapshots DIR]
"""
import argparse
import time
from pathlib import Path

from ratiolab.dynamics import build_tower, check_compatibility, verify_alternation


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--snapshots", default="")
    args = p.parse_args(argv)

    t0 = time.perf_counter()
    history, plans = build_tower(args.stages)
    print(f"built {len(history)} stages in {time.perf_counter() - t0:.1f}s")
    print("stage,r_n,pieces,units,phi_l1,psi_l1,integral_phi")
    for s in history:
        print(f"{s.n},{s.r},{len(s.pieces)},{len(s.unit_elements())},{s.norm('phi')},{s.norm('psi')},{s.integral('phi')}")
    print("transition,N,v,H,sign")
    for i, plan in enumerate(plans, start=1):
        print(f"{i}->{i + 1},{plan.N},{plan.v},{len(plan.H)},{plan.sign:+d}")
    viol = verify_alternation(history)
    compat = sum(len(check_compatibility(a, b, samples=300)) for a, b in zip(history, history[1:]))
    print(f"alternation violations: {len(viol)}, compatibility failures: {compat}")
    if args.snapshots:
        out = Path(args.snapshots)
        out.mkdir(parents=True, exist_ok=True)
        for s in history:
            (out / f"stage{s.n}.json").write_text(s.to_json())


if __name__ == "__main__":
    main()
