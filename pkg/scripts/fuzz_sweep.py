"""Sweep total op count and fault injection; report verdict counts and checker time.

    python3 scripts/fuzz_sweep.py --seeds 0..99 --ops 6,9,12
"""
import argparse
import time

from ccobj.cli import _parse_range, check_trace, fuzz_params
from ccobj.invariants import broadcast_violations
from ccobj.sim import generate_scenario, run_scenario

OBJECTS = ("stack", "queue", "register")
SETTINGS = [
    ("causal", "causal-cert", 0, 0),
    ("causal", "causal-cert", 2, 1),
    ("causal", "causal", 0, 0),
    ("total-order", "linearizable", 0, 0),
    ("total-order", "linearizable", 2, 1),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="0..99")
    ap.add_argument("--ops", default="6,9,12")
    ap.add_argument("--procs", default="3..5")
    args = ap.parse_args()
    lo, hi = _parse_range(args.seeds)
    procs = _parse_range(args.procs)
    print(f"{'mode':<12} {'condition':<13} {'faults':<7} {'ops':>4} {'acc':>5} {'rej':>5} {'unk':>5} "
          f"{'bcast':>6} {'ms/trace':>9}")
    for ops in (int(x) for x in args.ops.split(",")):
        for mode, cond, parts, crashes in SETTINGS:
            counts = {"accepted": 0, "rejected": 0, "unknown": 0}
            bad_bcast = 0
            spent = 0.0
            for seed in range(lo, hi + 1):
                s = generate_scenario(fuzz_params(seed, procs, ops, OBJECTS, mode, parts, crashes), seed)
                tr = run_scenario(s)
                bad_bcast += bool(broadcast_violations(tr))
                t = time.perf_counter()
                counts[check_trace(tr, cond).result] += 1
                spent += time.perf_counter() - t
            n = hi - lo + 1
            print(f"{mode:<12} {cond:<13} {f'{parts}p{crashes}c':<7} {ops:>4} {counts['accepted']:>5} "
                  f"{counts['rejected']:>5} {counts['unknown']:>5} {bad_bcast:>6} {1000 * spent / n:>9.2f}")


if __name__ == "__main__":
    main()
