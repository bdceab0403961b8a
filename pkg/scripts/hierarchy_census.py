"""Classify random small histories by the strongest condition they meet.

Also compares causal memory with searched causal consistency on register-only
histories and prints any disagreement.

    python3 scripts/hierarchy_census.py --samples 1000 --max-ops 7
"""
import argparse
import pathlib
import sys
from collections import Counter

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))

from gen import random_history, seeded  # noqa: E402

from ccobj.checker import check_causal, check_causal_memory, check_linearizable, check_sequential  # noqa: E402


def strongest(h) -> str:
    if check_linearizable(h).accepted:
        return "linearizable"
    if check_sequential(h).accepted:
        return "sequential"
    if check_causal(h).accepted:
        return "causal only"
    return "none"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--max-ops", type=int, default=7)
    args = ap.parse_args()
    census = Counter(strongest(random_history(seeded(s, 1), max_ops=args.max_ops, max_procs=4))
                     for s in range(args.samples))
    print("strongest condition met:")
    for k in ("linearizable", "sequential", "causal only", "none"):
        print(f"  {k:<13} {census[k]:>6}")
    agree = Counter()
    for s in range(args.samples):
        h = random_history(seeded(s, 2), max_ops=args.max_ops, max_procs=4, objects="R", timed=False)
        cm, cc = check_causal_memory(h).accepted, check_causal(h).accepted
        agree[cm, cc] += 1
        if cm != cc:
            print(f"  seed {s}: causal-memory={cm} causal={cc}")
    print("registers, (causal-memory, causal):", dict(agree))


if __name__ == "__main__":
    main()
