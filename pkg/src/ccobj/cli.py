"""Command-line front end: ``run``, ``check`` and ``fuzz``.

Exit codes: 0 accepted / success, 1 rejected, 2 usage or input error,
3 unknown (search budget or size limit reached).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from . import rng, tracefile
from .checker import SizeLimit, Verdict, check, default_max_ops
from .history import HistoryError, is_register
from .objects import SpecError, spec_from_name
from .runtime import CAUSAL, MODES
from .sim import GenParams, Scenario, ScenarioError, generate_scenario, run_scenario

EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2, 3
CLI_CONDITIONS = ("causal", "causal-cert", "causal-memory", "sequential", "linearizable")


class UsageError(Exception):
    pass


def _exit_for(v: Verdict) -> int:
    return {True: EXIT_OK, False: EXIT_REJECTED, None: EXIT_UNKNOWN}[v.accepted]


def check_trace(tr, condition: str, max_ops: Optional[int] = None) -> Verdict:
    h = tr.history
    if condition == "causal-cert":
        try:
            order = tr.causal_order()
        except ValueError as e:
            raise UsageError(str(e)) from e
        return check(h, "causal-certificate", order=order)
    if condition == "causal":
        try:
            return check(h, "causal", max_ops=max_ops)
        except SizeLimit as e:
            return Verdict("causal", None, diagnostics={"size_limit": str(e)})
    return check(h, condition)


def _parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        a, b = int(lo), int(hi) if sep else int(lo)
    except ValueError:
        raise UsageError(f"bad range {text!r}, expected A..B") from None
    if b < a:
        raise UsageError(f"empty range {text!r}")
    return a, b


def cmd_run(args) -> int:
    try:
        with open(args.scenario, encoding="utf-8") as f:
            doc = json.load(f)
        s = Scenario.from_dict(doc, seed=args.seed)
        tr = run_scenario(s)
    except (OSError, json.JSONDecodeError, ScenarioError, SpecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = tracefile.dumps(tr)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    try:
        tr = tracefile.load(args.trace)
        v = check_trace(tr, args.condition, args.max_ops)
    except (OSError, tracefile.TraceFormatError, UsageError, HistoryError, SpecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # precondition failures such as MissingTimestamps
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(v.to_json(), sort_keys=True))
    return _exit_for(v)


def fuzz_params(seed: int, procs: tuple[int, int], ops: int, objects: tuple[str, ...], mode: str,
                partitions: int = 0, crashes: int = 0) -> GenParams:
    r = rng.stream(seed, 0xF022)
    n = r.randint(*procs)
    return GenParams(
        n=n,
        ops=math.ceil(ops / n),
        objects=objects,
        mode=mode,
        max_total_ops=ops,
        partitions=partitions,
        crashes=crashes,
    )


def fuzz_one(job) -> tuple[int, str, dict]:
    seed, procs, ops, objects, mode, condition, partitions, crashes, max_ops = job
    s = generate_scenario(fuzz_params(seed, procs, ops, objects, mode, partitions, crashes), seed)
    tr = run_scenario(s)
    v = check_trace(tr, condition, max_ops)
    return seed, v.result, {"n": s.n, "ops": len(tr.history), "diagnostics": v.diagnostics}


def cmd_fuzz(args) -> int:
    try:
        procs = _parse_range(args.procs)
        seeds = _parse_range(args.seeds)
        if procs[0] < 1 or args.ops < 0:
            raise UsageError("need at least one process and a non-negative op count")
        objects = tuple(o.strip() for o in args.object.split(",") if o.strip())
        if not objects:
            raise UsageError("no objects given")
        specs = [spec_from_name(o) for o in objects]
        if args.condition == "causal-memory" and not all(is_register(sp) for sp in specs):
            raise UsageError("causal-memory fuzzing needs register objects only")
    except (UsageError, SpecError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    jobs = [
        (seed, procs, args.ops, objects, args.mode, args.condition, args.partitions, args.crashes, args.max_ops)
        for seed in range(seeds[0], seeds[1] + 1)
    ]
    try:
        if args.jobs and args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as ex:
                results = list(ex.map(fuzz_one, jobs, chunksize=8))
        else:
            results = [fuzz_one(j) for j in jobs]
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    counts = {"accepted": 0, "rejected": 0, "unknown": 0}
    for _, res, _ in results:
        counts[res] += 1
    bad = [seed for seed, res, _ in results if res != "accepted"]
    if args.json:
        print(json.dumps({
            "condition": args.condition,
            "mode": args.mode,
            "seeds": list(seeds),
            "counts": counts,
            "not_accepted": [{"seed": s, "result": r, **info} for s, r, info in results if r != "accepted"],
        }, sort_keys=True))
    else:
        print(f"condition={args.condition} mode={args.mode} seeds={seeds[0]}..{seeds[1]}")
        print(f"{'accepted':>10} {'rejected':>10} {'unknown':>10}")
        print(f"{counts['accepted']:>10} {counts['rejected']:>10} {counts['unknown']:>10}")
        if bad:
            print("not accepted: " + ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else ""))
    return EXIT_OK if counts["rejected"] == 0 else EXIT_REJECTED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ccobj", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write its trace")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    r.add_argument("--out", default=None, help="trace path (default: stdout)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="check a trace against a consistency condition")
    c.add_argument("trace")
    c.add_argument("--condition", choices=CLI_CONDITIONS, required=True)
    c.add_argument("--max-ops", type=int, default=None, help=f"search size limit (default {default_max_ops()})")
    c.add_argument("--json", action="store_true", help="accepted for symmetry; output is always JSON")
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("fuzz", help="generate, run and check many seeded scenarios")
    f.add_argument("--procs", default="3..5", help="process count range A..B")
    f.add_argument("--ops", type=int, default=12, help="total op cap per scenario")
    f.add_argument("--object", default="stack,queue,register", help="comma-separated spec names")
    f.add_argument("--seeds", default="0..199", help="seed range A..B (inclusive)")
    f.add_argument("--mode", choices=MODES, default=CAUSAL)
    f.add_argument("--condition", choices=CLI_CONDITIONS, default="causal-cert")
    f.add_argument("--partitions", type=int, default=0)
    f.add_argument("--crashes", type=int, default=0)
    f.add_argument("--max-ops", type=int, default=None)
    f.add_argument("--jobs", type=int, default=1)
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_fuzz)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
