"""The nine acceptance criteria, each at its stated scale and time limit.

A summary line per criterion is printed at the end of the pytest run.
"""
import itertools
import time

from ccobj.checker import (
    check_causal, check_causal_certificate, check_causal_memory, check_linearizable, check_sequential,
)
from ccobj.cli import fuzz_params
from ccobj.golden import LISTED_SERIALIZATIONS, memory_history, stack_history, stack_order
from ccobj.history import close, constrained_serializations, process_order_edges
from ccobj import rng
from ccobj.invariants import broadcast_violations
from ccobj.objects import is_legal
from ccobj.sim import (
    GenParams, NetConfig, Partition, Scenario, ScriptOp, generate_scenario, run_scenario, run_with_replicas,
)
from ccobj.values import BOTTOM, DONE
from ccobj.witness import check_witness, validate_causal_serialization

import oracles
from gen import random_history, random_order_edges, seeded

FUZZ_OBJECTS = ("stack", "queue", "register")


def _fuzz(mode):
    traces = []
    for seed in range(200):
        s = generate_scenario(fuzz_params(seed, (3, 5), 12, FUZZ_OBJECTS, mode), seed)
        traces.append(run_scenario(s))
    return traces


def test_stack_example(criterion):
    criterion(1, "stack example: search, certificate, witnesses and the three listed serializations")
    t = time.perf_counter()
    h, po = stack_history(), stack_order()
    v = check_causal(h)
    cert = check_causal_certificate(h, po)
    edges = po.reduced_edges()
    listed = {
        pid: validate_causal_serialization(h, edges, pid, [o for o, _ in s], [r for _, r in s])
        for pid, s in LISTED_SERIALIZATIONS.items()
    }
    elapsed = time.perf_counter() - t
    assert len(h) == 8
    assert v.accepted and check_witness(h, v)
    assert cert.accepted and check_witness(h, cert)
    assert elapsed < 5.0
    assert listed == {1: True, 2: True, 3: True}, f"listed serializations valid per process: {listed}"


def test_concurrent_writes_example(criterion):
    criterion(2, "concurrent register writes: 8 in-range combinations accepted, out-of-range rejected")
    t = time.perf_counter()
    for combo in itertools.product((1, 2), repeat=3):
        h = memory_history(*combo)
        assert check_causal_memory(h).accepted, combo
        assert check_causal(h).accepted, combo
    # out of range: the initial value 0, the R2-only value 3, and an unused 4
    wrongly_accepted = []
    for combo in itertools.product((0, 1, 2, 3, 4), repeat=3):
        if set(combo) <= {1, 2}:
            continue
        h = memory_history(*combo)
        if check_causal_memory(h).accepted is not False or check_causal(h).accepted is not False:
            wrongly_accepted.append(combo)
    assert time.perf_counter() - t < 10.0
    assert wrongly_accepted == [], f"out-of-range combinations accepted: {wrongly_accepted}"


def test_causal_mode_runs_certify(criterion):
    criterion(3, "200 causal-mode fuzz seeds certified by their vector-clock order")
    t = time.perf_counter()
    results = {"accepted": 0, "rejected": 0, "unknown": 0}
    sizes = set()
    for tr in _fuzz("causal"):
        sizes.add((tr.history.n, len(tr.history)))
        results[check_causal_certificate(tr.history, tr.causal_order()).result] += 1
    assert results == {"accepted": 200, "rejected": 0, "unknown": 0}
    assert {n for n, _ in sizes} == {3, 4, 5} and max(k for _, k in sizes) == 12
    assert time.perf_counter() - t < 60.0


def test_total_order_runs_linearize(criterion):
    criterion(4, "200 total-order fuzz seeds linearizable")
    t = time.perf_counter()
    results = [check_linearizable(tr.history).result for tr in _fuzz("total-order")]
    assert results.count("accepted") == 200
    assert time.perf_counter() - t < 60.0


def test_inclusion_hierarchy(criterion):
    criterion(5, "linearizable => sequential => causal on 600 random histories of at most 8 ops")
    counts = {"lin": 0, "seq": 0, "cau": 0}
    for seed in range(600):
        h = random_history(seeded(seed, 5), max_ops=8, max_procs=4)
        assert len(h) <= 8
        lin, seq, cau = check_linearizable(h).accepted, check_sequential(h).accepted, check_causal(h).accepted
        assert not (lin and not seq), seed
        assert not (seq and not cau), seed
        counts["lin"] += lin
        counts["seq"] += seq
        counts["cau"] += cau
    # the sample separates the classes, so the implications are not vacuous
    assert counts["lin"] < counts["seq"] < counts["cau"] < 600


def test_write_free_memory_is_sequential(criterion):
    criterion(6, "200 concurrent-write-free register traces: causal memory and sequential")
    accepted = 0
    for seed in range(200):
        r = rng.stream(seed, 6)
        p = GenParams(n=r.randint(2, 4), ops=r.randint(2, 4), objects=("register", "register"),
                      concurrent_write_free=True)
        h = run_scenario(generate_scenario(p, seed)).history
        assert check_causal_memory(h).accepted, seed
        accepted += 1
        assert check_sequential(h).accepted, seed
    assert accepted >= 200


def test_broadcast_invariants(criterion):
    criterion(7, "broadcast invariants on 500 schedules with partitions and crashes")
    partitioned = crashed = 0
    for seed in range(500):
        r = rng.stream(seed, 7)
        n = r.randint(2, 5)
        p = GenParams(
            n=n, ops=r.randint(1, 5), objects=("stack", "register", "counter"),
            mode=r.choice(["causal", "total-order"]),
            partitions=r.randint(1, 2), crashes=r.randint(0, 1), delay_max=r.randint(1, 10),
        )
        s = generate_scenario(p, seed)
        partitioned += bool(s.net.partitions)
        tr = run_scenario(s)
        crashed += bool(tr.crashed)
        assert broadcast_violations(tr) == [], seed
    assert partitioned == 500 and crashed > 100


def test_partition_availability(criterion):
    criterion(8, "fully partitioned 2-process causal run completes with legal op logs")
    script = [
        [ScriptOp(0, "S", "push", ("a",)), ScriptOp(2, "S", "pop"), ScriptOp(4, "S", "pop"), ScriptOp(6, "C", "inc")],
        [ScriptOp(1, "S", "push", ("b",)), ScriptOp(3, "C", "inc"), ScriptOp(5, "C", "read"), ScriptOp(9, "S", "pop")],
    ]
    heal = 10_000
    s = Scenario(n=2, objects={"S": "stack", "C": "counter"}, script=script,
                 net=NetConfig(1, 3, [Partition(0, heal, ((1,), (2,)))]))
    tr, reps = run_with_replicas(s)
    ops = tr.history.ops
    assert len(ops) == 8
    assert all(r.ret is not None and r.rt_interval[1] < heal for r in ops)
    for rep in reps.values():
        for name, spec in rep.specs.items():
            assert is_legal(spec, [a for a in rep.op_log if a.op.object == name])
    # nothing crosses the partition: each side sees only its own ops
    assert [r.ret for r in tr.history.local(1)] == [DONE, "a", BOTTOM, DONE]
    assert [r.ret for r in tr.history.local(2)] == [DONE, DONE, 1, "b"]


def test_segment_enumeration_matches_brute_force(criterion):
    criterion(9, "segment-based serialization enumeration equals permutation filtering on 120 cases")
    sizes = []
    for seed in range(120):
        pick = seeded(seed, 9)
        h = random_history(pick, max_ops=7, max_procs=3, timed=False)
        po = close(list(process_order_edges(h)) + random_order_edges(pick, h), h)
        pasts = {o: po.past(o) for o in h.op_ids}
        sizes.append(len(h))
        for pid in range(1, h.n + 1):
            fast = list(constrained_serializations(po, h, pid))
            assert len(fast) == len(set(fast))
            assert set(fast) == oracles.constrained(h, pasts, pid), (seed, pid)
    assert max(sizes) == 7 and len(sizes) >= 100
