import pytest
from hypothesis import given, settings, strategies as st

from ccobj.golden import stack_history, stack_order
from ccobj.history import (
    AmbiguousWrite, BudgetExceeded, CyclicOrder, DanglingRead, History, HistoryError, OpRecord, close,
    constrained_serializations, is_linear_extension, linear_extensions, make_op_id, op_key,
    process_order_edges, segment_structure, write_into_edges,
)
from ccobj.objects import Invocation, register, stack
from ccobj.values import DONE

import oracles
from gen import random_order_edges, seeded


def test_op_ids():
    assert make_op_id(2, 5) == "p2.5"
    assert op_key("p10.2") == (10, 2)
    with pytest.raises(ValueError):
        op_key("q1.0")


def test_record_validation():
    with pytest.raises(HistoryError):
        OpRecord(1, 0, Invocation("S", "pop", ()), "a", (5, 5))
    assert OpRecord(1, 0, Invocation("S", "pop", ()), None, (5, None)).pending


def test_history_rejects_unknown_object():
    with pytest.raises(HistoryError):
        History.from_lists({"S": stack()}, [("Q", "pop", [], 1)])


def test_two_by_two_grid_has_six_extensions():
    h = History.from_lists({"S": stack()}, [("S", "push", [1], DONE)] * 2, [("S", "push", [2], DONE)] * 2)
    po = close(process_order_edges(h), h)
    exts = list(linear_extensions(po, po.nodes))
    assert len(exts) == 6 == len(set(exts))
    assert exts == sorted(exts, key=lambda e: [op_key(x) for x in e])
    with pytest.raises(BudgetExceeded):
        list(linear_extensions(po, po.nodes, budget=5))


def test_cycle_is_reported():
    h = History.from_lists({"S": stack()}, [("S", "push", [1], DONE)], [("S", "push", [2], DONE)])
    with pytest.raises(CyclicOrder) as e:
        close([("p1.0", "p2.0"), ("p2.0", "p1.0")], h)
    assert set(e.value.cycle) == {"p1.0", "p2.0"}


def test_stack_order_pasts():
    po = stack_order()
    assert po.past("p1.2") == {"p1.0", "p1.1", "p2.0", "p2.1", "p3.0"}
    assert po.concurrent("p2.0", "p3.0")
    assert po.precedes("p1.0", "p3.1")


def test_segments_of_stack_example():
    # derived by hand from the order's pasts
    h, po = stack_history(), stack_order()
    assert segment_structure(po, h, 2) == [
        {"p1.0"}, set(), set(), {"p1.1", "p1.2", "p3.0", "p3.1"},
    ]
    assert segment_structure(po, h, 1)[1] == {"p2.0", "p2.1", "p3.0"}


def test_write_into():
    h = History.from_lists(
        {"R": register()},
        [("R", "write", [1], DONE)],
        [("R", "read", [], 1), ("R", "read", [], 0)],
    )
    assert write_into_edges(h) == {("p1.0", "p2.0")}
    with pytest.raises(DanglingRead):
        write_into_edges(h.with_returns({"p2.1": 9}))
    dup = History.from_lists({"R": register()}, [("R", "write", [1], DONE)], [("R", "write", [1], DONE)])
    with pytest.raises(AmbiguousWrite):
        write_into_edges(dup)


def _random_order(seed, max_ops=6):
    from gen import random_history

    pick = seeded(seed, 11)
    h = random_history(pick, max_ops=max_ops, timed=False)
    return h, close(list(process_order_edges(h)) + random_order_edges(pick, h), h)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_closure_matches_reachability(seed):
    h, po = _random_order(seed)
    pasts = oracles.reach(h.op_ids, po.sorted_edges())
    assert all(po.past(o) == pasts[o] for o in h.op_ids)
    for o in h.op_ids:  # downward closed
        assert all(po.past(x) <= po.past(o) for x in po.past(o))
    assert close(po.reduced_edges(), h) == po


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_segments_partition_and_serializations_are_constrained(seed):
    h, po = _random_order(seed)
    for pid in range(1, h.n + 1):
        segs = segment_structure(po, h, pid)
        owned = {r.op_id for r in h.local(pid)}
        flat = [x for s in segs for x in s]
        assert len(flat) == len(set(flat)) and set(flat) | owned == set(h.op_ids)
        for ser in constrained_serializations(po, h, pid):
            assert is_linear_extension(po, ser)
            for k, o in enumerate(ser):
                if o in owned:
                    assert frozenset(ser[:k]) == po.past(o)
