"""Deciders for causal consistency, causal memory, sequential consistency and linearizability.

Every decider is an exhaustive backtracking search over small histories with
memoization on ``(placed ops, object states)``. Internally ops are indexed
``0..N-1`` and sets of ops are int bitmasks.

Foreign return values are never searched for: specs are deterministic, so
replaying a serialization through the transition functions yields the only
returns that could make it legal, and those replayed returns are the
per-process value assignment recorded in the witness.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Optional

from .history import (
    CausalOrder,
    CyclicOrder,
    DanglingRead,
    History,
    HistoryError,
    Serialization,
    close,
    is_register,
    write_into_edges,
)
from .objects import apply, same_value
from .values import encode_value

CONDITIONS = ("causal", "causal-certificate", "causal-memory", "sequential", "linearizable")

DEFAULT_MAX_OPS = 10
DEFAULT_BUDGET = 2_000_000


class SizeLimit(Exception):
    pass


class MissingTimestamps(Exception):
    pass


def default_max_ops() -> int:
    return int(os.environ.get("CCOBJ_MAX_OPS", DEFAULT_MAX_OPS))


@dataclass
class Verdict:
    condition: str
    accepted: Optional[bool]  # None means unknown (budget exhausted)
    order: Optional[CausalOrder] = None
    serializations: dict[int, Serialization] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def unknown(self) -> bool:
        return self.accepted is None

    @property
    def result(self) -> str:
        return {True: "accepted", False: "rejected", None: "unknown"}[self.accepted]

    def to_json(self) -> dict:
        witness = None
        if self.accepted:
            witness = {
                "order_edges": [list(e) for e in self.order.reduced_edges()] if self.order else None,
                "serializations": {
                    str(pid): {
                        "order": list(s.order),
                        "returns": [encode_value(r) for r in s.returns] if s.returns else None,
                    }
                    for pid, s in sorted(self.serializations.items())
                },
            }
        return {
            "condition": self.condition,
            "result": self.result,
            "accepted": self.accepted,
            "witness": witness,
            "diagnostics": self.diagnostics,
        }


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise _OutOfBudget


class _OutOfBudget(Exception):
    pass


class _Index:
    """Bitmask view of a history: op numbering, object slots and a replay step."""

    def __init__(self, h: History):
        self.h = h
        self.recs = sorted(h.ops, key=lambda r: (r.pid, r.local_index))
        self.ids = [r.op_id for r in self.recs]
        self.pos = {o: k for k, o in enumerate(self.ids)}
        self.objects = sorted(h.specs)
        slot = {name: k for k, name in enumerate(self.objects)}
        self.slot = [slot[r.inv.object] for r in self.recs]
        self.specs = [h.specs[name] for name in self.objects]
        self.init_states = tuple(s.initial_state for s in self.specs)
        self.n_ops = len(self.recs)
        self.full = (1 << self.n_ops) - 1
        # op indices of each process, in process order
        self.owned = {i: [self.pos[r.op_id] for r in h.local(i)] for i in range(1, h.n + 1)}
        # immediate process-order predecessor mask
        self.po_pred = [0] * self.n_ops
        for idxs in self.owned.values():
            for a, b in zip(idxs, idxs[1:]):
                self.po_pred[b] = 1 << a

    def step(self, states: tuple, k: int):
        s = self.slot[k]
        ret, nxt = apply(self.specs[s], states[s], self.recs[k].inv)
        return ret, states[:s] + (nxt,) + states[s + 1 :]

    def matches(self, k: int, ret) -> bool:
        want = self.recs[k].ret
        return want is None or same_value(want, ret)

    def mask(self, ops) -> int:
        m = 0
        for o in ops:
            m |= 1 << self.pos[o]
        return m

    def members(self, m: int) -> list[int]:
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return out

    def order_from_pasts(self, pasts: list[int]) -> CausalOrder:
        past = {self.ids[k]: frozenset(self.ids[j] for j in self.members(pasts[k])) for k in range(self.n_ops)}
        edges = {(a, b) for b, ps in past.items() for a in ps}
        return CausalOrder(self.ids, edges, past)


# -- causal consistency with a given order -----------------------------------


def _serialize_for(ix: _Index, pasts: list[int], pid: int, budget: _Budget) -> Optional[Serialization]:
    """Search a causal-past-constrained serialization legal for ``pid``'s own returns."""
    owned = ix.owned[pid]
    failed: set = set()

    def dfs(j, placed, states, acc):
        # j: index of the next owned op; placed: mask of ops already serialized
        if j == len(owned):
            return acc
        key = (placed, states)
        if key in failed:
            return None
        budget.tick()
        o = owned[j]
        todo = pasts[o] & ~placed
        if todo == 0:
            ret, nxt = ix.step(states, o)
            if ix.matches(o, ret):
                res = dfs(j + 1, placed | (1 << o), nxt, acc + [(o, ret)])
                if res is not None:
                    return res
        else:
            for e in ix.members(todo):
                if pasts[e] & ~placed == 0:
                    ret, nxt = ix.step(states, e)
                    res = dfs(j, placed | (1 << e), nxt, acc + [(e, ret)])
                    if res is not None:
                        return res
        failed.add(key)
        return None

    found = dfs(0, 0, ix.init_states, [])
    if found is None:
        return None
    # tail: remaining ops in lexicographic topological order
    placed = 0
    states = ix.init_states
    for e, _ in found:
        placed |= 1 << e
        _, states = ix.step(states, e)
    tail = []
    while placed != ix.full:
        e = next(e for e in ix.members(ix.full & ~placed) if pasts[e] & ~placed == 0)
        ret, states = ix.step(states, e)
        tail.append((e, ret))
        placed |= 1 << e
    seq = found + tail
    return Serialization(tuple(ix.ids[e] for e, _ in seq), pid, tuple(r for _, r in seq))


def check_causal_certificate(h: History, po: CausalOrder, budget: Optional[int] = DEFAULT_BUDGET) -> Verdict:
    """Accept iff every process has a causal-past-constrained serialization of ``po``
    in which its own operations return their recorded values."""
    ix = _Index(h)
    missing = set(ix.ids) ^ set(po.nodes)
    if missing:
        raise HistoryError(f"order and history disagree on ops: {sorted(missing)}")
    for idxs in ix.owned.values():
        for a, b in zip(idxs, idxs[1:]):
            if not po.precedes(ix.ids[a], ix.ids[b]):
                raise HistoryError(f"order misses process order {ix.ids[a]} -> {ix.ids[b]}")
    pasts = [ix.mask(po.past(o)) for o in ix.ids]
    return _certificate(ix, pasts, po, _Budget(budget))


def _certificate(ix, pasts, po, budget, condition="causal-certificate") -> Verdict:
    sers = {}
    for pid in range(1, ix.h.n + 1):
        try:
            s = _serialize_for(ix, pasts, pid, budget)
        except _OutOfBudget:
            return Verdict(condition, None, diagnostics={"budget": budget.limit, "process": pid})
        if s is None:
            return Verdict(condition, False, diagnostics={"failing_process": pid, "nodes": budget.used})
        sers[pid] = s
    return Verdict(condition, True, po, sers, {"nodes": budget.used})


# -- causal consistency, order searched --------------------------------------


def _owned_past_keys(ix: _Index, pid: int, budget: _Budget) -> list[tuple[int, ...]]:
    """All tuples (past of o_1, ..., past of o_k) realizable by an interleaving legal for ``pid``.

    Interleavings respect every process order but ignore cross-process causality,
    so this over-approximates the pasts any valid order could give ``pid``'s ops.
    """
    owned = ix.owned[pid]
    memo: dict = {}

    def dfs(j, placed, states):
        if j == len(owned):
            return frozenset({()})
        key = (placed, states)
        if key in memo:
            return memo[key]
        budget.tick()
        out = set()
        for e in ix.members(ix.full & ~placed):
            if ix.po_pred[e] & ~placed:
                continue
            ret, nxt = ix.step(states, e)
            if e == owned[j]:
                if ix.matches(e, ret):
                    out.update((placed,) + rest for rest in dfs(j + 1, placed | (1 << e), nxt))
            else:
                out.update(dfs(j, placed | (1 << e), nxt))
        res = frozenset(out)
        memo[key] = res
        return res

    keys = dfs(0, 0, ix.init_states)
    # smaller pasts first: fewer forced causal edges, more readable witnesses
    return sorted(keys, key=lambda t: (sum(bin(m).count("1") for m in t), t))


def check_causal(h: History, max_ops: Optional[int] = None, budget: Optional[int] = DEFAULT_BUDGET) -> Verdict:
    """Search for a partial order making the history causally consistent.

    Each op's causal past must equal the set of ops preceding it in its owner's
    serialization, so an order is fully determined by one owned-past key per
    process. Keys are enumerated per process, combined under the transitivity
    constraint, and each surviving combination is verified as a certificate.
    """
    if max_ops is None:
        max_ops = default_max_ops()
    if len(h) > max_ops:
        raise SizeLimit(f"history has {len(h)} ops, limit is {max_ops}")
    ix = _Index(h)
    b = _Budget(budget)
    pids = list(range(1, h.n + 1))
    try:
        keys = {pid: _owned_past_keys(ix, pid, b) for pid in pids}
    except _OutOfBudget:
        return Verdict("causal", None, diagnostics={"budget": budget, "phase": "keys"})
    for pid in pids:
        if not keys[pid]:
            return Verdict("causal", False, diagnostics={"failing_process": pid, "nodes": b.used})
    # constrained processes first
    pids.sort(key=lambda p: (len(keys[p]), p))
    pasts: list[Optional[int]] = [None] * ix.n_ops
    tried = 0

    def consistent(pid) -> bool:
        for o in ix.owned[pid]:
            po_ = pasts[o]
            for x in ix.members(po_):
                px = pasts[x]
                if px is not None and px & ~po_:
                    return False
            # o in someone's assigned past drags o's past along
            bit = 1 << o
            for x in range(ix.n_ops):
                px = pasts[x]
                if px is not None and px & bit and po_ & ~px:
                    return False
        return True

    def search(d):
        nonlocal tried
        if d == len(pids):
            tried += 1
            order = ix.order_from_pasts(pasts)
            v = _certificate(ix, list(pasts), order, b, condition="causal")
            if v.unknown:
                raise _OutOfBudget
            return v if v.accepted else None
        pid = pids[d]
        for key in keys[pid]:
            b.tick()
            for o, m in zip(ix.owned[pid], key):
                pasts[o] = m
            if consistent(pid):
                v = search(d + 1)
                if v is not None:
                    return v
        for o in ix.owned[pid]:
            pasts[o] = None
        return None

    try:
        v = search(0)
    except _OutOfBudget:
        return Verdict("causal", None, diagnostics={"budget": budget, "orders_tried": tried})
    if v is None:
        return Verdict("causal", False, diagnostics={"orders_tried": tried, "nodes": b.used})
    v.diagnostics.update(orders_tried=tried, nodes=b.used)
    return v


# -- causal memory ------------------------------------------------------------


def check_causal_memory(h: History, budget: Optional[int] = DEFAULT_BUDGET) -> Verdict:
    """Register-only causal memory: each process's view drops foreign reads and
    must serialize with every read returning the latest preceding write."""
    for name, spec in h.specs.items():
        if not is_register(spec):
            raise HistoryError(f"causal memory needs registers only; {name} is {spec.name}")
    try:
        edges = write_into_edges(h)
    except DanglingRead as e:
        return Verdict("causal-memory", False, diagnostics={"dangling_read": e.op_id, "reason": str(e)})
    try:
        po = close(edges, h)
    except CyclicOrder as e:
        return Verdict("causal-memory", False, diagnostics={"cycle": e.cycle})
    ix = _Index(h)
    pasts = [ix.mask(po.past(o)) for o in ix.ids]
    writes = 0
    for k, r in enumerate(ix.recs):
        if r.inv.op_name == "write":
            writes |= 1 << k
    b = _Budget(budget)
    sers = {}
    for pid in range(1, h.n + 1):
        elems = writes | ix.mask(r.op_id for r in h.local(pid))
        failed: set = set()

        def dfs(placed, states, acc):
            if placed == elems:
                return acc
            key = (placed, states)
            if key in failed:
                return None
            b.tick()
            for e in ix.members(elems & ~placed):
                if pasts[e] & elems & ~placed:
                    continue
                ret, nxt = ix.step(states, e)
                if ix.matches(e, ret):
                    res = dfs(placed | (1 << e), nxt, acc + [(e, ret)])
                    if res is not None:
                        return res
            failed.add(key)
            return None

        try:
            found = dfs(0, ix.init_states, [])
        except _OutOfBudget:
            return Verdict("causal-memory", None, diagnostics={"budget": budget, "process": pid})
        if found is None:
            return Verdict("causal-memory", False, diagnostics={"failing_process": pid})
        sers[pid] = Serialization(tuple(ix.ids[e] for e, _ in found), pid, tuple(r for _, r in found))
    return Verdict("causal-memory", True, po, sers, {"nodes": b.used})


# -- strong conditions ---------------------------------------------------------


def _global_search(ix: _Index, ready, budget: _Budget):
    """One serialization of all ops matching every recorded return.

    ``ready(placed, e)`` says whether ``e`` may come next.
    """
    failed: set = set()

    def dfs(placed, states, acc):
        if placed == ix.full:
            return acc
        key = (placed, states)
        if key in failed:
            return None
        budget.tick()
        for e in ix.members(ix.full & ~placed):
            if not ready(placed, e):
                continue
            ret, nxt = ix.step(states, e)
            if ix.matches(e, ret):
                res = dfs(placed | (1 << e), nxt, acc + [(e, ret)])
                if res is not None:
                    return res
        failed.add(key)
        return None

    return dfs(0, ix.init_states, [])


def _global_verdict(ix, condition, found, b, budget):
    if found is None:
        return Verdict(condition, False, diagnostics={"nodes": b.used})
    s = Serialization(tuple(ix.ids[e] for e, _ in found), None, tuple(r for _, r in found))
    return Verdict(condition, True, None, {0: s}, {"nodes": b.used})


def check_sequential(h: History, budget: Optional[int] = DEFAULT_BUDGET) -> Verdict:
    ix = _Index(h)
    b = _Budget(budget)
    try:
        found = _global_search(ix, lambda placed, e: not ix.po_pred[e] & ~placed, b)
    except _OutOfBudget:
        return Verdict("sequential", None, diagnostics={"budget": budget})
    return _global_verdict(ix, "sequential", found, b, budget)


def check_linearizable(h: History, budget: Optional[int] = DEFAULT_BUDGET) -> Verdict:
    """Backtracking that only schedules ops minimal under real-time precedence.

    Pending ops (no response) are included with an unconstrained return.
    """
    ix = _Index(h)
    for r in ix.recs:
        if r.rt_interval is None:
            raise MissingTimestamps(f"{r.op_id} has no real-time interval")
    inf = float("inf")
    inv_t = [r.rt_interval[0] for r in ix.recs]
    resp_t = [inf if r.rt_interval[1] is None else r.rt_interval[1] for r in ix.recs]
    # ops that must come before e: process order plus real-time precedence
    before = [0] * ix.n_ops
    for e in range(ix.n_ops):
        m = ix.po_pred[e]
        for f in range(ix.n_ops):
            if resp_t[f] < inv_t[e]:
                m |= 1 << f
        before[e] = m
    b = _Budget(budget)
    try:
        found = _global_search(ix, lambda placed, e: not before[e] & ~placed, b)
    except _OutOfBudget:
        return Verdict("linearizable", None, diagnostics={"budget": budget})
    return _global_verdict(ix, "linearizable", found, b, budget)


def check(h: History, condition: str, order: Optional[CausalOrder] = None, **kw) -> Verdict:
    if condition == "causal":
        return check_causal(h, **kw)
    if condition in ("causal-certificate", "causal-cert"):
        if order is None:
            raise ValueError("causal-certificate needs an order")
        return check_causal_certificate(h, order, **kw)
    if condition == "causal-memory":
        return check_causal_memory(h, **kw)
    if condition == "sequential":
        return check_sequential(h, **kw)
    if condition == "linearizable":
        return check_linearizable(h, **kw)
    raise ValueError(f"unknown condition {condition!r}")
