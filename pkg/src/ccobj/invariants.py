"""Broadcast-layer invariants, re-derived from a trace's delivery records alone.

Happened-before over broadcasts is rebuilt from scratch: ``m' -> m`` when the
sender of ``m`` delivered ``m'`` before broadcasting ``m`` (own earlier
broadcasts included), closed transitively.
"""
from __future__ import annotations

from .history import op_key
from .runtime import CAUSAL, TOTAL_ORDER
from .sim import Trace


class InvariantViolation(AssertionError):
    pass


def happened_before(tr: Trace) -> dict[str, set]:
    h = tr.history
    inv_t = {r.op_id: r.rt_interval[0] for r in h.ops}
    direct: dict[str, set] = {}
    for r in h.ops:
        pid, o = r.pid, r.op_id
        seq = tr.deliveries.get(pid, [])
        times = tr.delivery_times.get(pid)
        if tr.mode == CAUSAL or times is None:
            # self-delivery happens at broadcast time
            before = seq[: seq.index(o)] if o in seq else list(seq)
        else:
            # deliveries at the invoke tick precede the invocation (arrivals sort first)
            before = [d for d, t in zip(seq, times) if t <= inv_t[o] and d != o]
        direct[o] = set(before) | {x.op_id for x in h.local(pid)[: r.local_index]}
    hb: dict[str, set] = {}

    def visit(o):
        if o not in hb:
            hb[o] = set()
            acc = set()
            for d in direct[o]:
                acc.add(d)
                acc |= visit(d)
            hb[o] = acc
        return hb[o]

    for o in direct:
        visit(o)
    return hb


def broadcast_violations(tr: Trace) -> list[str]:
    h = tr.history
    out = []
    known = set(h.op_ids)
    hb = happened_before(tr)
    for pid, seq in sorted(tr.deliveries.items()):
        if len(set(seq)) != len(seq):
            out.append(f"p{pid}: duplicate delivery")
        for o in seq:
            if o not in known:
                out.append(f"p{pid}: delivered {o}, never broadcast")
        pos = {o: k for k, o in enumerate(seq)}
        last = {}
        for o in seq:
            if o not in known:
                continue
            sender, idx = op_key(o)
            if idx != last.get(sender, -1) + 1:
                out.append(f"p{pid}: FIFO broken for sender p{sender} at {o}")
            last[sender] = idx
            for d in hb[o]:
                if d not in pos or pos[d] > pos[o]:
                    out.append(f"p{pid}: {o} delivered before its causal predecessor {d}")
        times = tr.delivery_times.get(pid)
        if times is not None and any(a > b for a, b in zip(times, times[1:])):
            out.append(f"p{pid}: delivery times go backwards")
    crashed = set(tr.crashed)
    for pid in range(1, h.n + 1):
        if pid not in crashed and set(tr.deliveries.get(pid, [])) != known:
            missing = sorted(known - set(tr.deliveries.get(pid, [])), key=op_key)
            out.append(f"p{pid}: never delivered {missing}")
    if tr.mode == TOTAL_ORDER:
        seqs = sorted(tr.deliveries.values(), key=len)
        longest = seqs[-1] if seqs else []
        for s in seqs:
            if s != longest[: len(s)]:
                out.append("total order: delivery sequences diverge")
                break
    return out


def assert_broadcast_invariants(tr: Trace) -> None:
    v = broadcast_violations(tr)
    if v:
        raise InvariantViolation("; ".join(v[:5]))
