"""Independent re-validation of checker witnesses.

Nothing here reuses the search code or the closure routine of
:mod:`ccobj.history`: the order is re-closed with a plain reachability pass and
each serialization is replayed op by op.
"""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .history import History, OpId, is_register
from .objects import apply, same_value


def _reach(h: History, edges: Iterable[tuple[OpId, OpId]]) -> dict[OpId, set]:
    """Strict predecessors of each op under process order plus ``edges``."""
    direct: dict[OpId, set] = {o: set() for o in h.op_ids}
    for local in h.locals:
        for a, b in zip(local, local[1:]):
            direct[b.op_id].add(a.op_id)
    for a, b in edges:
        direct[b].add(a)
    pred = {}
    for o in direct:
        seen, stack = set(), list(direct[o])
        while stack:
            x = stack.pop()
            if x not in seen:
                seen.add(x)
                stack.extend(direct[x])
        pred[o] = seen
    return pred


def _replay(h: History, order: Sequence[OpId]) -> list:
    states = {name: spec.initial_state for name, spec in h.specs.items()}
    rets = []
    for o in order:
        inv = h[o].inv
        r, states[inv.object] = apply(h.specs[inv.object], states[inv.object], inv)
        rets.append(r)
    return rets


def _matches(rec, r) -> bool:
    return rec.ret is None or same_value(rec.ret, r)


def validate_causal_serialization(
    h: History,
    edges: Iterable[tuple[OpId, OpId]],
    pid: int,
    order: Sequence[OpId],
    returns: Optional[Sequence] = None,
) -> bool:
    """Is ``order`` a causal-past-constrained serialization for ``pid`` whose
    replay gives ``pid``'s ops their recorded returns?

    If ``returns`` is given it is the claimed assignment and must equal the
    replayed return of every op.
    """
    pred = _reach(h, edges)
    if any(o in pred[o] for o in pred):
        return False
    if sorted(order) != sorted(h.op_ids) or len(set(order)) != len(order):
        return False
    pos = {o: k for k, o in enumerate(order)}
    for b in order:
        if any(pos[a] > pos[b] for a in pred[b]):
            return False
    for rec in h.local(pid):
        if set(order[: pos[rec.op_id]]) != pred[rec.op_id]:
            return False
    rets = _replay(h, order)
    for o, r in zip(order, rets):
        if h[o].pid == pid and not _matches(h[o], r):
            return False
    if returns is not None:
        if len(returns) != len(order) or not all(same_value(a, b) for a, b in zip(returns, rets)):
            return False
    return True


def validate_global_serialization(h: History, order: Sequence[OpId], real_time: bool = False) -> bool:
    if sorted(order) != sorted(h.op_ids) or len(set(order)) != len(order):
        return False
    pos = {o: k for k, o in enumerate(order)}
    for local in h.locals:
        for a, b in zip(local, local[1:]):
            if pos[a.op_id] > pos[b.op_id]:
                return False
    if real_time:
        for a in h.ops:
            for b in h.ops:
                resp = a.rt_interval[1]
                if resp is not None and resp < b.rt_interval[0] and pos[a.op_id] > pos[b.op_id]:
                    return False
    return all(_matches(h[o], r) for o, r in zip(order, _replay(h, order)))


def validate_memory_serialization(h: History, edges, pid: int, order: Sequence[OpId]) -> bool:
    """A serialization of the writes plus ``pid``'s reads where each read sees the latest write."""
    if not all(is_register(s) for s in h.specs.values()):
        return False
    want = [r.op_id for r in h.ops if r.inv.op_name == "write" or r.pid == pid]
    if sorted(order) != sorted(want) or len(set(order)) != len(order):
        return False
    pred = _reach(h, edges)
    pos = {o: k for k, o in enumerate(order)}
    for b in order:
        if any(a in pos and pos[a] > pos[b] for a in pred[b]):
            return False
    last = {name: spec.initial_state for name, spec in h.specs.items()}
    for o in order:
        rec = h[o]
        if rec.inv.op_name == "write":
            last[rec.inv.object] = rec.inv.args[0]
        elif not _matches(rec, last[rec.inv.object]):
            return False
    return True


def _write_into(h: History):
    edges = []
    for r in h.ops:
        if r.inv.op_name != "read" or r.ret is None:
            continue
        ws = [w.op_id for w in h.ops if w.inv.object == r.inv.object and w.inv.op_name == "write"
              and same_value(w.inv.args[0], r.ret)]
        if len(ws) > 1:
            return None
        edges += [(w, r.op_id) for w in ws]
    return edges


def check_witness(h: History, v) -> bool:
    """Re-validate an accepted :class:`ccobj.checker.Verdict` from scratch."""
    if not v.accepted:
        return False
    if v.condition in ("causal", "causal-certificate"):
        edges = v.order.reduced_edges()
        if set(v.serializations) != set(range(1, h.n + 1)):
            return False
        return all(
            validate_causal_serialization(h, edges, pid, s.order, s.returns)
            for pid, s in v.serializations.items()
        )
    if v.condition == "causal-memory":
        edges = _write_into(h)
        if edges is None:
            return False
        if set(v.serializations) != set(range(1, h.n + 1)):
            return False
        return all(validate_memory_serialization(h, edges, pid, s.order) for pid, s in v.serializations.items())
    if v.condition in ("sequential", "linearizable"):
        (s,) = v.serializations.values()
        return validate_global_serialization(h, s.order, real_time=v.condition == "linearizable")
    return False
