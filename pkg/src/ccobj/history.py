"""Operation histories, causal orders and constrained linear extensions."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .objects import Invocation, SeqSpec, same_value
from .values import Value, fmt_value

OpId = str
Edge = tuple[OpId, OpId]

_OPID_RE = re.compile(r"^p(\d+)\.(\d+)$")


class HistoryError(Exception):
    pass


class AmbiguousWrite(HistoryError):
    pass


class DanglingRead(HistoryError):
    def __init__(self, msg, op_id=None):
        super().__init__(msg)
        self.op_id = op_id


class CyclicOrder(HistoryError):
    def __init__(self, cycle: Sequence[OpId]):
        super().__init__("cycle: " + " -> ".join(cycle))
        self.cycle = list(cycle)


class BudgetExceeded(Exception):
    pass


def make_op_id(pid: int, local_index: int) -> OpId:
    return f"p{pid}.{local_index}"


def op_key(op_id: OpId) -> tuple[int, int]:
    """Sort key for op ids; orders by (pid, local index)."""
    m = _OPID_RE.match(op_id)
    if not m:
        raise ValueError(f"bad op id {op_id!r}")
    return int(m.group(1)), int(m.group(2))


@dataclass(frozen=True)
class OpRecord:
    pid: int
    local_index: int
    inv: Invocation
    ret: Optional[Value]
    rt_interval: Optional[tuple[int, Optional[int]]] = None

    def __post_init__(self):
        if self.pid < 1 or self.local_index < 0:
            raise HistoryError(f"bad position p{self.pid}.{self.local_index}")
        if self.rt_interval is not None:
            lo, hi = self.rt_interval
            if hi is not None and not lo < hi:
                raise HistoryError(f"{self.op_id}: invoke time {lo} not before response {hi}")

    @property
    def op_id(self) -> OpId:
        return make_op_id(self.pid, self.local_index)

    @property
    def pending(self) -> bool:
        return self.ret is None

    def __str__(self) -> str:
        args = ",".join(map(fmt_value, self.inv.args))
        ret = "?" if self.ret is None else fmt_value(self.ret)
        return f"{self.inv.object}.{self.inv.op_name}_{self.pid}({args}){ret}"


@dataclass(frozen=True)
class History:
    """``locals[i-1]`` is the local history of process ``i``."""

    n: int
    specs: Mapping[str, SeqSpec]
    locals: tuple[tuple[OpRecord, ...], ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "locals", tuple(tuple(l) for l in self.locals))
        if len(self.locals) != self.n:
            raise HistoryError(f"expected {self.n} local histories, got {len(self.locals)}")
        by_id = {}
        for i, local in enumerate(self.locals, start=1):
            for k, rec in enumerate(local):
                if rec.pid != i or rec.local_index != k:
                    raise HistoryError(f"record {rec.op_id} misplaced at p{i}[{k}]")
                if rec.inv.object not in self.specs:
                    raise HistoryError(f"{rec.op_id}: unknown object {rec.inv.object!r}")
                by_id[rec.op_id] = rec
        object.__setattr__(self, "_by_id", by_id)

    @classmethod
    def from_lists(cls, specs, *locals_: Sequence[tuple]) -> "History":
        """Build from per-process lists of ``(object, op, args, ret[, (t0, t1)])``."""
        recs = []
        for i, local in enumerate(locals_, start=1):
            row = []
            for k, item in enumerate(local):
                obj, op, args, ret = item[:4]
                rt = item[4] if len(item) > 4 else None
                row.append(OpRecord(i, k, Invocation(obj, op, tuple(args)), ret, rt))
            recs.append(tuple(row))
        return cls(len(recs), dict(specs), tuple(recs))

    def __getitem__(self, op_id: OpId) -> OpRecord:
        return self._by_id[op_id]

    def __contains__(self, op_id) -> bool:
        return op_id in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)

    @property
    def ops(self) -> list[OpRecord]:
        return [rec for local in self.locals for rec in local]

    @property
    def op_ids(self) -> list[OpId]:
        return [rec.op_id for rec in self.ops]

    def local(self, pid: int) -> tuple[OpRecord, ...]:
        return self.locals[pid - 1]

    def with_returns(self, rets: Mapping[OpId, Value]) -> "History":
        locals_ = tuple(
            tuple(
                OpRecord(r.pid, r.local_index, r.inv, rets.get(r.op_id, r.ret), r.rt_interval)
                for r in local
            )
            for local in self.locals
        )
        return History(self.n, self.specs, locals_)


class CausalOrder:
    """A DAG over a history's op ids, queried through its transitive closure."""

    def __init__(self, nodes: Iterable[OpId], edges: Iterable[Edge], past: Mapping[OpId, frozenset]):
        self.nodes = tuple(sorted(nodes, key=op_key))
        self.edges = frozenset(edges)
        self._past = dict(past)

    def past(self, op: OpId) -> frozenset:
        return self._past[op]

    def precedes(self, a: OpId, b: OpId) -> bool:
        return a in self._past[b]

    def concurrent(self, a: OpId, b: OpId) -> bool:
        return a != b and not self.precedes(a, b) and not self.precedes(b, a)

    def closure_pairs(self) -> set[Edge]:
        return {(a, b) for b in self.nodes for a in self._past[b]}

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: (op_key(e[0]), op_key(e[1])))

    def reduced_edges(self) -> list[Edge]:
        """Transitive reduction, handy for readable witnesses."""
        out = []
        for b in self.nodes:
            direct = self._past[b]
            for a in direct:
                if not any(a in self._past[c] for c in direct if c != a):
                    out.append((a, b))
        return sorted(out, key=lambda e: (op_key(e[0]), op_key(e[1])))

    def __eq__(self, other):
        return isinstance(other, CausalOrder) and self.nodes == other.nodes and self._past == other._past

    def __hash__(self):
        return hash((self.nodes, frozenset(self._past.items())))

    def __repr__(self):
        return f"CausalOrder({len(self.nodes)} ops, {len(self.reduced_edges())} covering edges)"


@dataclass(frozen=True)
class Serialization:
    order: tuple[OpId, ...]
    owner: Optional[int] = None
    # replayed returns of every op in order; for foreign ops this is the assignment
    returns: Optional[tuple[Value, ...]] = None


def process_order_edges(h: History) -> set[Edge]:
    edges = set()
    for local in h.locals:
        for a, b in zip(local, local[1:]):
            edges.add((a.op_id, b.op_id))
    return edges


def is_register(spec: SeqSpec) -> bool:
    return spec.name == "register" or spec.name.startswith("register(")


def write_into_edges(h: History) -> set[Edge]:
    """Edges from the unique write of ``v`` into ``R`` to every read of ``R`` returning ``v``."""
    writes: dict[tuple[str, object], OpId] = {}
    for rec in h.ops:
        spec = h.specs[rec.inv.object]
        if not is_register(spec):
            raise HistoryError(f"{rec.op_id}: write-into is defined for registers only")
        if rec.inv.op_name != "write":
            continue
        (v,) = rec.inv.args
        key = (rec.inv.object, _vkey(v))
        if key in writes or same_value(v, spec.initial_state):
            raise AmbiguousWrite(f"value {v!r} written twice into {rec.inv.object}")
        writes[key] = rec.op_id
    edges = set()
    for rec in h.ops:
        if rec.inv.op_name != "read" or rec.ret is None:
            continue
        w = writes.get((rec.inv.object, _vkey(rec.ret)))
        if w is not None:
            edges.add((w, rec.op_id))
        elif not same_value(rec.ret, h.specs[rec.inv.object].initial_state):
            raise DanglingRead(f"{rec.op_id} reads {rec.ret!r}, never written", rec.op_id)
    return edges


def _vkey(v):
    return (type(v).__name__, v)


def close(edges: Iterable[Edge], h: History) -> CausalOrder:
    """Transitive closure of process order plus ``edges``; raises :class:`CyclicOrder`."""
    nodes = h.op_ids
    all_edges = set(edges) | process_order_edges(h)
    succ: dict[OpId, set] = {v: set() for v in nodes}
    indeg = {v: 0 for v in nodes}
    for a, b in all_edges:
        if a not in succ or b not in succ:
            raise HistoryError(f"edge {a}->{b} mentions an unknown op")
        if b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    ready = sorted((v for v in nodes if indeg[v] == 0), key=op_key)
    topo = []
    while ready:
        v = ready.pop(0)
        topo.append(v)
        for w in sorted(succ[v], key=op_key):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    if len(topo) != len(nodes):
        raise CyclicOrder(_find_cycle(succ, set(nodes) - set(topo)))
    preds: dict[OpId, set] = {v: set() for v in nodes}
    for a, b in all_edges:
        preds[b].add(a)
    past: dict[OpId, frozenset] = {}
    for v in topo:
        acc = set()
        for u in preds[v]:
            acc.add(u)
            acc |= past[u]
        past[v] = frozenset(acc)
    return CausalOrder(nodes, all_edges, past)


def _find_cycle(succ, stuck) -> list[OpId]:
    # every stuck node has a stuck predecessor, so walk backwards
    preds = {v: [u for u in stuck if v in succ[u]] for v in stuck}
    v = min(stuck, key=op_key)
    path, seen = [v], {v: 0}
    while True:
        v = min(preds[v], key=op_key)
        if v in seen:
            cyc = path[seen[v]:] + [v]
            return cyc[::-1]
        seen[v] = len(path)
        path.append(v)


def causal_past(po: CausalOrder, op: OpId) -> frozenset:
    return po.past(op)


def segment_structure(po: CausalOrder, h: History, i: int) -> list[frozenset]:
    """Segments ``B_1..B_k, T`` that any causal-past-constrained serialization for ``p_i`` follows.

    Such a serialization is exactly ``ext(B_1) o_1 ext(B_2) o_2 ... o_k ext(T)``
    where ``o_1..o_k`` are ``p_i``'s operations and each ``ext`` is a linear
    extension of ``po`` restricted to the segment.
    """
    seen: set = set()
    segments = []
    for rec in h.local(i):
        past = po.past(rec.op_id)
        segments.append(frozenset(past - seen))
        seen |= past
        seen.add(rec.op_id)
    segments.append(frozenset(set(po.nodes) - seen))
    return segments


def linear_extensions(
    po: CausalOrder, elems: Iterable[OpId], budget: Optional[int] = None
) -> Iterator[tuple[OpId, ...]]:
    """Linear extensions of ``po`` restricted to ``elems``, in lexicographic op-id order.

    Raises :class:`BudgetExceeded` after ``budget`` extensions if more exist.
    """
    elems = sorted(set(elems), key=op_key)
    inside = set(elems)
    need = {e: po.past(e) & inside for e in elems}
    count = 0
    prefix: list[OpId] = []
    placed: set = set()

    def rec():
        nonlocal count
        if len(prefix) == len(elems):
            if budget is not None and count >= budget:
                raise BudgetExceeded(f"more than {budget} linear extensions")
            count += 1
            yield tuple(prefix)
            return
        for e in elems:
            if e not in placed and need[e] <= placed:
                placed.add(e)
                prefix.append(e)
                yield from rec()
                prefix.pop()
                placed.discard(e)

    yield from rec()


def is_linear_extension(po: CausalOrder, order: Sequence[OpId]) -> bool:
    pos = {o: k for k, o in enumerate(order)}
    return all(pos[a] < pos[b] for b in order for a in po.past(b) if a in pos)


def constrained_serializations(
    po: CausalOrder, h: History, i: int, budget: Optional[int] = None
) -> Iterator[tuple[OpId, ...]]:
    """Every linear extension of ``po`` in which each of ``p_i``'s ops is preceded by exactly its causal past.

    Built segment by segment from :func:`segment_structure`, so nothing is
    generated and thrown away.
    """
    segs = segment_structure(po, h, i)
    owned = [r.op_id for r in h.local(i)]
    count = 0

    def rec(k, prefix):
        nonlocal count
        if k == len(segs):
            if budget is not None and count >= budget:
                raise BudgetExceeded(f"more than {budget} constrained serializations")
            count += 1
            yield prefix
            return
        for ext in linear_extensions(po, segs[k]):
            tail = ext + ((owned[k],) if k < len(owned) else ())
            yield from rec(k + 1, prefix + tail)

    yield from rec(0, ())
