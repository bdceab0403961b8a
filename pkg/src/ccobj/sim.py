"""Deterministic discrete-event simulation of n replicas over a lossy-timing network.

Time is integer ticks. Each directed channel draws its delays from its own
seeded stream, partitions hold messages until the window heals, and a crash
silently stops a node. Events at equal times run in the order
(time, kind, sender, seq, dest) with kinds crash < arrival < invocation.
"""
from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import dataclass, field
from typing import Optional

from . import rng as _rng
from .broadcast import BMessage
from .history import History, OpRecord, close, CausalOrder
from .objects import Invocation, spec_from_name
from .runtime import CAUSAL, MODES, TOTAL_ORDER, Operation, Replica
from .values import decode_value, encode_value


class ScenarioError(ValueError):
    pass


class ScheduleDeadlock(RuntimeError):
    pass


@dataclass(frozen=True)
class ScriptOp:
    t: int
    object: str
    op: str
    args: tuple = ()


@dataclass(frozen=True)
class Partition:
    start: int
    end: int
    groups: tuple[tuple[int, ...], ...]

    def separates(self, a: int, b: int, t: int) -> bool:
        if not self.start <= t < self.end:
            return False
        return not any(a in g and b in g for g in self.groups)


@dataclass(frozen=True)
class Crash:
    pid: int
    t: int


@dataclass
class NetConfig:
    delay_min: int = 1
    delay_max: int = 5
    partitions: list[Partition] = field(default_factory=list)
    crashes: list[Crash] = field(default_factory=list)


@dataclass
class GenParams:
    """Knobs for :func:`generate_scenario`."""

    n: int = 3
    ops: int = 3  # per process
    objects: tuple[str, ...] = ("stack",)
    mode: str = CAUSAL
    max_total_ops: Optional[int] = None
    gap_max: int = 6
    delay_min: int = 1
    delay_max: int = 8
    partitions: int = 0
    crashes: int = 0
    concurrent_write_free: bool = False
    set_values: int = 3


@dataclass
class Scenario:
    n: int
    objects: dict[str, str]
    mode: str = CAUSAL
    script: list[list[ScriptOp]] = field(default_factory=list)
    net: NetConfig = field(default_factory=NetConfig)
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise ScenarioError("need at least one process")
        if self.mode not in MODES:
            raise ScenarioError(f"unknown mode {self.mode!r}")
        specs = {oid: spec_from_name(name) for oid, name in self.objects.items()}
        if len(self.script) != self.n:
            raise ScenarioError(f"script has {len(self.script)} process entries, expected {self.n}")
        for pid, ops in enumerate(self.script, start=1):
            last = -1
            for op in ops:
                if op.t <= last:
                    raise ScenarioError(f"p{pid}: invocation times must strictly increase")
                last = op.t
                if op.object not in specs:
                    raise ScenarioError(f"p{pid}: unknown object {op.object!r}")
                specs[op.object].check(op.op, op.args)
        net = self.net
        if net.delay_min < 1 or net.delay_max < net.delay_min:
            raise ScenarioError("delays must satisfy 1 <= delay_min <= delay_max")
        everyone = set(range(1, self.n + 1))
        for p in net.partitions:
            if not 0 <= p.start < p.end:
                raise ScenarioError(f"bad partition window [{p.start}, {p.end})")
            members = [q for g in p.groups for q in g]
            if sorted(members) != sorted(everyone):
                raise ScenarioError("partition groups must cover every process exactly once")
        for c in net.crashes:
            if c.pid not in everyone:
                raise ScenarioError(f"crash of unknown process {c.pid}")
            if self.mode == TOTAL_ORDER and c.pid == 1:
                raise ScenarioError("the sequencer (p1) cannot crash")

    def specs(self) -> dict:
        return {oid: spec_from_name(name) for oid, name in self.objects.items()}

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "objects": dict(self.objects),
            "mode": self.mode,
            "script": [
                [{"t": op.t, "object": op.object, "op": op.op, "args": [encode_value(a) for a in op.args]} for op in ops]
                for ops in self.script
            ],
            "net": {
                "delay_min": self.net.delay_min,
                "delay_max": self.net.delay_max,
                "partitions": [
                    {"start": p.start, "end": p.end, "groups": [list(g) for g in p.groups]} for p in self.net.partitions
                ],
                "crashes": [{"pid": c.pid, "t": c.t} for c in self.net.crashes],
            },
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict, seed: Optional[int] = None) -> "Scenario":
        """Parse a scenario document; a ``random`` block is expanded with the seed."""
        try:
            seed = int(d.get("seed", 0)) if seed is None else seed
            if "random" in d:
                gp = dict(d["random"])
                gp.setdefault("n", d.get("n", 3))
                gp.setdefault("mode", d.get("mode", CAUSAL))
                if "objects" in gp:
                    gp["objects"] = tuple(gp["objects"])
                return generate_scenario(GenParams(**gp), seed)
            net = d.get("net", {})
            s = cls(
                n=int(d["n"]),
                objects=dict(d["objects"]),
                mode=d.get("mode", CAUSAL),
                script=[
                    [
                        ScriptOp(int(op["t"]), op["object"], op["op"], tuple(decode_value(a) for a in op.get("args", [])))
                        for op in ops
                    ]
                    for ops in d["script"]
                ],
                net=NetConfig(
                    delay_min=int(net.get("delay_min", 1)),
                    delay_max=int(net.get("delay_max", 5)),
                    partitions=[
                        Partition(int(p["start"]), int(p["end"]), tuple(tuple(g) for g in p["groups"]))
                        for p in net.get("partitions", [])
                    ],
                    crashes=[Crash(int(c["pid"]), int(c["t"])) for c in net.get("crashes", [])],
                ),
                seed=seed,
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ScenarioError):
                raise
            raise ScenarioError(f"malformed scenario: {e}") from e
        s.validate()
        return s

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class Trace:
    scenario: Optional[Scenario]
    history: History
    vclocks: dict[str, tuple[int, ...]]  # causal mode
    gseqs: dict[str, int]  # total-order mode
    deliveries: dict[int, list[str]]  # per process, op ids in delivery order
    crashed: list[int]
    messages_sent: int = 0
    mode: Optional[str] = None
    delivery_times: dict[int, list[int]] = field(default_factory=dict)

    def causal_order(self) -> CausalOrder:
        """Order certified by the broadcast metadata.

        Causal mode: ``a -> b`` iff ``a``'s vector clock is below ``b``'s.
        Total-order mode: the global sequence, as a chain.
        """
        h = self.history
        if not self.vclocks and not self.gseqs and len(h):
            raise ValueError("trace carries no broadcast metadata")
        if self.vclocks:
            edges = []
            for a, va in self.vclocks.items():
                for b, vb in self.vclocks.items():
                    if a != b and all(x <= y for x, y in zip(va, vb)):
                        edges.append((a, b))
            return close(edges, h)
        chain = sorted(self.gseqs, key=self.gseqs.get)
        edges = list(zip(chain, chain[1:]))
        # pending ops that never got a sequence number go last, concurrent with each other
        unseq = [o for o in h.op_ids if o not in self.gseqs]
        if chain:
            edges += [(chain[-1], o) for o in unseq]
        return close(edges, h)


class _Sim:
    CRASH, ARRIVE, INVOKE = 0, 1, 2

    def __init__(self, s: Scenario):
        self.s = s
        self.now = 0
        self.heap: list = []
        self.counter = 0
        self.specs = s.specs()
        self.replicas = {
            pid: Replica(pid, s.n, self.specs, s.mode, send=self._sender(pid)) for pid in range(1, s.n + 1)
        }
        self.channels = {}
        self.script = {pid: list(ops) for pid, ops in enumerate(s.script, start=1)}
        self.next_op = {pid: 0 for pid in self.replicas}
        self.records: dict[int, list] = {pid: [] for pid in self.replicas}
        self.outstanding: dict[int, Optional[tuple]] = {pid: None for pid in self.replicas}
        self.vclocks: dict[str, tuple] = {}
        self.gseqs: dict[str, int] = {}
        self.sent = 0
        self.stamps: dict[int, list[int]] = {pid: [] for pid in self.replicas}

    def stamp(self, pid):
        log, st = self.replicas[pid].op_log, self.stamps[pid]
        st.extend([self.now] * (len(log) - len(st)))

    def push(self, t, kind, sender, seq, dest, payload):
        self.counter += 1
        heapq.heappush(self.heap, (t, kind, sender, seq, dest, self.counter, payload))

    def _sender(self, src):
        def send(dest, m: BMessage):
            ch = self.channels.get((src, dest))
            if ch is None:
                ch = self.channels[(src, dest)] = _rng.stream(self.s.seed, src, dest)
            d = ch.randint(self.s.net.delay_min, self.s.net.delay_max)
            self.sent += 1
            self.push(self.now + d, self.ARRIVE, m.sender, m.seq, dest, (src, m))

        return send

    def schedule_next(self, pid, earliest):
        k = self.next_op[pid]
        if k < len(self.script[pid]):
            op = self.script[pid][k]
            self.push(max(op.t, earliest), self.INVOKE, pid, k, pid, None)

    def note_message(self, m: BMessage):
        op: Operation = m.payload
        if m.vclock is not None:
            self.vclocks[op.op_id] = m.vclock
        if m.global_seq is not None:
            self.gseqs[op.op_id] = m.global_seq

    def complete(self, pid, ret):
        inv_t, op = self.outstanding[pid]
        self.outstanding[pid] = None
        self.records[pid].append(OpRecord(pid, op.local_index, op.inv, ret, (inv_t, self.now + 1)))
        self.schedule_next(pid, self.now + 1)

    def run(self) -> Trace:
        for c in self.s.net.crashes:
            self.push(c.t, self.CRASH, c.pid, 0, c.pid, None)
        for pid in self.replicas:
            self.schedule_next(pid, 0)
        while self.heap:
            t, kind, sender, seq, dest, _, payload = heapq.heappop(self.heap)
            self.now = t
            r = self.replicas[dest]
            if kind == self.CRASH:
                r.crash()
            elif r.crashed:
                continue
            elif kind == self.ARRIVE:
                src, m = payload
                heal = self.blocked_until(src, dest, t)
                if heal is not None:
                    self.push(heal, kind, sender, seq, dest, payload)
                    continue
                if m.global_seq is not None or m.vclock is not None:
                    self.note_message(m)
                r.receive(m)
                self.stamp(dest)
                if self.outstanding[dest] is not None:
                    ret = r.take_result()
                    if ret is not None:
                        self.complete(dest, ret)
            else:
                op = self.script[dest][seq]
                self.next_op[dest] = seq + 1
                ret = r.invoke(Invocation(op.object, op.op, op.args))
                self.stamp(dest)
                self.note_message(r.last_message)
                self.outstanding[dest] = (t, r.last_message.payload)
                if ret is not None:
                    self.complete(dest, ret)
        return self.finish()

    def blocked_until(self, a, b, t) -> Optional[int]:
        heal = None
        for p in self.s.net.partitions:
            if p.separates(a, b, t):
                heal = p.end if heal is None else max(heal, p.end)
        return heal

    def finish(self) -> Trace:
        crashed = sorted(pid for pid, r in self.replicas.items() if r.crashed)
        for pid, r in self.replicas.items():
            if r.crashed:
                if self.outstanding[pid] is not None:
                    inv_t, op = self.outstanding[pid]
                    self.records[pid].append(OpRecord(pid, op.local_index, op.inv, None, (inv_t, None)))
                continue
            if self.outstanding[pid] is not None or self.next_op[pid] < len(self.script[pid]):
                raise ScheduleDeadlock(f"p{pid} never finished its script")
        h = History(self.s.n, self.specs, tuple(tuple(self.records[p]) for p in sorted(self.replicas)))
        deliveries = {pid: [a.op.op_id for a in r.op_log] for pid, r in self.replicas.items()}
        return Trace(
            self.s, h, dict(self.vclocks), dict(self.gseqs), deliveries, crashed, self.sent, self.s.mode,
            {pid: list(ts) for pid, ts in self.stamps.items()},
        )


def run_scenario(s: Scenario) -> Trace:
    s.validate()
    return _Sim(s).run()


def run_with_replicas(s: Scenario) -> tuple[Trace, dict[int, Replica]]:
    """Like :func:`run_scenario`, also handing back the final replicas (op logs, states)."""
    s.validate()
    sim = _Sim(s)
    return sim.run(), sim.replicas


# -- scenario generation -------------------------------------------------------

_MIX = {
    "register": (("write", 1), ("read", 1)),
    "stack": (("push", 3), ("pop", 2)),
    "bstack": (("push", 3), ("pop", 2)),
    "queue": (("enq", 3), ("deq", 2)),
    "counter": (("inc", 2), ("dec", 1), ("read", 2)),
    "set": (("add", 2), ("remove", 1), ("contains", 2)),
}
_WRITES = {"write", "push", "enq", "inc", "dec", "add", "remove"}


def _pick(r, weighted):
    total = sum(w for _, w in weighted)
    x = r.randint(1, total)
    for item, w in weighted:
        x -= w
        if x <= 0:
            return item
    raise AssertionError


def generate_scenario(params: GenParams, seed: int) -> Scenario:
    """Random scripted scenario, fully determined by ``(params, seed)``."""
    r = _rng.stream(seed, 0x5CE7A210)
    p = params
    objects = {}
    for k, name in enumerate(p.objects):
        base = name.split("(")[0]
        objects[f"{base}{k}"] = name
    oids = list(objects)
    cap = p.max_total_ops if p.max_total_ops is not None else p.n * p.ops
    counts = [p.ops] * p.n
    while sum(counts) > cap:
        k = max(range(p.n), key=lambda i: (counts[i], -i))
        counts[k] -= 1
    fresh = 0
    programs = []
    for pid in range(1, p.n + 1):
        prog = []
        for _ in range(counts[pid - 1]):
            oid = r.choice(oids)
            base = objects[oid].split("(")[0]
            op = _pick(r, _MIX[base])
            if op in ("write", "push", "enq"):
                fresh += 1
                args = (fresh,)
            elif base == "set":
                args = (r.randint(1, p.set_values),)
            else:
                args = ()
            prog.append((oid, op, args))
        programs.append(prog)

    script: list[list[ScriptOp]] = [[] for _ in range(p.n)]
    if p.concurrent_write_free:
        # writes spaced wider than any delay, so each is everywhere before the next
        spacing = p.delay_max + 2
        order = [pid for pid in range(p.n) for _ in programs[pid]]
        r.shuffle(order)
        cursor, last_write = 0, -spacing
        last = [-1] * p.n
        pos = [0] * p.n
        for pid in order:
            oid, op, args = programs[pid][pos[pid]]
            pos[pid] += 1
            t = max(cursor + r.randint(0, p.gap_max), last[pid] + 1)
            if op in _WRITES:
                t = max(t, last_write + spacing)
                last_write = t
            last[pid] = t
            cursor = t
            script[pid].append(ScriptOp(t, oid, op, args))
        partitions, crashes = [], []
    else:
        for pid in range(p.n):
            t = r.randint(0, p.gap_max)
            for oid, op, args in programs[pid]:
                script[pid].append(ScriptOp(t, oid, op, args))
                t += r.randint(1, p.gap_max)
        horizon = max([ops[-1].t for ops in script if ops] + [1]) + p.delay_max
        partitions = []
        for _ in range(p.partitions if p.n > 1 else 0):
            start = r.randint(0, horizon)
            end = start + r.randint(1, max(1, horizon // 2))
            members = list(range(1, p.n + 1))
            r.shuffle(members)
            cut = r.randint(1, p.n - 1)
            partitions.append(Partition(start, end, (tuple(sorted(members[:cut])), tuple(sorted(members[cut:])))))
        crashes = []
        candidates = [q for q in range(1, p.n + 1) if not (p.mode == TOTAL_ORDER and q == 1)]
        for _ in range(min(p.crashes, len(candidates))):
            q = r.choice(candidates)
            candidates.remove(q)
            crashes.append(Crash(q, r.randint(0, horizon)))
    s = Scenario(
        n=p.n,
        objects=objects,
        mode=p.mode,
        script=script,
        net=NetConfig(p.delay_min, p.delay_max, partitions, crashes),
        seed=seed,
    )
    s.validate()
    return s
