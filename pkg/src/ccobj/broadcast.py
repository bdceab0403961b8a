"""Causal-order broadcast (vector clocks) and total-order broadcast (fixed sequencer).

Both node types talk to the world through two callbacks supplied by the
driver: ``send(dest, msg)`` hands a message to the transport and
``deliver(msg)`` fires on every delivery, local ones included.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

SEQUENCER = 1


class DuplicateMessage(Exception):
    pass


@dataclass(frozen=True)
class BMessage:
    sender: int
    seq: int
    payload: Any
    vclock: Optional[tuple[int, ...]] = None  # causal mode
    global_seq: Optional[int] = None  # total-order mode; None on a request to the sequencer

    @property
    def key(self) -> tuple[int, int]:
        return self.sender, self.seq


def _noop(*_):
    pass


class CausalNode:
    """Vector-clock causal broadcast for process ``pid`` of ``n``.

    ``delivered[k]`` counts messages from process ``k+1`` delivered here; a
    buffered message from ``j`` is deliverable exactly when its clock entry for
    ``j`` is ``delivered[j]+1`` and every other entry is covered.
    """

    def __init__(self, pid: int, n: int, send: Callable = _noop, deliver: Callable = _noop):
        self.pid = pid
        self.n = n
        self.send = send
        self.deliver = deliver
        self.delivered = [0] * n
        self.pending: list[BMessage] = []
        self.log: list[tuple[int, int]] = []

    def broadcast(self, payload) -> BMessage:
        i = self.pid - 1
        vc = list(self.delivered)
        vc[i] += 1
        m = BMessage(self.pid, vc[i], payload, vclock=tuple(vc))
        for dest in range(1, self.n + 1):
            if dest != self.pid:
                self.send(dest, m)
        self._deliver(m)
        return m

    def deliverable(self, m: BMessage) -> bool:
        j = m.sender - 1
        if m.vclock[j] != self.delivered[j] + 1:
            return False
        return all(m.vclock[k] <= self.delivered[k] for k in range(self.n) if k != j)

    def receive(self, m: BMessage) -> list:
        j = m.sender - 1
        if m.vclock[j] <= self.delivered[j] or any(p.key == m.key for p in self.pending):
            raise DuplicateMessage(f"p{self.pid} already has ({m.sender}, {m.seq})")
        self.pending.append(m)
        out = []
        progress = True
        while progress:
            progress = False
            for p in sorted(self.pending, key=lambda x: x.key):
                if self.deliverable(p):
                    self.pending.remove(p)
                    self._deliver(p)
                    out.append(p.payload)
                    progress = True
                    break
        return out

    def _deliver(self, m: BMessage) -> None:
        self.delivered[m.sender - 1] += 1
        self.log.append(m.key)
        self.deliver(m)


class TotalOrderNode:
    """Sequencer-based total-order broadcast; node 1 stamps global sequence numbers."""

    def __init__(self, pid: int, n: int, send: Callable = _noop, deliver: Callable = _noop):
        self.pid = pid
        self.n = n
        self.send = send
        self.deliver = deliver
        self.next_seq = 0  # own requests
        self.next_global = 1  # sequencer only
        self.delivered_upto = 0
        self.pending: dict[int, BMessage] = {}
        self.sequenced: set = set()
        self.log: list[tuple[int, int]] = []

    @property
    def is_sequencer(self) -> bool:
        return self.pid == SEQUENCER

    def broadcast(self, payload) -> BMessage:
        self.next_seq += 1
        req = BMessage(self.pid, self.next_seq, payload)
        if self.is_sequencer:
            return self._sequence(req)
        self.send(SEQUENCER, req)
        return req

    def receive(self, m: BMessage) -> list:
        if m.global_seq is None:
            if not self.is_sequencer:
                raise ValueError(f"p{self.pid} is not the sequencer")
            self._sequence(m)
            return [m.payload]
        if m.global_seq <= self.delivered_upto or m.global_seq in self.pending:
            raise DuplicateMessage(f"p{self.pid} already has global seq {m.global_seq}")
        self.pending[m.global_seq] = m
        out = []
        while self.delivered_upto + 1 in self.pending:
            nxt = self.pending.pop(self.delivered_upto + 1)
            self._deliver(nxt)
            out.append(nxt.payload)
        return out

    def _sequence(self, req: BMessage) -> BMessage:
        if req.key in self.sequenced:
            raise DuplicateMessage(f"request ({req.sender}, {req.seq}) already sequenced")
        self.sequenced.add(req.key)
        m = BMessage(req.sender, req.seq, req.payload, global_seq=self.next_global)
        self.next_global += 1
        for dest in range(1, self.n + 1):
            if dest != self.pid:
                self.send(dest, m)
        # the sequencer has delivered everything it stamped so far
        self._deliver(m)
        return m

    def _deliver(self, m: BMessage) -> None:
        self.delivered_upto = m.global_seq
        self.log.append(m.key)
        self.deliver(m)


# function-style aliases


def cb_broadcast(node: CausalNode, payload) -> BMessage:
    return node.broadcast(payload)


def cb_receive(node: CausalNode, m: BMessage) -> list:
    return node.receive(m)


def to_broadcast(node: TotalOrderNode, payload) -> BMessage:
    return node.broadcast(payload)


def to_receive(node: TotalOrderNode, m: BMessage) -> list:
    return node.receive(m)
