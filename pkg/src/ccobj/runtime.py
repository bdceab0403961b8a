"""Replicated objects over broadcast: every invocation is broadcast, every delivery applied.

A :class:`Replica` keeps one local state per object and folds the transition
function over its delivery order. In causal mode the invoker's own message is
delivered at broadcast time, so :meth:`Replica.invoke` returns at once; in
total-order mode the invoker waits until the sequenced message comes back.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional

from .broadcast import BMessage, CausalNode, TotalOrderNode
from .objects import Invocation, SeqSpec, apply, is_legal
from .values import Value

CAUSAL = "causal"
TOTAL_ORDER = "total-order"
MODES = (CAUSAL, TOTAL_ORDER)


class CrashedReplica(Exception):
    pass


class UnknownObject(Exception):
    pass


class Busy(Exception):
    pass


@dataclass(frozen=True)
class Operation:
    """The broadcast payload: who invoked what."""

    pid: int
    local_index: int
    object: str
    op_name: str
    args: tuple = ()

    @property
    def op_id(self) -> str:
        return f"p{self.pid}.{self.local_index}"

    @property
    def inv(self) -> Invocation:
        return Invocation(self.object, self.op_name, self.args)


@dataclass(frozen=True)
class Applied:
    op: Operation
    ret: Value

    # duck-types as a record for objects.is_legal
    @property
    def inv(self) -> Invocation:
        return self.op.inv


class Replica:
    def __init__(
        self,
        pid: int,
        n: int,
        specs: Mapping[str, SeqSpec],
        mode: str = CAUSAL,
        send: Optional[Callable[[int, BMessage], None]] = None,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.pid = pid
        self.mode = mode
        self.specs = dict(specs)
        self.states = {name: spec.initial_state for name, spec in self.specs.items()}
        self.result_slot: Optional[Value] = None
        self.outstanding: Optional[Operation] = None
        self.op_log: list[Applied] = []
        self.crashed = False
        self.issued = 0
        node_cls = CausalNode if mode == CAUSAL else TotalOrderNode
        self.node = node_cls(pid, n, send or (lambda dest, m: None), self._on_message)
        self.last_message: Optional[BMessage] = None

    def invoke(self, inv: Invocation) -> Optional[Value]:
        """Broadcast the operation; return its result if the wait resolved synchronously.

        ``None`` means the result is not known yet (total-order mode, non-sequencer);
        it arrives through a later delivery and is picked up with :meth:`take_result`.
        """
        if self.crashed:
            raise CrashedReplica(f"p{self.pid} has crashed")
        if self.outstanding is not None:
            raise Busy(f"p{self.pid} already waits on {self.outstanding.op_id}")
        if inv.object not in self.specs:
            raise UnknownObject(inv.object)
        self.specs[inv.object].check(inv.op_name, inv.args)
        op = Operation(self.pid, self.issued, inv.object, inv.op_name, tuple(inv.args))
        self.issued += 1
        self.result_slot = None
        self.outstanding = op
        self.last_message = self.node.broadcast(op)
        return self.take_result()

    def take_result(self) -> Optional[Value]:
        if self.outstanding is None or self.result_slot is None:
            return None
        r = self.result_slot
        self.outstanding = None
        self.result_slot = None
        return r

    def receive(self, m: BMessage) -> list[Operation]:
        if self.crashed:
            raise CrashedReplica(f"p{self.pid} has crashed")
        return self.node.receive(m)

    def _on_message(self, m: BMessage) -> None:
        self.on_deliver(m.payload)

    def on_deliver(self, op: Operation) -> None:
        if op.object not in self.specs:
            raise UnknownObject(op.object)
        ret, self.states[op.object] = apply(self.specs[op.object], self.states[op.object], op.inv)
        self.op_log.append(Applied(op, ret))
        if op.pid == self.pid:
            self.result_slot = ret

    def crash(self) -> None:
        self.crashed = True

    def legal_view(self) -> bool:
        """Each object's projection of the op log replays to the logged returns."""
        return all(
            is_legal(spec, [a for a in self.op_log if a.op.object == name]) for name, spec in self.specs.items()
        )

    def replay_states(self) -> dict:
        states = {name: spec.initial_state for name, spec in self.specs.items()}
        for a in self.op_log:
            _, states[a.op.object] = apply(self.specs[a.op.object], states[a.op.object], a.inv)
        return states
