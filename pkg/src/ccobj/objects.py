"""Sequential specifications: objects as an initial state plus a transition function.

A :class:`SeqSpec` maps ``(state, invocation)`` to ``(return value, next
state)``. States are immutable Python values (ints, tuples, frozensets), so
``apply`` is pure by construction and states can be used as memo keys.

Built-in catalog names: ``register``, ``stack``, ``bstack(k)``, ``queue``,
``counter``, ``set``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .values import BOTTOM, DONE, TOP, Symbol, Value, encode_value, is_payload, is_value

ObjectState = Hashable


class SpecError(Exception):
    pass


class UnknownOperation(SpecError):
    pass


class DomainError(SpecError):
    pass


class UnknownSpec(SpecError):
    pass


@dataclass(frozen=True)
class Invocation:
    object: str
    op_name: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return f"{self.object}.{self.op_name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Signature:
    """Argument domains (one predicate per positional argument) and return domain."""

    args: tuple[Callable[[Any], bool], ...]
    returns: Callable[[Any], bool]
    doc: str = ""


@dataclass(frozen=True)
class SeqSpec:
    name: str
    initial_state: ObjectState
    signatures: Mapping[str, Signature]
    delta: Callable[[ObjectState, str, tuple], tuple[Value, ObjectState]]
    params: tuple = ()

    def check(self, op_name: str, args: Sequence[Any]) -> Signature:
        sig = self.signatures.get(op_name)
        if sig is None:
            raise UnknownOperation(f"{self.name} has no operation {op_name!r}")
        if len(args) != len(sig.args):
            raise DomainError(
                f"{self.name}.{op_name} takes {len(sig.args)} argument(s), got {len(args)}"
            )
        for a, ok in zip(args, sig.args):
            if not ok(a):
                raise DomainError(f"{self.name}.{op_name}: argument {a!r} outside domain")
        return sig

    def returns_ok(self, op_name: str, ret: Any) -> bool:
        return self.signatures[op_name].returns(ret)


def same_value(a: Any, b: Any) -> bool:
    """Value equality that does not conflate ``True`` with ``1``."""
    return type(a) is type(b) and a == b


def apply(spec: SeqSpec, state: ObjectState, inv: Invocation) -> tuple[Value, ObjectState]:
    sig = spec.check(inv.op_name, inv.args)
    ret, nxt = spec.delta(state, inv.op_name, inv.args)
    assert sig.returns(ret), f"{spec.name}.{inv.op_name} returned {ret!r} outside its domain"
    return ret, nxt


def replay(spec: SeqSpec, invs: Iterable[Invocation]) -> list[Value]:
    state = spec.initial_state
    out = []
    for inv in invs:
        ret, state = apply(spec, state, inv)
        out.append(ret)
    return out


def is_legal(spec: SeqSpec, seq: Iterable[Any]) -> bool:
    """True iff replaying the records' invocations reproduces their recorded returns.

    Records are anything with ``inv`` and ``ret`` attributes (normally
    :class:`ccobj.history.OpRecord`). A ``ret`` of ``None`` marks a pending
    operation whose return is unconstrained.
    """
    state = spec.initial_state
    for rec in seq:
        ret, state = apply(spec, state, rec.inv)
        if rec.ret is not None and not same_value(ret, rec.ret):
            return False
    return True


def encode_state(state: ObjectState) -> bytes:
    """Canonical byte encoding: frozensets are sorted, symbols tagged."""

    def canon(x):
        if isinstance(x, frozenset):
            items = [canon(e) for e in x]
            return {"set": sorted(items, key=lambda e: json.dumps(e, sort_keys=True))}
        if isinstance(x, tuple):
            return [canon(e) for e in x]
        if isinstance(x, Symbol):
            return encode_value(x)
        if isinstance(x, bool):
            return {"bool": x}
        return x

    return json.dumps(canon(state), sort_keys=True, separators=(",", ":")).encode()


# -- built-in specifications -------------------------------------------------


def _any_payload(v):
    return is_payload(v)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def register(initial: Value = 0) -> SeqSpec:
    def delta(state, op, args):
        if op == "write":
            return DONE, args[0]
        return state, state

    return SeqSpec(
        name="register" if initial == 0 else f"register({initial})",
        initial_state=initial,
        signatures={
            "write": Signature((_any_payload,), lambda r: r is DONE),
            "read": Signature((), _any_payload),
        },
        delta=delta,
        params=(initial,),
    )


def _stack_delta(capacity):
    def delta(state, op, args):
        if op == "push":
            if capacity is not None and len(state) >= capacity:
                return TOP, state
            return DONE, state + (args[0],)
        if not state:
            return BOTTOM, state
        return state[-1], state[:-1]

    return delta


def stack() -> SeqSpec:
    return SeqSpec(
        name="stack",
        initial_state=(),
        signatures={
            "push": Signature((_any_payload,), lambda r: r is DONE),
            "pop": Signature((), lambda r: r is BOTTOM or is_payload(r)),
        },
        delta=_stack_delta(None),
    )


def bstack(capacity: int) -> SeqSpec:
    if not _is_int(capacity) or capacity < 0:
        raise DomainError(f"bstack capacity must be a non-negative int, got {capacity!r}")
    return SeqSpec(
        name=f"bstack({capacity})",
        initial_state=(),
        signatures={
            "push": Signature((_any_payload,), lambda r: r is DONE or r is TOP),
            "pop": Signature((), lambda r: r is BOTTOM or is_payload(r)),
        },
        delta=_stack_delta(capacity),
        params=(capacity,),
    )


def queue() -> SeqSpec:
    def delta(state, op, args):
        if op == "enq":
            return DONE, state + (args[0],)
        if not state:
            return BOTTOM, state
        return state[0], state[1:]

    return SeqSpec(
        name="queue",
        initial_state=(),
        signatures={
            "enq": Signature((_any_payload,), lambda r: r is DONE),
            "deq": Signature((), lambda r: r is BOTTOM or is_payload(r)),
        },
        delta=delta,
    )


def counter() -> SeqSpec:
    def delta(state, op, args):
        if op == "inc":
            return DONE, state + 1
        if op == "dec":
            return DONE, state - 1
        return state, state

    return SeqSpec(
        name="counter",
        initial_state=0,
        signatures={
            "inc": Signature((), lambda r: r is DONE),
            "dec": Signature((), lambda r: r is DONE),
            "read": Signature((), _is_int),
        },
        delta=delta,
    )


def set_spec() -> SeqSpec:
    def delta(state, op, args):
        if op == "add":
            return DONE, state | {args[0]}
        if op == "remove":
            return DONE, state - {args[0]}
        return args[0] in state, state

    return SeqSpec(
        name="set",
        initial_state=frozenset(),
        signatures={
            "add": Signature((_any_payload,), lambda r: r is DONE),
            "remove": Signature((_any_payload,), lambda r: r is DONE),
            "contains": Signature((_any_payload,), lambda r: isinstance(r, bool)),
        },
        delta=delta,
    )


_CATALOG: dict[str, Callable[..., SeqSpec]] = {
    "register": register,
    "stack": stack,
    "bstack": bstack,
    "queue": queue,
    "counter": counter,
    "set": set_spec,
}

_NAME_RE = re.compile(r"^([a-z_][a-z0-9_]*)(?:\((.*)\))?$")


def register_spec(name: str, factory: Callable[..., SeqSpec]) -> None:
    """Plug a user-defined spec factory into the catalog."""
    if not _NAME_RE.match(name) or "(" in name:
        raise ValueError(f"bad spec name {name!r}")
    _CATALOG[name] = factory


def spec_from_name(name: str) -> SeqSpec:
    """Resolve a catalog name such as ``stack`` or ``bstack(2)``."""
    m = _NAME_RE.match(name.strip())
    if not m or m.group(1) not in _CATALOG:
        raise UnknownSpec(f"unknown spec {name!r}")
    base, argtext = m.group(1), m.group(2)
    args = []
    if argtext:
        for tok in argtext.split(","):
            tok = tok.strip()
            try:
                args.append(int(tok))
            except ValueError:
                args.append(tok)
    spec = _CATALOG[base](*args)
    if not all(is_value(a) for a in args):
        raise UnknownSpec(f"bad parameters in {name!r}")
    return spec


def catalog_names() -> list[str]:
    return sorted(_CATALOG)
