"""The tagged value universe shared by arguments, returns and trace payloads.

Payloads are plain ints, bools and short strings, plus three distinguished
symbols: ``BOTTOM`` (empty stack/queue), ``DONE`` (successful update) and
``TOP`` (bounded stack full).
"""
from __future__ import annotations

import enum
from typing import Any, Union


class Symbol(enum.Enum):
    BOTTOM = "bot"
    DONE = "done"
    TOP = "top"

    def __repr__(self) -> str:
        return {"bot": "⊥", "done": "done", "top": "⊤"}[self.value]

    __str__ = __repr__


BOTTOM = Symbol.BOTTOM
DONE = Symbol.DONE
TOP = Symbol.TOP

Value = Union[int, str, bool, Symbol]

MAX_STR_LEN = 64


def is_value(v: Any) -> bool:
    if isinstance(v, Symbol):
        return True
    if isinstance(v, (bool, int)):
        return True
    return isinstance(v, str) and len(v) <= MAX_STR_LEN


def is_payload(v: Any) -> bool:
    """A user payload: anything in the universe except the reserved symbols."""
    return is_value(v) and not isinstance(v, Symbol)


def encode_value(v: Value) -> Any:
    """JSON form; symbols become ``{"sym": name}`` so "done" the string stays distinct."""
    if isinstance(v, Symbol):
        return {"sym": v.value}
    return v


def decode_value(obj: Any) -> Value:
    if isinstance(obj, dict):
        if set(obj) != {"sym"}:
            raise ValueError(f"malformed symbol encoding: {obj!r}")
        return Symbol(obj["sym"])
    if not is_value(obj):
        raise ValueError(f"not a value: {obj!r}")
    return obj


def fmt_value(v: Value) -> str:
    return repr(v) if isinstance(v, Symbol) else str(v)
