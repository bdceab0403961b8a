"""Worked example histories used by the tests, the CLI assets and the scripts.

The stack history is fixed. The register histories and the stack causal
order are reconstructions chosen to exhibit the intended behavior, pinned
here so every consumer sees the same data.
"""
from __future__ import annotations

from importlib import resources

from .history import History, OpId, close
from .objects import register, stack
from .values import BOTTOM, DONE

a, b, c = "a", "b", "c"


def stack_history() -> History:
    """``L1 = push(a) push(c) pop()c``, ``L2 = pop()a push(b) pop()b``, ``L3 = pop()a pop()b``."""
    return History.from_lists(
        {"S": stack()},
        [("S", "push", [a], DONE), ("S", "push", [c], DONE), ("S", "pop", [], c)],
        [("S", "pop", [], a), ("S", "push", [b], DONE), ("S", "pop", [], b)],
        [("S", "pop", [], a), ("S", "pop", [], b)],
    )


# Cross-process causal edges of the reconstructed stack order:
#   push1(a) -> pop2()a, push1(a) -> pop3()a, push2(b) -> pop3()b,
#   pop3()a -> push1(c), push2(b) -> push1(c)
STACK_ORDER_EDGES: list[tuple[OpId, OpId]] = [
    ("p1.0", "p2.0"),
    ("p1.0", "p3.0"),
    ("p2.1", "p3.1"),
    ("p3.0", "p1.1"),
    ("p2.1", "p1.1"),
]


def stack_order():
    return close(STACK_ORDER_EDGES, stack_history())


# Per-process serializations as originally listed for the example, as (op id, return) pairs.
LISTED_S1 = [
    ("p1.0", DONE), ("p3.0", a), ("p1.1", DONE), ("p2.0", BOTTOM),
    ("p2.1", DONE), ("p1.2", c), ("p2.2", b), ("p3.1", BOTTOM),
]
LISTED_S2 = [
    ("p1.0", DONE), ("p2.0", a), ("p2.1", DONE), ("p2.2", b),
    ("p3.0", BOTTOM), ("p3.1", BOTTOM), ("p1.1", DONE), ("p1.2", c),
]
LISTED_S3 = [
    ("p1.0", DONE), ("p3.0", a), ("p2.0", BOTTOM), ("p2.1", DONE),
    ("p3.1", b), ("p2.2", BOTTOM), ("p1.1", DONE), ("p1.2", c),
]
LISTED_SERIALIZATIONS = {1: LISTED_S1, 2: LISTED_S2, 3: LISTED_S3}

# S1 with pop2()/push2(b) moved ahead of push1(c): the nearest legal sequence
# with the same causal pasts for p1's pop.
REPAIRED_S1 = [
    ("p1.0", DONE), ("p3.0", a), ("p2.0", BOTTOM), ("p2.1", DONE),
    ("p1.1", DONE), ("p1.2", c), ("p2.2", b), ("p3.1", BOTTOM),
]


def memory_history(u, v, w) -> History:
    """Three processes on registers R1, R2 with concurrent writes of 1 and 2 into R1.

    ``p1: R1.write(1) R2.write(3)``; ``p2: R1.write(2) R1.read()u``;
    ``p3: R1.read()v R2.read()3 R1.read()w``.
    """
    return History.from_lists(
        {"R1": register(), "R2": register()},
        [("R1", "write", [1], DONE), ("R2", "write", [3], DONE)],
        [("R1", "write", [2], DONE), ("R1", "read", [], u)],
        [("R1", "read", [], v), ("R2", "read", [], 3), ("R1", "read", [], w)],
    )


def seqcons_history() -> History:
    """Sequentially consistent but not linearizable: p1's read of R2 sees the
    initial value although p2's write of R2 finished earlier in real time."""
    return History.from_lists(
        {"R1": register(), "R2": register()},
        [("R1", "write", [1], DONE, (2, 3)), ("R2", "read", [], 0, (4, 5))],
        [("R2", "write", [2], DONE, (0, 1)), ("R1", "read", [], 1, (6, 7))],
    )


def asset_path(name: str):
    """Path of a bundled example file (scenario, trace or expected verdicts)."""
    return resources.files("ccobj") / "assets" / name
