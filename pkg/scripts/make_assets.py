"""Regenerate the bundled example assets under src/ccobj/assets/."""
import json
import pathlib

from ccobj import tracefile
from ccobj.checker import check_causal, check_causal_memory, check_linearizable, check_sequential
from ccobj.golden import STACK_ORDER_EDGES, memory_history, seqcons_history
from ccobj.sim import Scenario, run_scenario

ASSETS = pathlib.Path(__file__).resolve().parents[1] / "src" / "ccobj" / "assets"


def op(t, name, *args):
    return {"t": t, "object": "S", "op": name, "args": list(args)}


# constant 10-tick delays realize exactly the causal edges of the stack example
STACK_EXAMPLE = {
    "n": 3,
    "objects": {"S": "stack"},
    "mode": "causal",
    "script": [
        [op(0, "push", "a"), op(23, "push", "c"), op(24, "pop")],
        [op(11, "pop"), op(12, "push", "b"), op(15, "pop")],
        [op(11, "pop"), op(23, "pop")],
    ],
    "net": {"delay_min": 10, "delay_max": 10, "partitions": [], "crashes": []},
    "seed": 0,
}


def write(name, obj):
    (ASSETS / name).write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def main():
    ASSETS.mkdir(exist_ok=True)
    write("stack_example.json", STACK_EXAMPLE)
    write("stack_example.order.json", {"edges": [list(e) for e in STACK_ORDER_EDGES]})
    h = run_scenario(Scenario.from_dict(STACK_EXAMPLE)).history
    write("stack_example.expected.json", {
        "causal-cert": "accepted",
        "causal": check_causal(h).result,
        "sequential": check_sequential(h).result,
        "linearizable": check_linearizable(h).result,
    })

    hm = memory_history(2, 1, 2)
    tracefile.save(tracefile.history_to_trace(hm), ASSETS / "concurrent_writes.json")
    write("concurrent_writes.expected.json", {
        "causal-memory": check_causal_memory(hm).result,
        "causal": check_causal(hm).result,
        "sequential": check_sequential(hm).result,
    })

    hs = seqcons_history()
    tracefile.save(tracefile.history_to_trace(hs), ASSETS / "seq_not_lin.json")
    write("seq_not_lin.expected.json", {
        "sequential": check_sequential(hs).result,
        "linearizable": check_linearizable(hs).result,
        "causal": check_causal(hs).result,
        "causal-memory": check_causal_memory(hs).result,
    })


if __name__ == "__main__":
    main()
