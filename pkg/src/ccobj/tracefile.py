"""JSON trace files.

Layout::

    {"version": 1, "mode": ..., "scenario": {...} | null, "scenario_digest": ...,
     "processes": n, "objects": {id: spec name}, "crashed": [...],
     "messages_sent": k,
     "events": [{"op": {...}}, ..., {"deliver": {"pid": i, "of_op": op_id, "t": tick}}, ...]}

Op events come first in op-id order, then each process's deliveries in order.
"""
from __future__ import annotations

import json
from typing import Any

from .history import History, OpRecord, op_key
from .objects import Invocation, spec_from_name
from .sim import Scenario, Trace
from .values import decode_value, encode_value

VERSION = 1


class TraceFormatError(ValueError):
    pass


def trace_to_dict(tr: Trace) -> dict:
    events: list[dict[str, Any]] = []
    for rec in sorted(tr.history.ops, key=lambda r: op_key(r.op_id)):
        ev = {
            "op_id": rec.op_id,
            "pid": rec.pid,
            "object": rec.inv.object,
            "name": rec.inv.op_name,
            "args": [encode_value(a) for a in rec.inv.args],
            "ret": None if rec.ret is None else encode_value(rec.ret),
            "invoke_t": rec.rt_interval[0] if rec.rt_interval else None,
            "response_t": rec.rt_interval[1] if rec.rt_interval else None,
        }
        if rec.op_id in tr.vclocks:
            ev["vclock"] = list(tr.vclocks[rec.op_id])
        if rec.op_id in tr.gseqs:
            ev["gseq"] = tr.gseqs[rec.op_id]
        events.append({"op": ev})
    for pid in sorted(tr.deliveries):
        times = tr.delivery_times.get(pid)
        for k, o in enumerate(tr.deliveries[pid]):
            ev = {"pid": pid, "of_op": o}
            if times:
                ev["t"] = times[k]
            events.append({"deliver": ev})
    return {
        "version": VERSION,
        "mode": tr.mode,
        "scenario": tr.scenario.to_dict() if tr.scenario else None,
        "scenario_digest": tr.scenario.digest() if tr.scenario else None,
        "processes": tr.history.n,
        "objects": {oid: spec.name for oid, spec in sorted(tr.history.specs.items())},
        "crashed": list(tr.crashed),
        "messages_sent": tr.messages_sent,
        "events": events,
    }


def dumps(tr: Trace) -> str:
    return json.dumps(trace_to_dict(tr), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def trace_from_dict(d: dict) -> Trace:
    try:
        if d.get("version") != VERSION:
            raise TraceFormatError(f"unsupported trace version {d.get('version')!r}")
        n = int(d["processes"])
        specs = {oid: spec_from_name(name) for oid, name in d["objects"].items()}
        rows: list[list[OpRecord]] = [[] for _ in range(n)]
        vclocks, gseqs = {}, {}
        deliveries: dict[int, list[str]] = {pid: [] for pid in range(1, n + 1)}
        times: dict[int, list[int]] = {}
        seen = set()
        for ev in d["events"]:
            if "op" in ev:
                e = ev["op"]
                if e["op_id"] in seen:
                    raise TraceFormatError(f"duplicate op id {e['op_id']}")
                seen.add(e["op_id"])
                pid = int(e["pid"])
                pid_, idx = op_key(e["op_id"])
                if pid_ != pid:
                    raise TraceFormatError(f"{e['op_id']} claims pid {pid}")
                rt = None
                if e.get("invoke_t") is not None:
                    rt = (int(e["invoke_t"]), None if e.get("response_t") is None else int(e["response_t"]))
                ret = None if e.get("ret") is None else decode_value(e["ret"])
                inv = Invocation(e["object"], e["name"], tuple(decode_value(a) for a in e.get("args", [])))
                specs[inv.object].check(inv.op_name, inv.args)
                rows[pid - 1].append(OpRecord(pid, idx, inv, ret, rt))
                if "vclock" in e:
                    vclocks[e["op_id"]] = tuple(int(x) for x in e["vclock"])
                if "gseq" in e:
                    gseqs[e["op_id"]] = int(e["gseq"])
            elif "deliver" in ev:
                dv = ev["deliver"]
                deliveries[int(dv["pid"])].append(dv["of_op"])
                if "t" in dv:
                    times.setdefault(int(dv["pid"]), []).append(int(dv["t"]))
            else:
                raise TraceFormatError(f"unknown event {ev!r}")
        for row in rows:
            row.sort(key=lambda r: r.local_index)
        h = History(n, specs, tuple(tuple(r) for r in rows))
        scenario = Scenario.from_dict(d["scenario"]) if d.get("scenario") else None
        return Trace(
            scenario, h, vclocks, gseqs, deliveries, list(d.get("crashed", [])),
            int(d.get("messages_sent", 0)), d.get("mode"), times,
        )
    except TraceFormatError:
        raise
    except Exception as e:
        raise TraceFormatError(f"malformed trace: {e}") from e


def loads(text: str) -> Trace:
    try:
        return trace_from_dict(json.loads(text))
    except json.JSONDecodeError as e:
        raise TraceFormatError(f"not JSON: {e}") from e


def load(path) -> Trace:
    with open(path, encoding="utf-8") as f:
        return loads(f.read())


def save(tr: Trace, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(tr))


def history_to_trace(h: History) -> Trace:
    """Wrap a bare history (no scenario, no broadcast metadata) for saving."""
    return Trace(None, h, {}, {}, {pid: [] for pid in range(1, h.n + 1)}, [], 0)
