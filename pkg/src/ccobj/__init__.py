"""Causal consistency for objects defined by sequential specifications.

Replicate any deterministic sequential object over simulated causal (or
total-order) broadcast, and check recorded histories against causal
consistency, causal memory, sequential consistency and linearizability.
"""
from .checker import (
    Verdict,
    check_causal,
    check_causal_certificate,
    check_causal_memory,
    check_linearizable,
    check_sequential,
)
from .history import CausalOrder, History, OpRecord, close
from .objects import Invocation, SeqSpec, apply, is_legal, replay, spec_from_name
from .sim import GenParams, Scenario, generate_scenario, run_scenario
from .witness import check_witness

__version__ = "0.1.0"

__all__ = [
    "CausalOrder", "GenParams", "History", "Invocation", "OpRecord", "Scenario", "SeqSpec", "Verdict",
    "apply", "check_causal", "check_causal_certificate", "check_causal_memory", "check_linearizable",
    "check_sequential", "check_witness", "close", "generate_scenario", "is_legal", "replay",
    "run_scenario", "spec_from_name",
]
