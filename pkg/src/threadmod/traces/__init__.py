"""Concrete local-trace semantics used as the soundness oracle."""

from __future__ import annotations

from .enumerate import (
    Enumeration,
    LocalSystem,
    MutexTraces,
    TraceAt,
    TraceBudgetExceeded,
    enumerate_global,
    enumerate_local,
    init_traces,
)
from .dot import trace_to_dot
from .oracle import (
    ConcreteReadTable,
    Counterexample,
    InitializationError,
    Verdict,
    check_soundness,
    concrete_read_table,
    soundness_violations,
)
from .queries import (
    BetaLock,
    BetaWrite,
    TraceQueries,
    beta_lock,
    beta_lock_violations,
    beta_write,
    beta_write_violations,
    ego_locksets,
    eval_g,
    restrict,
    trace_queries,
)
from .semantics import EvalError, Semantics, TraceConfig, eval_concrete
from .trace import ROOT, ROOT_TID, InvalidTrace, LocalTrace, NodeId, Run, Step, check, init_trace, validate

__all__ = [
    "BetaLock", "BetaWrite", "ConcreteReadTable", "Counterexample", "InitializationError",
    "TraceQueries", "Verdict", "beta_lock", "beta_lock_violations", "beta_write",
    "beta_write_violations", "check_soundness", "concrete_read_table", "ego_locksets", "eval_g",
    "restrict", "soundness_violations", "trace_queries", "trace_to_dot",
    "Enumeration", "EvalError", "InvalidTrace", "LocalSystem", "LocalTrace", "MutexTraces",
    "NodeId", "ROOT", "ROOT_TID", "Run", "Semantics", "Step", "TraceAt", "TraceBudgetExceeded",
    "TraceConfig", "check", "enumerate_global", "enumerate_local", "eval_concrete",
    "init_trace", "init_traces", "validate",
]
