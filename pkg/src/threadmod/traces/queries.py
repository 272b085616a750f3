"""Trace queries and the abstraction functions used to spot-check the analyses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .. import kernels
from ..lang.cfg import Cfg
from ..lang.syntax import Lock, Unlock, WriteGlobal
from ..lattice import AC_EMPTY, AC_FULL, MinAntichain, Value, ac_leq, ac_of
from .trace import LocalTrace, NodeId, Run, _index, causal_edges


def ego_locksets(t: LocalTrace) -> tuple[frozenset[str], ...]:
    """L_t at every node of the raw ego trace."""
    held: set[str] = set()
    out = [frozenset()]
    for s in t.ego_run.steps:
        a = s.edge.action
        if isinstance(a, Lock):
            held.add(a.mutex)
        elif isinstance(a, Unlock):
            held.discard(a.mutex)
        out.append(frozenset(held))
    return tuple(out)


@dataclass(frozen=True)
class TraceQueries:
    trace: LocalTrace
    globals: tuple[str, ...]
    mutexes: tuple[str, ...]
    locksets: tuple[frozenset[str], ...]
    last_write: dict[str, Optional[tuple[NodeId, Value]]]
    last_tl_write: dict[str, Optional[int]]  # index of the node after the write
    last_tl_lock: dict[str, Optional[int]]  # index of the node after the lock

    @property
    def sink_lockset(self) -> frozenset[str]:
        return self.locksets[-1]

    def min_lockset_since(self, j: int) -> MinAntichain:
        if not 0 <= j < len(self.locksets):
            raise IndexError(f"node {j} is not on the raw ego trace")
        return ac_of(self.locksets[j:])

    def tl_written_value(self, g: str) -> Optional[Value]:
        j = self.last_tl_write[g]
        if j is None:
            return None
        return self.trace.ego_run.steps[j - 1].value


def trace_queries(cfg: Cfg, t: LocalTrace) -> TraceQueries:
    steps = t.ego_run.steps
    tl_write: dict[str, Optional[int]] = {g: None for g in cfg.globals}
    tl_lock: dict[str, Optional[int]] = {a: None for a in cfg.mutexes}
    for j, s in enumerate(steps):
        a = s.edge.action
        if isinstance(a, WriteGlobal):
            tl_write[a.glob] = j + 1
        elif isinstance(a, Lock):
            tl_lock[a.mutex] = j + 1

    idx = _index(t)
    writes: dict[str, list[int]] = {g: [] for g in cfg.globals}
    for r in t.runs:
        for j, s in enumerate(r.steps):
            if isinstance(s.edge.action, WriteGlobal):
                writes[s.edge.action.glob].append(idx.ids[(r.tid, j + 1)])
    src, dst = causal_edges(t, idx)
    sink = idx.ids[t.sink]
    res = kernels.maximal_predecessors(
        len(idx.order), src, dst, [(sink, [w for w in ws if w != sink]) for ws in writes.values()]
    )
    assert res is not None, "trace is cyclic"
    last: dict[str, Optional[tuple[NodeId, Value]]] = {}
    for (g, ws), maxima in zip(writes.items(), res):
        if sink in ws:
            maxima = [sink]
        if not maxima:
            last[g] = None
            continue
        assert len(maxima) == 1, f"writes to {g} are not ordered"
        node = idx.order[maxima[0]]
        last[g] = (node, t.incoming(node).value)  # type: ignore[union-attr]
    return TraceQueries(t, cfg.globals, cfg.mutexes, ego_locksets(t), last, tl_write, tl_lock)


def restrict(t: LocalTrace, node: NodeId) -> LocalTrace:
    """The sub-trace of everything at or below ``node``, with its thread as ego."""
    idx = _index(t)
    if node not in idx.ids:
        raise KeyError(f"{node} is not a node of the trace")
    src, dst = causal_edges(t, idx)
    anc = kernels.ancestors(len(idx.order), src, dst)
    assert anc is not None, "trace is cyclic"
    keep = anc[idx.ids[node]] | 1 << idx.ids[node]
    kept = {n for n in idx.order if keep >> idx.ids[n] & 1}
    runs = []
    for r in t.runs:
        n = sum(1 for j in range(len(r.points)) if (r.tid, j) in kept)
        if n:
            runs.append(Run(r.tid, r.points[:n], r.states[:n], r.steps[: n - 1]))
    return LocalTrace(
        node[0],
        tuple(runs),
        frozenset(c for c in t.creates if c[1] in kept),
        frozenset(c for c in t.chains if c[2] in kept),
    )


def eval_g(cfg: Cfg, traces: Iterable[LocalTrace], g: str) -> frozenset[Value]:
    """Values written at the last thread-local writes to ``g``."""
    out = set()
    for t in traces:
        v = trace_queries(cfg, t).tl_written_value(g)
        if v is not None:
            out.add(v)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Abstraction functions


def _sigma(q: TraceQueries, cfg: Cfg) -> dict[str, frozenset]:
    sigma: dict[str, frozenset] = {x: frozenset({v}) for x, v in zip(cfg.locals, q.trace.state)}
    for g in cfg.globals:
        v = q.tl_written_value(g)
        sigma[g] = frozenset() if v is None else frozenset({v})
    return sigma


@dataclass(frozen=True)
class BetaLock:
    V: dict[str, frozenset[str]]
    L: dict[str, MinAntichain]
    sigma: dict[str, frozenset]


@dataclass(frozen=True)
class BetaWrite:
    W: dict[str, MinAntichain]
    P: dict[str, MinAntichain]
    sigma: dict[str, frozenset]


def beta_lock(cfg: Cfg, t: LocalTrace, q: Optional[TraceQueries] = None) -> BetaLock:
    q = q or trace_queries(cfg, t)
    V: dict[str, frozenset[str]] = {}
    L: dict[str, MinAntichain] = {}
    for a in cfg.mutexes:
        lk = q.last_tl_lock[a]
        since = 0 if lk is None else lk
        V[a] = frozenset(
            g for g in cfg.globals
            if q.last_tl_write[g] is not None and q.last_tl_write[g] >= since  # type: ignore[operator]
        )
        # Background lockset: held just before the lock.
        L[a] = AC_EMPTY if lk is None else ac_of([q.locksets[lk - 1]])
    return BetaLock(V, L, _sigma(q, cfg))


def beta_write(cfg: Cfg, t: LocalTrace, q: Optional[TraceQueries] = None) -> BetaWrite:
    q = q or trace_queries(cfg, t)
    W: dict[str, MinAntichain] = {}
    P: dict[str, MinAntichain] = {}
    for g in cfg.globals:
        j = q.last_tl_write[g]
        if j is None:
            W[g], P[g] = AC_EMPTY, AC_FULL
        else:
            W[g] = ac_of([q.locksets[j]])
            P[g] = q.min_lockset_since(j)
    return BetaWrite(W, P, _sigma(q, cfg))


def _sigma_violations(sigma: dict[str, frozenset], abstract) -> list[str]:
    return [
        f"sigma[{x}]: {sorted(map(str, vs))} not in {abstract[x]}"
        for x, vs in sigma.items()
        if any(v not in abstract[x] for v in vs)
    ]


def beta_lock_violations(b: BetaLock, state) -> list[str]:
    """Membership of a trace with abstraction ``b`` in gamma of a lock-centered state."""
    if state is None:
        return ["trace reaches a state the analysis considers unreachable"]
    errs = [f"V[{a}]" for a in b.V if not state.V[a] <= b.V[a]]
    errs += [f"L[{a}]" for a in b.L if not ac_leq(b.L[a], state.L[a])]
    return errs + _sigma_violations(b.sigma, state.sigma)


def beta_write_violations(b: BetaWrite, state) -> list[str]:
    if state is None:
        return ["trace reaches a state the analysis considers unreachable"]
    errs = [f"W[{g}]" for g in b.W if not ac_leq(b.W[g], state.W[g])]
    errs += [f"P[{g}]" for g in b.P if not ac_leq(b.P[g], state.P[g])]
    return errs + _sigma_violations(b.sigma, state.sigma)
