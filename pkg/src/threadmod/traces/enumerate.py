"""Bounded enumeration of local traces, globally and through the local system."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

from ..lang.cfg import Cfg, Edge
from ..lang.syntax import Create, Lock, Unlock
from ..lattice import LatticeKind
from ..solver import Assignment, ConstraintSystem, Rhs, View, solve
from .semantics import Semantics, TraceConfig
from .trace import LocalTrace, init_trace


class TraceBudgetExceeded(RuntimeError):
    pass


@dataclass
class Enumeration:
    traces: frozenset[LocalTrace]
    truncated: bool
    blocked_reads: frozenset[str]

    def at(self, u: int) -> frozenset[LocalTrace]:
        return frozenset(t for t in self.traces if t.loc == u)

    def ending_in_unlock(self, a: str) -> frozenset[LocalTrace]:
        out = set()
        for t in self.traces:
            last = t.last
            if last is not None and isinstance(last.edge.action, Unlock) and last.edge.action.mutex == a:
                out.add(t)
        return frozenset(out)


def init_traces(cfg: Cfg) -> frozenset[LocalTrace]:
    return frozenset({init_trace(cfg)})


def enumerate_global(cfg: Cfg, config: Optional[TraceConfig] = None) -> Enumeration:
    """Least set closed under the step operations, up to the per-thread bound."""
    config = config or TraceConfig()
    sem = Semantics(cfg, config)
    seen: set[LocalTrace] = set()
    work: deque[LocalTrace] = deque()
    partners: dict[str, list[LocalTrace]] = defaultdict(list)
    waiting: dict[str, list[tuple[Edge, LocalTrace]]] = defaultdict(list)

    def add(ts) -> None:
        for t in ts:
            if t not in seen:
                if len(seen) >= config.cap:
                    raise TraceBudgetExceeded(f"more than {config.cap} traces")
                seen.add(t)
                work.append(t)

    add(init_traces(cfg))
    while work:
        t = work.popleft()
        lock_edges = []
        for e in cfg.out[t.loc]:
            if isinstance(e.action, Lock):
                lock_edges.append(e)
            elif isinstance(e.action, Create):
                ext, spawned = sem.step_create(e, t)
                add(ext)
                add(spawned)
            else:
                add(sem.step_unary(e, t))
        if t.is_init():
            partner_of = list(cfg.mutexes)
        else:
            last = t.last
            partner_of = (
                [last.edge.action.mutex]
                if last is not None and isinstance(last.edge.action, Unlock)
                else []
            )
        for e in lock_edges:
            waiting[e.action.mutex].append((e, t))  # type: ignore[union-attr]
        for a in partner_of:
            partners[a].append(t)
        for e in lock_edges:
            for t1 in list(partners[e.action.mutex]):  # type: ignore[union-attr]
                add(sem.step_lock(e, t, t1))
        for a in partner_of:
            for e, t0 in list(waiting[a]):
                if t0 is not t:
                    add(sem.step_lock(e, t0, t))
    return Enumeration(frozenset(seen), sem.truncated, frozenset(sem.blocked_reads))


# ---------------------------------------------------------------------------
# Local constraint system over trace sets


@dataclass(frozen=True)
class TraceAt:
    u: int
    family = None

    def __str__(self) -> str:
        return f"[{self.u}]"


@dataclass(frozen=True)
class MutexTraces:
    a: str
    family = None

    def __str__(self) -> str:
        return f"[{self.a}]"


TRACE_SETS = LatticeKind("traces", frozenset(), lambda a, b: a | b, lambda a, b: a <= b)


@dataclass
class LocalSystem:
    cfg: Cfg
    config: TraceConfig = field(default_factory=TraceConfig)

    def __post_init__(self) -> None:
        self.sem = Semantics(self.cfg, self.config)
        self._cache: dict = {}
        self._rhs: dict[int, list[Rhs]] = defaultdict(list)
        for e in self.cfg.edges:
            self._rhs[e.dst].append(Rhs(str(e), self._make(e)))

    def _memo(self, key, fn):
        r = self._cache.get(key)
        if r is None:
            r = self._cache[key] = fn()
        return r

    def _make(self, e: Edge):
        a = e.action
        src = TraceAt(e.src)
        sem = self.sem

        if isinstance(a, Lock):
            def lock_rhs(view: View):
                out: set = set()
                partners = view.get(MutexTraces(a.mutex))
                for t0 in view.get(src):
                    for t1 in partners:
                        out.update(self._memo((e, t0, t1), lambda: sem.step_lock(e, t0, t1)))
                return {}, frozenset(out)
            return lock_rhs

        if isinstance(a, Create):
            entry = TraceAt(self.cfg.thread_entries[a.thread])

            def create_rhs(view: View):
                ext: set = set()
                spawned: set = set()
                for t in view.get(src):
                    x, s = self._memo((e, t), lambda: sem.step_create(e, t))
                    ext.update(x)
                    spawned.update(s)
                return {entry: frozenset(spawned)}, frozenset(ext)
            return create_rhs

        def unary_rhs(view: View):
            out: set = set()
            for t in view.get(src):
                out.update(self._memo((e, t), lambda: sem.step_unary(e, t)))
            res = frozenset(out)
            if isinstance(a, Unlock):
                return {MutexTraces(a.mutex): res}, res
            return {}, res
        return unary_rhs

    def rhs_of(self, x) -> list[Rhs]:
        return self._rhs.get(x.u, []) if isinstance(x, TraceAt) else []

    def system(self) -> ConstraintSystem:
        init = init_traces(self.cfg)
        seeds = {TraceAt(self.cfg.entry): init}
        seeds.update({MutexTraces(a): init for a in self.cfg.mutexes})
        return ConstraintSystem(lambda x: TRACE_SETS, self.rhs_of, seeds)

    def roots(self) -> list[TraceAt]:
        return [TraceAt(n.id) for n in self.cfg.nodes]


def enumerate_local(cfg: Cfg, config: Optional[TraceConfig] = None, **solve_kw) -> Assignment:
    """Solve the local system; unknowns ``TraceAt(u)`` and ``MutexTraces(a)``."""
    ls = LocalSystem(cfg, config or TraceConfig())
    a = solve(ls.system(), ls.roots(), **solve_kw)
    total = sum(len(a[TraceAt(n.id)]) for n in cfg.nodes)
    if total > ls.config.cap:
        raise TraceBudgetExceeded(f"more than {ls.config.cap} traces")
    return a
