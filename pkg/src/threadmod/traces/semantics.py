"""Concrete transfer functions on local traces."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import kernels
from ..lang.cfg import AssignLocal, Cfg, Edge, Guard
from ..lang.syntax import BinOp, Const, Create, Expr, InputExpr, Lock, ReadGlobal, Unlock, Var, WriteGlobal
from ..lattice import Tid, Value
from .trace import ROOT, InvalidTrace, LocalTrace, NodeId, Run, State, Step, _index, causal_edges, validate

DEFAULT_BOUND = 32
DEFAULT_INPUTS = (0, 1)
DEFAULT_CAP = 10**5


class EvalError(Exception):
    """Arithmetic or ordering applied to a thread id."""


def eval_concrete(e: Expr, env: dict[str, Value]) -> Value:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    assert isinstance(e, BinOp)
    a, b = eval_concrete(e.left, env), eval_concrete(e.right, env)
    if e.op == "==":
        return int(a == b)
    if e.op == "!=":
        return int(a != b)
    if isinstance(a, Tid) or isinstance(b, Tid):
        raise EvalError(f"operator {e.op} applied to a thread id")
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "<":
        return int(a < b)
    return int(a <= b)


def truthy(v: Value) -> bool:
    return isinstance(v, Tid) or v != 0


@dataclass
class TraceConfig:
    bound: int = DEFAULT_BOUND
    inputs: tuple[int, ...] = DEFAULT_INPUTS
    cap: int = DEFAULT_CAP
    check_steps: bool = True


@dataclass
class Semantics:
    """Step operations for one CFG.  Records whether the bound cut anything
    off and which reads found no prior write."""

    cfg: Cfg
    config: TraceConfig = field(default_factory=TraceConfig)
    truncated: bool = False
    blocked_reads: set = field(default_factory=set)

    def __post_init__(self) -> None:
        self.locals = self.cfg.locals
        self.pos = {x: i for i, x in enumerate(self.locals)}

    # -- helpers ---------------------------------------------------------------

    def env(self, s: State) -> dict[str, Value]:
        return dict(zip(self.locals, s))

    def assign(self, s: State, x: str, v: Value) -> State:
        i = self.pos[x]
        return s[:i] + (v,) + s[i + 1 :]

    def held(self, t: LocalTrace) -> frozenset[str]:
        held: set[str] = set()
        for s in t.ego_run.steps:
            a = s.edge.action
            if isinstance(a, Lock):
                held.add(a.mutex)
            elif isinstance(a, Unlock):
                held.discard(a.mutex)
        return frozenset(held)

    def room(self, t: LocalTrace) -> bool:
        if len(t.ego_run.steps) >= self.config.bound:
            self.truncated = True
            return False
        return True

    def extend(self, t: LocalTrace, e: Edge, state: State, value: Optional[Value] = None) -> LocalTrace:
        return t.with_run(t.ego_run.extend(Step(e, value), state))

    def checked(self, t: LocalTrace) -> LocalTrace:
        if self.config.check_steps:
            errs = validate(self.cfg, t)
            if errs:
                raise InvalidTrace(f"step produced an invalid trace {t}: {'; '.join(errs)}")
        return t

    def latest_write(self, t: LocalTrace, g: str) -> Optional[list[NodeId]]:
        """Maximal writes to ``g`` at or below the sink."""
        last = t.last
        if last is not None and isinstance(last.edge.action, WriteGlobal) and last.edge.action.glob == g:
            return [t.sink]
        idx = _index(t)
        writes = []
        for r in t.runs:
            for j, s in enumerate(r.steps):
                if isinstance(s.edge.action, WriteGlobal) and s.edge.action.glob == g:
                    writes.append(idx.ids[(r.tid, j + 1)])
        src, dst = causal_edges(t, idx)
        res = kernels.maximal_predecessors(len(idx.order), src, dst, [(idx.ids[t.sink], writes)])
        if res is None:
            return None
        return [idx.order[i] for i in res[0]]

    # -- steps -----------------------------------------------------------------

    def step_unary(self, e: Edge, t: LocalTrace) -> list[LocalTrace]:
        assert t.loc == e.src, "edge does not leave the trace's program point"
        a = e.action
        if isinstance(a, (Create, Lock)):
            raise ValueError("use step_create / step_lock for this edge")
        if not self.room(t):
            return []
        s = t.state
        if isinstance(a, Unlock):
            if a.mutex not in self.held(t):
                return []
            return [self.checked(self.extend(t, e, s))]
        if isinstance(a, Guard):
            try:
                ok = truthy(eval_concrete(a.expr, self.env(s))) == a.positive
            except EvalError:
                return []
            return [self.checked(self.extend(t, e, s))] if ok else []
        if isinstance(a, AssignLocal):
            if isinstance(a.expr, InputExpr):
                return [self.checked(self.extend(t, e, self.assign(s, a.target, v)))
                        for v in self.config.inputs]
            try:
                v = eval_concrete(a.expr, self.env(s))
            except EvalError:
                return []
            return [self.checked(self.extend(t, e, self.assign(s, a.target, v)))]
        if isinstance(a, WriteGlobal):
            try:
                v = eval_concrete(a.expr, self.env(s))
            except EvalError:
                return []
            return [self.checked(self.extend(t, e, s, v))]
        assert isinstance(a, ReadGlobal)
        maxima = self.latest_write(t, a.glob)
        if not maxima:
            self.blocked_reads.add(e.site)
            return []
        if len(maxima) != 1:
            return []
        v = t.incoming(maxima[0]).value  # type: ignore[union-attr]
        return [self.checked(self.extend(t, e, self.assign(s, a.target, v), v))]

    def step_create(self, e: Edge, t: LocalTrace) -> tuple[list[LocalTrace], list[LocalTrace]]:
        assert t.loc == e.src and isinstance(e.action, Create)
        if not self.room(t):
            return [], []
        sink = t.sink
        child = t.ego.child(sink[1])
        s = t.state
        extended = self.extend(t, e, self.assign(s, e.action.target, child))
        start = Run(child, (self.cfg.thread_entries[e.action.thread],), (self.assign(s, "self", child),), ())
        spawned = LocalTrace(
            child,
            tuple(sorted(t.runs + (start,), key=lambda r: r.tid)),
            t.creates | {(sink, (child, 0))},
            t.chains,
        )
        return [self.checked(extended)], [self.checked(spawned)]

    def lock_source(self, a: str, t1: LocalTrace) -> Optional[NodeId]:
        if t1.is_init():
            return ROOT
        last = t1.last
        if last is not None and isinstance(last.edge.action, Unlock) and last.edge.action.mutex == a:
            return t1.sink
        return None

    def step_lock(self, e: Edge, t0: LocalTrace, t1: LocalTrace) -> list[LocalTrace]:
        assert t0.loc == e.src and isinstance(e.action, Lock)
        a = e.action.mutex
        src = self.lock_source(a, t1)
        if src is None or a in self.held(t0) or not self.room(t0):
            return []
        runs = {r.tid: r for r in t0.runs}
        for r1 in t1.runs:
            r0 = runs.get(r1.tid)
            if r0 is None:
                runs[r1.tid] = r1
            elif r1.is_prefix_of(r0):
                continue
            elif r0.is_prefix_of(r1) and r1.tid != t0.ego:
                runs[r1.tid] = r1
            else:
                return []
        ego = runs[t0.ego].extend(Step(e), t0.state)
        runs[t0.ego] = ego
        merged = LocalTrace(
            t0.ego,
            tuple(runs[t] for t in sorted(runs)),
            t0.creates | t1.creates,
            t0.chains | t1.chains | {(a, src, (t0.ego, len(ego) - 1))},
        )
        return [merged] if not validate(self.cfg, merged) else []
