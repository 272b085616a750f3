"""Local traces: per-thread runs glued by create and per-mutex locking edges.

A node is identified by ``(tid, j)``: the ``j``-th configuration of thread
``tid``.  The trace is valid when the axioms checked by :func:`validate`
hold: causality is acyclic with the initial node as unique least element and
the sink as unique greatest element, create and locking edges have the right
cardinalities, and every read observes the unique latest preceding write.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .. import kernels
from ..lang.cfg import Cfg, Edge
from ..lang.syntax import Create, Lock, ReadGlobal, Unlock, WriteGlobal
from ..lattice import Tid, Value

NodeId = tuple[Tid, int]
ROOT_TID = Tid()
ROOT: NodeId = (ROOT_TID, 0)

State = tuple[Value, ...]


@dataclass(frozen=True)
class Step:
    edge: Edge
    value: Optional[Value] = None  # written or read value for global accesses


@dataclass(frozen=True)
class Run:
    """Raw trace of one thread."""

    tid: Tid
    points: tuple[int, ...]
    states: tuple[State, ...]
    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.points)

    def extend(self, step: Step, state: State) -> "Run":
        return Run(self.tid, self.points + (step.edge.dst,), self.states + (state,),
                   self.steps + (step,))

    def is_prefix_of(self, other: "Run") -> bool:
        n = len(self.points)
        return (
            n <= len(other.points)
            and other.points[:n] == self.points
            and other.states[:n] == self.states
            and other.steps[: n - 1] == self.steps
        )


class InvalidTrace(Exception):
    pass


@dataclass(frozen=True)
class LocalTrace:
    ego: Tid
    runs: tuple[Run, ...]  # sorted by tid
    creates: frozenset[tuple[NodeId, NodeId]] = frozenset()
    chains: frozenset[tuple[str, NodeId, NodeId]] = frozenset()
    _by_tid: dict = field(default=None, init=False, repr=False, compare=False, hash=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_tid", {r.tid: r for r in self.runs})

    # -- basic queries --------------------------------------------------------

    def run(self, tid: Tid) -> Run:
        return self._by_tid[tid]

    def has(self, tid: Tid) -> bool:
        return tid in self._by_tid

    @property
    def ego_run(self) -> Run:
        return self._by_tid[self.ego]

    @property
    def sink(self) -> NodeId:
        return (self.ego, len(self.ego_run) - 1)

    @property
    def loc(self) -> int:
        return self.ego_run.points[-1]

    @property
    def state(self) -> State:
        return self.ego_run.states[-1]

    @property
    def last(self) -> Optional[Step]:
        steps = self.ego_run.steps
        return steps[-1] if steps else None

    @property
    def id(self) -> Tid:
        return self.ego

    def is_init(self) -> bool:
        return self.ego == ROOT_TID and len(self.runs) == 1 and len(self.runs[0]) == 1

    def event_counts(self) -> dict[Tid, int]:
        return {r.tid: len(r.steps) for r in self.runs}

    def max_events(self) -> int:
        return max(len(r.steps) for r in self.runs)

    def nodes(self) -> Iterator[NodeId]:
        for r in self.runs:
            for j in range(len(r)):
                yield (r.tid, j)

    def incoming(self, n: NodeId) -> Optional[Step]:
        tid, j = n
        return self._by_tid[tid].steps[j - 1] if j > 0 else None

    def node_point(self, n: NodeId) -> int:
        return self._by_tid[n[0]].points[n[1]]

    def node_state(self, n: NodeId) -> State:
        return self._by_tid[n[0]].states[n[1]]

    def size(self) -> int:
        return sum(len(r) for r in self.runs)

    # -- structural edits -------------------------------------------------------

    def with_run(self, run: Run, ego: Optional[Tid] = None) -> "LocalTrace":
        runs = dict(self._by_tid)
        runs[run.tid] = run
        return LocalTrace(
            self.ego if ego is None else ego,
            tuple(runs[t] for t in sorted(runs)),
            self.creates,
            self.chains,
        )

    def __str__(self) -> str:
        parts = []
        for r in self.runs:
            mark = "*" if r.tid == self.ego else ""
            parts.append(f"{mark}{r.tid}:{'/'.join(map(str, r.points))}")
        return "<" + " ".join(parts) + ">"


def init_trace(cfg: Cfg) -> LocalTrace:
    state: State = tuple(ROOT_TID if x == "self" else 0 for x in cfg.locals)
    return LocalTrace(ROOT_TID, (Run(ROOT_TID, (cfg.entry,), (state,), ()),))


# ---------------------------------------------------------------------------
# Validation


@dataclass
class _Index:
    ids: dict[NodeId, int]
    order: list[NodeId]


def _index(t: LocalTrace) -> _Index:
    ids: dict[NodeId, int] = {}
    order: list[NodeId] = []
    for n in t.nodes():
        ids[n] = len(order)
        order.append(n)
    return _Index(ids, order)


def causal_edges(t: LocalTrace, idx: _Index) -> tuple[list[int], list[int]]:
    src: list[int] = []
    dst: list[int] = []
    ids = idx.ids
    for r in t.runs:
        base = ids[(r.tid, 0)]
        for j in range(len(r) - 1):
            src.append(base + j)
            dst.append(base + j + 1)
    for a, b in t.creates:
        src.append(ids[a])
        dst.append(ids[b])
    for _, a, b in t.chains:
        src.append(ids[a])
        dst.append(ids[b])
    return src, dst


def validate(cfg: Cfg, t: LocalTrace) -> list[str]:
    """Check every axiom; returns the list of violations (empty when valid)."""
    errs: list[str] = []
    self_ix = cfg.locals.index("self")
    if not t.has(ROOT_TID):
        return ["initial thread missing"]
    if not t.has(t.ego):
        return ["ego thread missing"]
    root = t.run(ROOT_TID)
    if root.points[0] != cfg.entry or root.states[0][self_ix] != ROOT_TID:
        errs.append("initial node is not at the entry point with self = 0")

    # Runs are paths through the CFG of their thread, with consistent locksets.
    for r in t.runs:
        held: set[str] = set()
        thread = cfg.node(r.points[0]).thread
        if r.states[0][self_ix] != r.tid:
            errs.append(f"thread {r.tid}: self does not hold its id")
        for j, s in enumerate(r.steps):
            e = s.edge
            if e.src != r.points[j] or e.dst != r.points[j + 1]:
                errs.append(f"thread {r.tid}: step {j} does not follow the CFG")
                continue
            if cfg.node(e.dst).thread != thread:
                errs.append(f"thread {r.tid}: leaves its thread")
            a = e.action
            if isinstance(a, Lock):
                if a.mutex in held:
                    errs.append(f"thread {r.tid}: re-locks {a.mutex}")
                held.add(a.mutex)
            elif isinstance(a, Unlock):
                if a.mutex not in held:
                    errs.append(f"thread {r.tid}: unlocks {a.mutex} without holding it")
                held.discard(a.mutex)
            elif isinstance(a, ReadGlobal):
                if r.states[j + 1][cfg.locals.index(a.target)] != s.value:
                    errs.append(f"thread {r.tid}: read value not stored")
            elif isinstance(a, Create):
                child = r.tid.child(j)
                if r.states[j + 1][cfg.locals.index(a.target)] != child:
                    errs.append(f"thread {r.tid}: create result is not the child id")

    # Create order.
    created_by: dict[NodeId, list[NodeId]] = {}
    out_creates: dict[NodeId, int] = {}
    for a, b in t.creates:
        created_by.setdefault(b, []).append(a)
        out_creates[a] = out_creates.get(a, 0) + 1
    for r in t.runs:
        start = (r.tid, 0)
        creators = created_by.get(start, [])
        if r.tid == ROOT_TID:
            if creators:
                errs.append("initial node has a creator")
            continue
        if len(creators) != 1:
            errs.append(f"thread {r.tid}: {len(creators)} creators")
            continue
        p, j = creators[0]
        if not t.has(p) or j >= len(t.run(p)):
            errs.append(f"thread {r.tid}: creator node missing")
            continue
        if p.child(j) != r.tid:
            errs.append(f"thread {r.tid}: id does not match its creation history")
        prun = t.run(p)
        spawn = [e for e in cfg.out[prun.points[j]] if isinstance(e.action, Create)]
        if len(spawn) != 1 or cfg.thread_entries[spawn[0].action.thread] != r.points[0]:
            errs.append(f"thread {r.tid}: creator cannot create this thread")
        elif j < len(prun.steps) and prun.steps[j].edge != spawn[0]:
            errs.append(f"thread {r.tid}: creator took another edge")
        expect = list(prun.states[j])
        expect[self_ix] = r.tid
        if tuple(expect) != r.states[0]:
            errs.append(f"thread {r.tid}: locals disagree with creator")
    for a, b in t.creates:
        if b[1] != 0 or not t.has(b[0]):
            errs.append("create edge does not target a start node")
    if any(n > 1 for n in out_creates.values()):
        errs.append("a create node creates more than one thread")

    # Locking order.
    preds: dict[tuple[str, NodeId], int] = {}
    succs: dict[tuple[str, NodeId], int] = {}
    for m, a, b in t.chains:
        step_b = t.incoming(b) if t.has(b[0]) and b[1] < len(t.run(b[0])) else None
        if step_b is None or not (isinstance(step_b.edge.action, Lock) and step_b.edge.action.mutex == m):
            errs.append(f"{m}-edge does not end in lock({m})")
        if a != ROOT:
            step_a = t.incoming(a) if t.has(a[0]) and a[1] < len(t.run(a[0])) else None
            if step_a is None or not (
                isinstance(step_a.edge.action, Unlock) and step_a.edge.action.mutex == m
            ):
                errs.append(f"{m}-edge does not start at unlock({m}) or the initial node")
        preds[(m, b)] = preds.get((m, b), 0) + 1
        succs[(m, a)] = succs.get((m, a), 0) + 1
    for r in t.runs:
        for j, s in enumerate(r.steps):
            a = s.edge.action
            if isinstance(a, Lock) and preds.get((a.mutex, (r.tid, j + 1)), 0) != 1:
                errs.append(f"lock({a.mutex}) at {r.tid}/{j + 1} lacks a unique predecessor")
    if any(n > 1 for n in succs.values()):
        errs.append("a locking edge source has more than one successor")
    if errs:
        return errs

    # Causality: acyclic, unique least and greatest elements, globals consistency.
    idx = _index(t)
    src, dst = causal_edges(t, idx)
    n = len(idx.order)
    indeg = [0] * n
    outdeg = [0] * n
    for a, b in zip(src, dst):
        outdeg[a] += 1
        indeg[b] += 1
    sources = [i for i in range(n) if indeg[i] == 0]
    sinks = [i for i in range(n) if outdeg[i] == 0]
    if sources != [idx.ids[ROOT]]:
        errs.append("no unique least element")
    if sinks != [idx.ids[t.sink]]:
        errs.append("sink is not the unique maximal element")

    writes: dict[str, list[int]] = {}
    reads: list[tuple[int, str, Value]] = []
    for r in t.runs:
        for j, s in enumerate(r.steps):
            a = s.edge.action
            if isinstance(a, WriteGlobal):
                writes.setdefault(a.glob, []).append(idx.ids[(r.tid, j + 1)])
            elif isinstance(a, ReadGlobal):
                reads.append((idx.ids[(r.tid, j + 1)], a.glob, s.value))
    queries = [(node, writes.get(g, [])) for node, g, _ in reads]
    result = kernels.maximal_predecessors(n, src, dst, queries)
    if result is None:
        errs.append("causality is cyclic")
        return errs
    for (node, g, v), maxima in zip(reads, result):
        if len(maxima) != 1:
            errs.append(f"read of {g} at {idx.order[node]} has {len(maxima)} latest writes")
            continue
        w = idx.order[maxima[0]]
        if t.incoming(w).value != v:  # type: ignore[union-attr]
            errs.append(f"read of {g} at {idx.order[node]} does not see the latest write")
    return errs


def check(cfg: Cfg, t: LocalTrace) -> LocalTrace:
    errs = validate(cfg, t)
    if errs:
        raise InvalidTrace(f"{t}: " + "; ".join(errs))
    return t
