"""Demand-driven solver for side-effecting constraint systems.

A right-hand side receives a :class:`View` and returns
``(side_effects, contribution)``; side effects map unknowns to values that
are joined into those unknowns.  Reads through the view are recorded as
dependencies and recomputed on every evaluation.  ``View.family`` returns the
members of an unknown family that have been written so far and keeps the
reader subscribed to later members.
"""

from __future__ import annotations

import os
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Optional, Sequence

from .lattice import LatticeKind

DEFAULT_BUDGET = 10**6
BUDGET_ENV = "CONC_AI_BUDGET"


def _ls(s: frozenset) -> str:
    return "{" + ",".join(sorted(s)) + "}"


# ---------------------------------------------------------------------------
# Unknowns


@dataclass(frozen=True)
class PP:
    """Program point ``u`` reached with lockset ``S``."""

    u: int
    S: frozenset[str]

    family = None

    def __str__(self) -> str:
        return f"[{self.u},{_ls(self.S)}]"


@dataclass(frozen=True)
class ProtG:
    g: str
    family = None

    def __str__(self) -> str:
        return f"[{self.g}]"


@dataclass(frozen=True)
class ProtGUnprot:
    g: str
    family = None

    def __str__(self) -> str:
        return f"[{self.g}]'"


@dataclass(frozen=True)
class SyncG:
    g: str
    a: str
    S: frozenset[str]

    @property
    def family(self) -> Hashable:
        return ("SyncG", self.g)

    def __str__(self) -> str:
        return f"[{self.g},{self.a},{_ls(self.S)}]"


@dataclass(frozen=True)
class WriteG:
    g: str
    a: str
    S: frozenset[str]
    w: frozenset[str]

    @property
    def family(self) -> Hashable:
        return ("WriteG", self.g)

    def __str__(self) -> str:
        return f"[{self.g},{self.a},{_ls(self.S)},{_ls(self.w)}]"


@dataclass(frozen=True)
class MProt:
    g: str
    family = None

    def __str__(self) -> str:
        return f"M[{self.g}]"


def unknown_sort_key(x: Any) -> tuple:
    return (type(x).__name__, str(x))


# ---------------------------------------------------------------------------
# Systems


@dataclass(frozen=True)
class Rhs:
    label: str
    fn: Callable[["View"], tuple[Mapping[Any, Any], Any]]


@dataclass
class ConstraintSystem:
    lattice_of: Callable[[Any], LatticeKind]
    rhs_of: Callable[[Any], Sequence[Rhs]]
    seeds: dict[Any, Any] = field(default_factory=dict)

    def bottom(self, x: Any) -> Any:
        return self.lattice_of(x).bottom


class SolverBudgetExceeded(RuntimeError):
    def __init__(self, budget: int, growing: list[tuple[str, int]]):
        self.budget = budget
        self.growing = growing
        top = ", ".join(f"{x} ({n}x)" for x, n in growing[:10])
        super().__init__(f"solver budget of {budget} evaluations exceeded; growing: {top}")


class RestartBudgetExceeded(RuntimeError):
    pass


@dataclass
class Stats:
    evaluations: int = 0
    unknowns: int = 0
    restarts: int = 0

    def to_json(self) -> dict:
        return {
            "rhs_evaluations": self.evaluations,
            "unknowns_materialized": self.unknowns,
            "restarts": self.restarts,
        }


class Assignment(Mapping[Any, Any]):
    """Immutable solver result; absent unknowns read as their bottom."""

    def __init__(self, cs: ConstraintSystem, values: dict, domain: Iterable, stats: Stats):
        self.cs = cs
        self._values = dict(values)
        self.domain = frozenset(domain)
        self.stats = stats

    def __getitem__(self, x: Any) -> Any:
        if x in self._values:
            return self._values[x]
        return self.cs.bottom(x)

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, x: object) -> bool:
        return x in self._values

    def family(self, key: Hashable) -> list[tuple[Any, Any]]:
        return sorted(
            ((x, v) for x, v in self._values.items() if getattr(x, "family", None) == key),
            key=lambda p: unknown_sort_key(p[0]),
        )

    def dump(self) -> str:
        lines = []
        for x in sorted(self._values, key=unknown_sort_key):
            lines.append(f"{x} := {self.cs.lattice_of(x).show(self._values[x])}")
        return "\n".join(lines)


class View:
    """Read access handed to right-hand sides."""

    def get(self, x: Any) -> Any:  # pragma: no cover - interface
        raise NotImplementedError

    def family(self, key: Hashable) -> list[tuple[Any, Any]]:  # pragma: no cover
        raise NotImplementedError


class _FixedView(View):
    def __init__(self, a: Assignment):
        self.a = a

    def get(self, x: Any) -> Any:
        return self.a[x]

    def family(self, key: Hashable) -> list[tuple[Any, Any]]:
        return self.a.family(key)


# ---------------------------------------------------------------------------
# Solver


class _Restart(Exception):
    pass


class _Solver:
    def __init__(
        self,
        cs: ConstraintSystem,
        order: str,
        budget: Optional[int],
        trace: Optional[Callable[[Any, int, bool], None]],
        watch: frozenset,
    ):
        self.cs = cs
        self.values: dict[Any, Any] = {}
        self.infl: dict[Any, set] = {}
        self.fam_infl: dict[Hashable, set] = {}
        self.members: dict[Hashable, dict[Any, None]] = {}
        self.deps: dict[Any, set] = {}
        self.fam_deps: dict[Any, set] = {}
        self.evaluated: set = set()
        self.rhs_cache: dict[Any, Sequence[Rhs]] = {}
        self.queue: deque = deque()
        self.queued: set = set()
        self.fifo = order == "fifo"
        if budget is None:
            budget = int(os.environ.get(BUDGET_ENV, DEFAULT_BUDGET))
        self.budget = budget
        self.trace = trace
        self.watch = watch
        self.counts: Counter = Counter()
        self.evals = 0

    def rhs(self, x: Any) -> Sequence[Rhs]:
        r = self.rhs_cache.get(x)
        if r is None:
            r = self.rhs_cache[x] = tuple(self.cs.rhs_of(x))
        return r

    def push(self, x: Any) -> None:
        if x not in self.queued:
            self.queued.add(x)
            self.queue.append(x)

    def materialize(self, x: Any) -> None:
        key = getattr(x, "family", None)
        if key is None:
            return
        members = self.members.setdefault(key, {})
        if x not in members:
            members[x] = None
            for r in list(self.fam_infl.get(key, ())):
                self.push(r)

    def contribute(self, x: Any, v: Any) -> bool:
        lat = self.cs.lattice_of(x)
        old = self.values.get(x, lat.bottom)
        if lat.leq(v, old):
            return False
        new = lat.join(old, v)
        self.values[x] = new
        self.materialize(x)
        if x in self.watch and self.infl.get(x):
            raise _Restart(x)
        for r in list(self.infl.get(x, ())):
            self.push(r)
        return True

    def view_for(self, reader: Any) -> View:
        solver = self

        class _V(View):
            def get(self, x: Any) -> Any:
                solver.deps[reader].add(x)
                solver.infl.setdefault(x, set()).add(reader)
                if x not in solver.evaluated and solver.rhs(x):
                    solver.push(x)
                return solver.values.get(x, solver.cs.bottom(x))

            def family(self, key: Hashable) -> list[tuple[Any, Any]]:
                solver.fam_deps[reader].add(key)
                solver.fam_infl.setdefault(key, set()).add(reader)
                out = []
                for x in solver.members.get(key, ()):
                    out.append((x, self.get(x)))
                return out

        return _V()

    def evaluate(self, x: Any) -> None:
        self.evals += 1
        self.counts[x] += 1
        if self.evals > self.budget:
            growing = [(str(u), n) for u, n in self.counts.most_common(20)]
            raise SolverBudgetExceeded(self.budget, growing)
        for d in self.deps.get(x, ()):
            self.infl.get(d, set()).discard(x)
        for k in self.fam_deps.get(x, ()):
            self.fam_infl.get(k, set()).discard(x)
        self.deps[x] = set()
        self.fam_deps[x] = set()
        self.evaluated.add(x)
        lat = self.cs.lattice_of(x)
        acc = lat.bottom
        effects: dict[Any, Any] = {}
        view = self.view_for(x)
        for r in self.rhs(x):
            eff, contrib = r.fn(view)
            acc = lat.join(acc, contrib)
            for y, v in eff.items():
                if y in effects:
                    effects[y] = self.cs.lattice_of(y).join(effects[y], v)
                else:
                    effects[y] = v
        for y in sorted(effects, key=unknown_sort_key):
            self.contribute(y, effects[y])
        changed = self.contribute(x, acc)
        if self.trace is not None:
            self.trace(x, len(self.deps[x]), changed)

    def run(self, roots: Iterable[Any]) -> None:
        for x, v in self.cs.seeds.items():
            self.contribute(x, v)
        for x in roots:
            self.push(x)
        # LIFO pops from the right; push roots reversed so the first root runs first.
        if not self.fifo:
            self.queue.reverse()
        while self.queue:
            x = self.queue.popleft() if self.fifo else self.queue.pop()
            self.queued.discard(x)
            self.evaluate(x)


def solve(
    cs: ConstraintSystem,
    roots: Iterable[Any],
    *,
    order: str = "lifo",
    budget: Optional[int] = None,
    trace: Optional[Callable[[Any, int, bool], None]] = None,
) -> Assignment:
    roots = list(roots)
    s = _Solver(cs, order, budget, trace, frozenset())
    s.run(roots)
    stats = Stats(s.evals, len(s.values), 0)
    return Assignment(cs, s.values, set(roots) | s.evaluated | set(s.values), stats)


def solve_with_restarts(
    cs: ConstraintSystem,
    roots: Iterable[Any],
    shrink_watch: Iterable[Any],
    *,
    order: str = "lifo",
    budget: Optional[int] = None,
    max_restarts: Optional[int] = None,
    trace: Optional[Callable[[Any, int, bool], None]] = None,
) -> Assignment:
    """Solve, restarting from scratch whenever a watched unknown grows after
    being read.  Watched values survive restarts as extra seeds."""
    roots = list(roots)
    watch = frozenset(shrink_watch)
    if max_restarts is None:
        max_restarts = len(watch) + 1
    kept: dict[Any, Any] = {}
    restarts = 0
    total_evals = 0
    while True:
        seeds = dict(cs.seeds)
        for x, v in kept.items():
            seeds[x] = cs.lattice_of(x).join(seeds.get(x, cs.bottom(x)), v)
        run_cs = ConstraintSystem(cs.lattice_of, cs.rhs_of, seeds)
        remaining = None if budget is None else budget - total_evals
        s = _Solver(run_cs, order, remaining, trace, watch)
        try:
            s.run(roots)
        except _Restart:
            total_evals += s.evals
            restarts += 1
            if restarts > max_restarts:
                raise RestartBudgetExceeded(f"more than {max_restarts} restarts")
            kept = {x: v for x, v in s.values.items() if x in watch}
            continue
        total_evals += s.evals
        stats = Stats(total_evals, len(s.values), restarts)
        return Assignment(run_cs, s.values, set(roots) | s.evaluated | set(s.values), stats)


@dataclass(frozen=True)
class Violation:
    constraint: str
    unknown: Any
    expected: Any
    actual: Any

    def __str__(self) -> str:
        return f"{self.constraint}: {self.unknown} needs {self.expected}, has {self.actual}"


def verify_post_solution(cs: ConstraintSystem, a: Assignment) -> list[Violation]:
    """All constraints (and seeds) not accounted for by ``a``."""
    out: list[Violation] = []
    view = _FixedView(a)
    for x, v in cs.seeds.items():
        if not cs.lattice_of(x).leq(v, a[x]):
            out.append(Violation("seed", x, v, a[x]))
    for x in sorted(a.domain, key=unknown_sort_key):
        lat = cs.lattice_of(x)
        for r in cs.rhs_of(x):
            eff, contrib = r.fn(view)
            if not lat.leq(contrib, a[x]):
                out.append(Violation(f"{x} <- {r.label}", x, contrib, a[x]))
            for y, v in eff.items():
                if not cs.lattice_of(y).leq(v, a[y]):
                    out.append(Violation(f"{x} <- {r.label} (side effect)", y, v, a[y]))
    return out
