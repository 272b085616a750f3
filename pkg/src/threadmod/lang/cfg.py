"""Control-flow graphs with action-labelled edges.

Actions reuse the statement classes for the primitive operations
(``Create``, ``Lock``, ``Unlock``, ``WriteGlobal``, ``ReadGlobal``) and add
``Guard`` and ``AssignLocal``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Union

from .syntax import (
    Assign,
    Const,
    Create,
    Expr,
    If,
    InputExpr,
    Lock,
    Pos,
    Program,
    ReadGlobal,
    Stmt,
    Unlock,
    ValidationError,
    While,
    WriteGlobal,
)


@dataclass(frozen=True)
class Guard:
    """Passable when ``expr`` is non-zero (``positive``) or zero (not ``positive``)."""

    expr: Expr
    positive: bool = True

    def __str__(self) -> str:
        return f"[{self.expr}]" if self.positive else f"[!({self.expr})]"


@dataclass(frozen=True)
class AssignLocal:
    target: str
    expr: Expr

    def __str__(self) -> str:
        return f"{self.target} = {self.expr}"


Action = Union[Guard, AssignLocal, Create, Lock, Unlock, WriteGlobal, ReadGlobal]


def action_str(a: Action) -> str:
    if isinstance(a, (Guard, AssignLocal)):
        return str(a)
    if isinstance(a, Create):
        return f"{a.target} = create({a.thread})"
    if isinstance(a, Lock):
        return f"lock({a.mutex})"
    if isinstance(a, Unlock):
        return f"unlock({a.mutex})"
    if isinstance(a, WriteGlobal):
        return f"{a.glob} = {a.expr}"
    return f"{a.target} = {a.glob}"


@dataclass(frozen=True)
class Node:
    id: int
    thread: str
    pos: Pos


@dataclass(frozen=True)
class Edge:
    src: int
    action: Action
    dst: int
    site: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.src} --{action_str(self.action)}--> {self.dst}"


@dataclass
class Cfg:
    program: Program
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    entry: int
    thread_entries: dict[str, int]
    mutexes: tuple[str, ...]
    out: dict[int, tuple[Edge, ...]] = field(init=False, repr=False)
    into: dict[int, tuple[Edge, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        out: dict[int, list[Edge]] = {n.id: [] for n in self.nodes}
        into: dict[int, list[Edge]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            out[e.src].append(e)
            into[e.dst].append(e)
        self.out = {k: tuple(v) for k, v in out.items()}
        self.into = {k: tuple(v) for k, v in into.items()}

    @property
    def globals(self) -> tuple[str, ...]:
        return self.program.globals

    @property
    def locals(self) -> tuple[str, ...]:
        return self.program.locals

    def node(self, nid: int) -> Node:
        return self.nodes[nid]

    def read_edges(self) -> list[Edge]:
        return [e for e in self.edges if isinstance(e.action, ReadGlobal)]

    def read_sites(self) -> list[str]:
        return [e.site for e in self.read_edges()]  # type: ignore[misc]

    def to_dot(self) -> str:
        lines = ["digraph cfg {", "  node [shape=circle];"]
        for t, entry in self.thread_entries.items():
            lines.append(f'  subgraph "cluster_{t}" {{ label="{t}";')
            for n in self.nodes:
                if n.thread == t:
                    shape = ' shape=doublecircle' if n.id == entry else ""
                    lines.append(f'    n{n.id} [label="{n.id}"{shape}];')
            lines.append("  }")
        for e in self.edges:
            label = action_str(e.action).replace('"', r"\"")
            lines.append(f'  n{e.src} -> n{e.dst} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self, program: Program):
        self.program = program
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []
        self.thread = ""

    def fresh(self, pos: Pos) -> int:
        n = Node(len(self.nodes), self.thread, pos)
        self.nodes.append(n)
        return n.id

    def emit(self, src: int, action: Action, dst: Optional[int], pos: Pos) -> int:
        if dst is None:
            dst = self.fresh(pos)
        self.edges.append(Edge(src, action, dst))
        return dst

    def seq(self, items: list, src: int, dst: Optional[int], pos: Pos) -> int:
        """Lower ``items`` from ``src``; the last item ends at ``dst`` if given.

        An item is either a statement or a ``(action, pos)`` pair.
        """
        if not items:
            # Only reachable for an empty thread body.
            assert dst is None
            return src
        cur = src
        for i, item in enumerate(items):
            target = dst if i == len(items) - 1 else None
            cur = self.stmt(item, cur, target)
        return cur

    def stmt(self, s, src: int, dst: Optional[int]) -> int:
        if isinstance(s, tuple):
            action, pos = s
            return self.emit(src, action, dst, pos)
        if isinstance(s, Assign):
            return self.emit(src, AssignLocal(s.target, s.expr), dst, s.pos)
        if isinstance(s, (Create, Lock, Unlock, WriteGlobal, ReadGlobal)):
            return self.emit(src, s, dst, s.pos)
        if isinstance(s, If):
            end = self.seq([(Guard(s.cond, True), s.pos), *s.then], src, dst, s.pos)
            self.seq([(Guard(s.cond, False), s.pos), *s.orelse], src, end, s.pos)
            return end
        assert isinstance(s, While)
        self.seq([(Guard(s.cond, True), s.pos), *s.body], src, src, s.pos)
        return self.emit(src, Guard(s.cond, False), dst, s.pos)

    def thread_body(self, body: tuple[Stmt, ...], entry: int, pos: Pos) -> None:
        items: list = list(body)
        if items and isinstance(items[0], While):
            # Keep the entry point free of incoming edges.
            items.insert(0, (Guard(Const(1), True), pos))
        self.seq(items, entry, None, pos)


def build_cfg(p: Program) -> Cfg:
    b = _Builder(p)
    entries: dict[str, int] = {}
    for t in p.threads:
        b.thread = t.name
        entries[t.name] = b.fresh(t.pos)
        b.thread_body(t.body, entries[t.name], t.pos)

    # Stable read-site identifiers: thread:stmt, with #n on repeats.
    seen: Counter[str] = Counter()
    edges = []
    for e in b.edges:
        if isinstance(e.action, ReadGlobal):
            base = f"{b.nodes[e.src].thread}:{e.action.target}={e.action.glob}"
            seen[base] += 1
            site = base if seen[base] == 1 else f"{base}#{seen[base]}"
            e = Edge(e.src, e.action, e.dst, site)
        edges.append(e)

    cfg = Cfg(p, tuple(b.nodes), tuple(edges), entries["main"], entries, p.mutexes)
    for name, entry in entries.items():
        if cfg.into[entry]:
            raise ValidationError(f"entry point of thread {name!r} is reachable by control flow")
    for n in cfg.nodes:
        if sum(isinstance(e.action, Create) for e in cfg.out[n.id]) > 1:
            raise ValidationError("more than one create edge leaves a program point", *n.pos)
    return cfg


def program_to_cfg(text: str, name: str = "<input>") -> Cfg:
    from .instrument import instrument_atomicity
    from .syntax import parse

    return build_cfg(instrument_atomicity(parse(text, name)))


__all__ = [
    "Action",
    "AssignLocal",
    "Cfg",
    "Edge",
    "Guard",
    "InputExpr",
    "Node",
    "action_str",
    "build_cfg",
    "program_to_cfg",
]
