"""Syntactic lockset reachability and the protecting-lockset pre-analysis."""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import Cfg, Edge
from .syntax import Create, Lock, Unlock, WriteGlobal

Lockset = frozenset[str]
EMPTY: Lockset = frozenset()


def lockset_str(s: Lockset) -> str:
    return "{" + ",".join(sorted(s)) + "}"


def lockset_transfer(action, s: Lockset) -> Lockset | None:
    """Successor lockset, or None for a dead transition."""
    if isinstance(action, Lock):
        return None if action.mutex in s else s | {action.mutex}
    if isinstance(action, Unlock):
        return s - {action.mutex} if action.mutex in s else None
    return s


@dataclass(frozen=True)
class LocksetMap:
    sets: dict[int, frozenset[Lockset]]
    protecting: dict[str, Lockset]
    dead: tuple[tuple[Edge, Lockset], ...]
    created: frozenset[str]

    def at(self, u: int) -> frozenset[Lockset]:
        return self.sets.get(u, frozenset())

    def pairs(self) -> list[tuple[int, Lockset]]:
        return sorted(
            ((u, s) for u, ss in self.sets.items() for s in ss),
            key=lambda p: (p[0], sorted(p[1])),
        )


def reachable_locksets(c: Cfg) -> LocksetMap:
    sets: dict[int, set[Lockset]] = {}
    dead: list[tuple[Edge, Lockset]] = []
    created: set[str] = set()
    work: list[tuple[int, Lockset]] = []

    def add(u: int, s: Lockset) -> None:
        bucket = sets.setdefault(u, set())
        if s not in bucket:
            bucket.add(s)
            work.append((u, s))

    add(c.entry, EMPTY)
    while work:
        u, s = work.pop()
        for e in c.out[u]:
            s2 = lockset_transfer(e.action, s)
            if s2 is None:
                dead.append((e, s))
                continue
            add(e.dst, s2)
            if isinstance(e.action, Create):
                created.add(e.action.thread)
                add(c.thread_entries[e.action.thread], EMPTY)

    full = frozenset(c.mutexes)
    prot: dict[str, Lockset] = {g: full for g in c.globals}
    for e in c.edges:
        if isinstance(e.action, WriteGlobal):
            for s in sets.get(e.src, ()):
                prot[e.action.glob] = prot[e.action.glob] & s
    dead.sort(key=lambda d: (d[0].src, d[0].dst, sorted(d[1])))
    return LocksetMap(
        {u: frozenset(v) for u, v in sets.items()}, prot, tuple(dead), frozenset(created)
    )
