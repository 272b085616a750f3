"""Lock-centered reading: lazy reads filtered by acquisition histories."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

from ..lattice import AC_EMPTY, AbstractEnv, FrozenMap, MinAntichain, ValueD, ac_of
from ..solver import SyncG
from .common import Analysis, StateBase


@dataclass(frozen=True)
class LockState(StateBase):
    V: FrozenMap
    L: FrozenMap
    sigma: AbstractEnv

    KINDS: ClassVar[dict[str, str]] = {"V": "must_map", "L": "ac_map", "sigma": "env"}


def lock_step(V: FrozenMap, L: FrozenMap, a: str, S: frozenset) -> tuple[FrozenMap, FrozenMap]:
    return V.set({a: frozenset()}), L.set({a: ac_of([S])})


def write_step(V: FrozenMap, g: str) -> FrozenMap:
    return FrozenMap({a: gs | {g} for a, gs in V.items()})


def lock_admits(V: FrozenMap, L: FrozenMap, g: str, a: str, S_pub: frozenset) -> bool:
    """Whether a value published at unlock(a) with background ``S_pub`` may be read."""
    if g in V[a]:
        return False
    return any(B.isdisjoint(S_pub) for B in L[a])


class LockCenteredAnalysis(Analysis):
    name = "lock"

    def empty_maps(self) -> tuple[FrozenMap, FrozenMap]:
        V = FrozenMap({a: frozenset() for a in self.mutexes})
        L = FrozenMap({a: AC_EMPTY for a in self.mutexes})
        return V, L

    def init_state(self) -> LockState:
        return LockState(*self.empty_maps(), self.initial_env())

    def fresh_structures(self, sigma):
        return LockState(*self.empty_maps(), sigma)

    def lock(self, st: LockState, a, S, view):
        V, L = lock_step(st.V, st.L, a, S)
        return {}, LockState(V, L, st.sigma)

    def unlock(self, st: LockState, a, S, view):
        rest = S - {a}
        return {SyncG(g, a, rest): st.sigma[g] for g in self.globals}, st

    def write(self, st: LockState, g, v, S, view):
        return {}, LockState(write_step(st.V, g), st.L, st.sigma.set({g: v}))

    def read_value(self, st: LockState, g, S, view) -> ValueD:
        vals = [st.sigma[g]]
        for x, v in view.family(("SyncG", g)):
            if lock_admits(st.V, st.L, g, x.a, x.S):
                vals.append(v)
        return self.join_values(vals)
