"""Write-centered reading: values keyed by the lockset of the producing write."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

from ..lattice import AC_EMPTY, AC_FULL, AbstractEnv, FrozenMap, ValueD, ac_insert, ac_of
from ..solver import WriteG
from .common import Analysis, StateBase


@dataclass(frozen=True)
class WriteState(StateBase):
    W: FrozenMap
    P: FrozenMap
    sigma: AbstractEnv

    KINDS: ClassVar[dict[str, str]] = {"W": "ac_map", "P": "ac_map", "sigma": "env"}


def unlock_publish(globals_, W: FrozenMap, P: FrozenMap, sigma, a: str, S: frozenset):
    rest = S - {a}
    P2 = FrozenMap({g: ac_insert(P[g], rest) for g in globals_})
    eff = {WriteG(g, a, rest, w): sigma[g] for g in globals_ for w in W[g]}
    return eff, P2


def write_admits(P: FrozenMap, g: str, w: frozenset) -> bool:
    return any(s.isdisjoint(w) for s in P[g])


def write_centered_admits(P: FrozenMap, g: str, S: frozenset, x: WriteG) -> bool:
    return (
        x.a in S
        and S.isdisjoint(x.S)
        and write_admits(P, g, x.w)
        and any(x.a not in s for s in P[g])
    )


class WriteCenteredAnalysis(Analysis):
    name = "write"

    def empty_maps(self) -> tuple[FrozenMap, FrozenMap]:
        return (
            FrozenMap({g: AC_EMPTY for g in self.globals}),
            FrozenMap({g: AC_FULL for g in self.globals}),
        )

    def init_state(self) -> WriteState:
        return WriteState(*self.empty_maps(), self.initial_env())

    def fresh_structures(self, sigma):
        return WriteState(*self.empty_maps(), sigma)

    def lock(self, st, a, S, view):
        return {}, st

    def unlock(self, st: WriteState, a, S, view):
        eff, P2 = unlock_publish(self.globals, st.W, st.P, st.sigma, a, S)
        return eff, WriteState(st.W, P2, st.sigma)

    def write(self, st: WriteState, g, v, S, view):
        single = ac_of([S])
        return {}, WriteState(st.W.set({g: single}), st.P.set({g: single}), st.sigma.set({g: v}))

    def read_value(self, st: WriteState, g, S, view) -> ValueD:
        vals = [st.sigma[g]]
        for x, v in view.family(("WriteG", g)):
            if write_centered_admits(st.P, g, S, x):
                vals.append(v)
        return self.join_values(vals)
