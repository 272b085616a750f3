"""Eager-reading analysis with weak interferences stored under the per-global mutex."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

from ..lang.syntax import mutex_for
from ..lattice import AbstractEnv, ValueD, vd_join
from ..solver import SyncG
from .common import Analysis, StateBase


@dataclass(frozen=True)
class MineState(StateBase):
    W: frozenset[str]
    sigma: AbstractEnv

    KINDS: ClassVar[dict[str, str]] = {"W": "may", "sigma": "env"}


class MineAnalysis(Analysis):
    name = "mine"

    def init_state(self) -> MineState:
        return MineState(frozenset(), self.initial_env())

    def fresh_structures(self, sigma):
        return MineState(frozenset(), sigma)

    def _interference(self, g: str, a: str, S: frozenset, view) -> ValueD:
        vals = [v for x, v in view.family(("SyncG", g)) if x.a == a and x.S.isdisjoint(S)]
        return self.join_values(vals)

    def lock(self, st: MineState, a, S, view):
        if a in self.global_of_mutex:
            return {}, st
        imported = {g: vd_join(st.sigma[g], self._interference(g, a, S, view), self.k)
                    for g in self.globals}
        return {}, MineState(st.W, st.sigma.set(imported))

    def unlock(self, st: MineState, a, S, view):
        if a in self.global_of_mutex:
            return {}, st
        rest = S - {a}
        return {SyncG(g, a, rest): st.sigma[g] for g in sorted(st.W)}, st

    def write(self, st: MineState, g, v, S, view):
        m = mutex_for(g)
        return {SyncG(g, m, S - {m}): v}, MineState(st.W | {g}, st.sigma.set({g: v}))

    def read_value(self, st: MineState, g, S, view) -> ValueD:
        return vd_join(st.sigma[g], self._interference(g, mutex_for(g), S, view), self.k)
