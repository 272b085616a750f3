"""Combination of lock-centered and write-centered reading."""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

from ..lattice import AbstractEnv, FrozenMap, ValueD, ac_of, vd_join, vd_meet
from .common import Analysis, StateBase
from .lock import LockCenteredAnalysis, lock_admits, lock_step, write_step
from .write import WriteCenteredAnalysis, unlock_publish, write_admits, write_centered_admits


@dataclass(frozen=True)
class CombinedState(StateBase):
    W: FrozenMap
    P: FrozenMap
    V: FrozenMap
    L: FrozenMap
    sigma: AbstractEnv

    KINDS: ClassVar[dict[str, str]] = {
        "W": "ac_map", "P": "ac_map", "V": "must_map", "L": "ac_map", "sigma": "env",
    }


class CombinedAnalysis(Analysis):
    name = "combined"

    def _maps(self):
        W, P = WriteCenteredAnalysis.empty_maps(self)  # type: ignore[arg-type]
        V, L = LockCenteredAnalysis.empty_maps(self)  # type: ignore[arg-type]
        return W, P, V, L

    def init_state(self) -> CombinedState:
        return CombinedState(*self._maps(), self.initial_env())

    def fresh_structures(self, sigma):
        return CombinedState(*self._maps(), sigma)

    def lock(self, st: CombinedState, a, S, view):
        V, L = lock_step(st.V, st.L, a, S)
        return {}, CombinedState(st.W, st.P, V, L, st.sigma)

    def unlock(self, st: CombinedState, a, S, view):
        eff, P2 = unlock_publish(self.globals, st.W, st.P, st.sigma, a, S)
        return eff, CombinedState(st.W, P2, st.V, st.L, st.sigma)

    def write(self, st: CombinedState, g, v, S, view):
        single = ac_of([S])
        return {}, CombinedState(
            st.W.set({g: single}), st.P.set({g: single}), write_step(st.V, g), st.L,
            st.sigma.set({g: v}),
        )

    def read_value(self, st: CombinedState, g, S, view) -> ValueD:
        d_m: list[ValueD] = []
        d_g: list[ValueD] = []
        for x, v in view.family(("WriteG", g)):
            if lock_admits(st.V, st.L, g, x.a, x.S) and write_admits(st.P, g, x.w):
                d_m.append(v)
            if write_centered_admits(st.P, g, S, x):
                d_g.append(v)
        both = vd_meet(self.join_values(d_m), self.join_values(d_g))
        return vd_join(st.sigma[g], both, self.k)
