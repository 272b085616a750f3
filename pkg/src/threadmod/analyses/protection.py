"""Protection-based reading, with a pre-computed or on-the-fly protecting map."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar, Optional

from ..lang.locksets import LocksetMap
from ..lang.syntax import mutex_for
from ..lattice import K_DEFAULT, VALUE_LATTICE, AbstractEnv, LatticeKind, ValueD, superset_lattice, vd_join
from ..solver import MProt, ProtG, ProtGUnprot, View, solve_with_restarts
from .common import Analysis, StateBase


@dataclass(frozen=True)
class ProtState(StateBase):
    P: frozenset[str]
    sigma: AbstractEnv

    KINDS: ClassVar[dict[str, str]] = {"P": "must", "sigma": "env"}


class ProtectionAnalysis(Analysis):
    name = "protection"

    def __init__(self, cfg, locksets: Optional[LocksetMap] = None, k: int = K_DEFAULT,
                 on_the_fly: bool = False):
        self.on_the_fly = on_the_fly
        super().__init__(cfg, locksets, k)
        if on_the_fly:
            self.name = "protection-otf"
        self._mprot = superset_lattice(self.mutexes)

    def protecting(self, g: str, view: View) -> frozenset[str]:
        if self.on_the_fly:
            return view.get(MProt(g))
        return self.locksets.protecting[g]

    def global_lattice(self, x: Any) -> LatticeKind:
        if isinstance(x, MProt):
            return self._mprot
        return VALUE_LATTICE

    def init_state(self) -> ProtState:
        return ProtState(frozenset(), self.initial_env())

    def fresh_structures(self, sigma: AbstractEnv) -> ProtState:
        return ProtState(frozenset(), sigma)

    def lock(self, st, a, S, view):
        return {}, st

    def unlock(self, st: ProtState, a, S, view):
        rest = S - {a}
        P2 = frozenset(h for h in st.P if rest & self.protecting(h, view))
        eff: dict = {}
        g = self.global_of_mutex.get(a)
        if g is not None:
            eff[ProtGUnprot(g)] = st.sigma[g]
            if self.protecting(g, view) == {a}:
                eff[ProtG(g)] = st.sigma[g]
        else:
            for h in self.globals:
                if a in self.protecting(h, view):
                    eff[ProtG(h)] = st.sigma[h]
        return eff, ProtState(P2, st.sigma)

    def write(self, st: ProtState, g, v, S, view):
        eff = {MProt(g): S} if self.on_the_fly else {}
        return eff, ProtState(st.P | {g}, st.sigma.set({g: v}))

    def read_value(self, st: ProtState, g, S, view) -> ValueD:
        own = st.sigma[g]
        if g in st.P:
            assert not own.is_bot, f"{g} definitely written but has no local value"
            return own
        if S & self.protecting(g, view) == {self._mutex(g)}:
            return vd_join(own, view.get(ProtGUnprot(g)), self.k)
        return vd_join(own, view.get(ProtG(g)), self.k)

    def _mutex(self, g: str) -> str:
        return mutex_for(g)

    def solve(self, **kw):
        if not self.on_the_fly:
            return super().solve(**kw)
        watch = [MProt(g) for g in self.globals]
        limit = len(self.globals) * len(self.mutexes) + 1
        return solve_with_restarts(self.system(), self.roots(), watch, max_restarts=limit, **kw)
