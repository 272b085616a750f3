"""Shared machinery for building per-analysis constraint systems."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, ClassVar, Iterable, Mapping, Optional

from ..lang.cfg import AssignLocal, Cfg, Edge, Guard
from ..lang.locksets import EMPTY, LocksetMap, lockset_str, lockset_transfer, reachable_locksets
from ..lang.syntax import (
    BinOp,
    Const,
    Create,
    Expr,
    InputExpr,
    Lock,
    ReadGlobal,
    Unlock,
    Var,
    WriteGlobal,
    mutex_for,
)
from ..lattice import (
    BOT,
    K_DEFAULT,
    TOP,
    VALUE_LATTICE,
    AbstractEnv,
    FrozenMap,
    LatticeKind,
    ValueD,
    ac_join,
    ac_leq,
    env_join,
    env_leq,
    lift_optional,
    vd_join,
)
from ..solver import PP, Assignment, ConstraintSystem, Rhs, View, solve

Effects = dict

# ---------------------------------------------------------------------------
# Abstract expression evaluation

_ARITH: dict[str, Callable[[int, int], int]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b),
    "<=": lambda a, b: int(a <= b),
}


def eval_abstract(e: Expr, sigma: Mapping[str, ValueD], k: int = K_DEFAULT) -> ValueD:
    if isinstance(e, Const):
        return ValueD(frozenset({e.value}))
    if isinstance(e, Var):
        return sigma[e.name]
    if isinstance(e, InputExpr):
        return TOP
    assert isinstance(e, BinOp)
    left = eval_abstract(e.left, sigma, k)
    right = eval_abstract(e.right, sigma, k)
    if left.is_bot or right.is_bot:
        return BOT
    if left.is_top or right.is_top:
        return TOP
    if any(not isinstance(v, int) for v in itertools.chain(left.elems, right.elems)):  # type: ignore[arg-type]
        return TOP
    op = _ARITH[e.op]
    out: set = set()
    for a in left.elems:  # type: ignore[union-attr]
        for b in right.elems:  # type: ignore[union-attr]
            out.add(op(a, b))
            if len(out) > k:
                return TOP
    return ValueD(frozenset(out))


def guard_passable(g: Guard, sigma: Mapping[str, ValueD], k: int = K_DEFAULT) -> bool:
    """False only when no abstract value satisfies the guard."""
    v = eval_abstract(g.expr, sigma, k)
    if v.is_top:
        return True
    if g.positive:
        return any(x != 0 for x in v.elems)  # type: ignore[union-attr]
    return 0 in v.elems  # type: ignore[operator]


# ---------------------------------------------------------------------------
# Component-wise state lattices

_JOIN: dict[str, Callable[[Any, Any], Any]] = {
    "must": lambda a, b: a & b,
    "may": lambda a, b: a | b,
    "must_map": lambda a, b: FrozenMap({k: v & b[k] for k, v in a.items()}),
    "ac_map": lambda a, b: FrozenMap({k: ac_join(v, b[k]) for k, v in a.items()}),
    "env": env_join,
}
_LEQ: dict[str, Callable[[Any, Any], bool]] = {
    "must": lambda a, b: a >= b,
    "may": lambda a, b: a <= b,
    "must_map": lambda a, b: all(v >= b[k] for k, v in a.items()),
    "ac_map": lambda a, b: all(ac_leq(v, b[k]) for k, v in a.items()),
    "env": env_leq,
}


class StateBase:
    """Mixin for frozen dataclass states; component kinds live in field metadata."""

    KINDS: ClassVar[dict[str, str]] = {}

    def join(self, other: "StateBase") -> "StateBase":
        if self == other:
            return self
        return replace(
            self,  # type: ignore[type-var]
            **{f.name: _JOIN[self.KINDS[f.name]](getattr(self, f.name), getattr(other, f.name))
               for f in fields(self)},  # type: ignore[arg-type]
        )

    def leq(self, other: "StateBase") -> bool:
        return all(
            _LEQ[self.KINDS[f.name]](getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)  # type: ignore[arg-type]
        )

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):  # type: ignore[arg-type]
            v = getattr(self, f.name)
            out[f.name] = sorted(v) if isinstance(v, frozenset) else v.to_json()
        return out


def state_lattice(name: str) -> LatticeKind:
    return lift_optional(name, lambda a, b: a.join(b), lambda a, b: a.leq(b))


# ---------------------------------------------------------------------------
# Analysis base


@dataclass
class ReadResult:
    site: str
    edge: Edge
    value: Optional[ValueD]  # None: unreachable

    @property
    def reachable(self) -> bool:
        return self.value is not None


class Analysis:
    """Common constraint-system construction.

    Subclasses provide the initial state, the state reset at thread creation,
    and the transfer for lock, unlock, global writes and global reads.
    Transfers return ``(side_effects, new_state)``.
    """

    name: ClassVar[str] = ""

    def __init__(self, cfg: Cfg, locksets: Optional[LocksetMap] = None, k: int = K_DEFAULT):
        self.cfg = cfg
        self.locksets = locksets or reachable_locksets(cfg)
        self.k = k
        self.globals = cfg.globals
        self.locals = cfg.locals
        self.mutexes = cfg.mutexes
        self.global_of_mutex = {mutex_for(g): g for g in self.globals}
        self._state_lattice = state_lattice(self.name)
        self._rhs_index = self._index_rhs()

    # -- hooks --------------------------------------------------------------

    def init_state(self) -> Any:
        raise NotImplementedError

    def fresh_structures(self, sigma: AbstractEnv) -> Any:
        """State for a newly created thread with the given environment."""
        raise NotImplementedError

    def lock(self, st: Any, a: str, S: frozenset, view: View) -> tuple[Effects, Any]:
        raise NotImplementedError

    def unlock(self, st: Any, a: str, S: frozenset, view: View) -> tuple[Effects, Any]:
        raise NotImplementedError

    def write(self, st: Any, g: str, v: ValueD, S: frozenset, view: View) -> tuple[Effects, Any]:
        raise NotImplementedError

    def read_value(self, st: Any, g: str, S: frozenset, view: View) -> ValueD:
        raise NotImplementedError

    def global_lattice(self, x: Any) -> LatticeKind:
        return VALUE_LATTICE

    # -- helpers ------------------------------------------------------------

    def initial_env(self) -> AbstractEnv:
        return AbstractEnv.initial(self.locals, self.globals)

    def join_values(self, vals: Iterable[ValueD]) -> ValueD:
        out = BOT
        for v in vals:
            out = vd_join(out, v, self.k)
        return out

    def with_sigma(self, st: Any, sigma: AbstractEnv) -> Any:
        return replace(st, sigma=sigma)

    # -- rhs ----------------------------------------------------------------

    def transfer(self, e: Edge, S: frozenset, st: Any, view: View) -> tuple[Effects, Any]:
        a = e.action
        sigma: AbstractEnv = st.sigma
        if isinstance(a, Guard):
            return {}, (st if guard_passable(a, sigma, self.k) else None)
        if isinstance(a, AssignLocal):
            v = eval_abstract(a.expr, sigma, self.k)
            return {}, self.with_sigma(st, sigma.set({a.target: v}))
        if isinstance(a, Create):
            child_env = sigma.set({"self": TOP, **{g: BOT for g in self.globals}})
            entry = self.cfg.thread_entries[a.thread]
            eff = {PP(entry, EMPTY): self.fresh_structures(child_env)}  # type: ignore[arg-type]
            return eff, self.with_sigma(st, sigma.set({a.target: TOP}))
        if isinstance(a, Lock):
            return self.lock(st, a.mutex, S, view)
        if isinstance(a, Unlock):
            return self.unlock(st, a.mutex, S, view)
        if isinstance(a, WriteGlobal):
            return self.write(st, a.glob, eval_abstract(a.expr, sigma, self.k), S, view)
        assert isinstance(a, ReadGlobal)
        v = self.read_value(st, a.glob, S, view)
        return {}, self.with_sigma(st, sigma.set({a.target: v}))

    def _index_rhs(self) -> dict[PP, list[Rhs]]:
        index: dict[PP, list[Rhs]] = {}
        for e in self.cfg.edges:
            for S in sorted(self.locksets.at(e.src), key=sorted):
                S2 = lockset_transfer(e.action, S)
                if S2 is None:
                    continue
                label = f"{e} @ {lockset_str(S)}"
                index.setdefault(PP(e.dst, S2), []).append(Rhs(label, self._make_rhs(e, S)))
        return index

    def _make_rhs(self, e: Edge, S: frozenset):
        src = PP(e.src, S)

        def fn(view: View):
            st = view.get(src)
            if st is None:
                return {}, None
            return self.transfer(e, S, st, view)

        return fn

    def rhs_of(self, x: Any) -> list[Rhs]:
        return self._rhs_index.get(x, []) if isinstance(x, PP) else []

    def lattice_of(self, x: Any) -> LatticeKind:
        if isinstance(x, PP):
            return self._state_lattice
        return self.global_lattice(x)

    def seeds(self) -> dict:
        return {PP(self.cfg.entry, EMPTY): self.init_state()}

    def system(self) -> ConstraintSystem:
        return ConstraintSystem(self.lattice_of, self.rhs_of, self.seeds())

    def roots(self) -> list[PP]:
        return [PP(u, S) for u, S in self.locksets.pairs()]

    def solve(self, **kw) -> Assignment:
        return solve(self.system(), self.roots(), **kw)

    # -- read table ---------------------------------------------------------

    def read_table(self, a: Assignment) -> dict[str, Optional[ValueD]]:
        return {r.site: r.value for r in self.read_results(a)}

    def read_results(self, a: Assignment) -> list[ReadResult]:
        from ..solver import _FixedView

        view = _FixedView(a)
        out = []
        for e in self.cfg.read_edges():
            val: Optional[ValueD] = None
            for S in sorted(self.locksets.at(e.src), key=sorted):
                st = a[PP(e.src, S)]
                if st is None:
                    continue
                v = self.read_value(st, e.action.glob, S, view)  # type: ignore[union-attr]
                val = v if val is None else vd_join(val, v, self.k)
            out.append(ReadResult(e.site, e, val))  # type: ignore[arg-type]
        return out


def disjoint(a: frozenset, b: frozenset) -> bool:
    return a.isdisjoint(b)
