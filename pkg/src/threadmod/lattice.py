"""Lattices shared by the analyses.

* :class:`ValueD` - finite sets of values bounded by ``K`` elements, or Top.
* :class:`MinAntichain` - upward-closed families of locksets, kept as their
  minimal elements.
* :class:`AbstractEnv` - total, immutable maps from variables to ``ValueD``.
* :class:`LatticeKind` - bottom/join/leq bundle used by the solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, Union

K_DEFAULT = 64


@dataclass(frozen=True, order=True)
class Tid:
    """Concrete thread id: the creation path from the initial thread."""

    path: tuple[int, ...] = ()

    def child(self, index: int) -> "Tid":
        return Tid(self.path + (index,))

    def __str__(self) -> str:
        return ".".join(["0", *map(str, self.path)])

    def __repr__(self) -> str:
        return f"Tid({self})"


Value = Union[int, Tid]


def value_key(v: Value) -> tuple:
    return (0, v, ()) if isinstance(v, int) else (1, 0, v.path)


def value_str(v: Value) -> str:
    return str(v) if isinstance(v, int) else f"tid:{v}"


# ---------------------------------------------------------------------------
# ValueD


@dataclass(frozen=True)
class ValueD:
    elems: Optional[frozenset] = frozenset()

    @property
    def is_top(self) -> bool:
        return self.elems is None

    @property
    def is_bot(self) -> bool:
        return self.elems is not None and not self.elems

    def sorted(self) -> list[Value]:
        assert self.elems is not None
        return sorted(self.elems, key=value_key)

    def __contains__(self, v: Value) -> bool:
        return self.elems is None or v in self.elems

    def __str__(self) -> str:
        if self.elems is None:
            return "T"
        return "{" + ",".join(value_str(v) for v in self.sorted()) + "}"

    def __repr__(self) -> str:
        return f"ValueD({self})"

    def to_json(self) -> dict:
        if self.elems is None:
            return {"top": True}
        return {"set": [v if isinstance(v, int) else {"tid": str(v)} for v in self.sorted()]}

    @staticmethod
    def from_json(obj: Mapping) -> "ValueD":
        if obj.get("top"):
            return TOP
        out = []
        for v in obj["set"]:
            if isinstance(v, dict):
                parts = [int(p) for p in str(v["tid"]).split(".")]
                out.append(Tid(tuple(parts[1:])))
            else:
                out.append(int(v))
        return ValueD(frozenset(out))


BOT = ValueD(frozenset())
TOP = ValueD(None)


def vd(*vals: Value, k: int = K_DEFAULT) -> ValueD:
    return vd_of(vals, k)


def vd_of(vals: Iterable[Value], k: int = K_DEFAULT) -> ValueD:
    s = frozenset(vals)
    return TOP if len(s) > k else ValueD(s)


def vd_join(a: ValueD, b: ValueD, k: int = K_DEFAULT) -> ValueD:
    if a.elems is None or b.elems is None:
        return TOP
    if a.elems <= b.elems:
        return b
    if b.elems <= a.elems:
        return a
    u = a.elems | b.elems
    return TOP if len(u) > k else ValueD(u)


def vd_meet(a: ValueD, b: ValueD) -> ValueD:
    if a.elems is None:
        return b
    if b.elems is None:
        return a
    return ValueD(a.elems & b.elems)


def vd_leq(a: ValueD, b: ValueD) -> bool:
    if b.elems is None:
        return True
    if a.elems is None:
        return False
    return a.elems <= b.elems


def vd_join_all(vals: Iterable[ValueD], k: int = K_DEFAULT) -> ValueD:
    out = BOT
    for v in vals:
        out = vd_join(out, v, k)
        if out.elems is None:
            break
    return out


def gamma_contains(a: ValueD, v: Value) -> bool:
    """Membership in the concretization of ``a``."""
    return v in a


# ---------------------------------------------------------------------------
# MinAntichain

Lockset = frozenset


@dataclass(frozen=True)
class MinAntichain:
    elems: frozenset[frozenset[str]] = frozenset()

    def __iter__(self) -> Iterator[frozenset[str]]:
        return iter(self.elems)

    def __len__(self) -> int:
        return len(self.elems)

    def __bool__(self) -> bool:
        return bool(self.elems)

    def sorted(self) -> list[list[str]]:
        return sorted(sorted(s) for s in self.elems)

    def __str__(self) -> str:
        return "{" + ",".join("{" + ",".join(s) + "}" for s in self.sorted()) + "}"

    def __repr__(self) -> str:
        return f"MinAntichain({self})"

    def to_json(self) -> list[list[str]]:
        return self.sorted()

    def contains_upward(self, s: frozenset[str]) -> bool:
        """Whether ``s`` lies in the upward closure."""
        return any(m <= s for m in self.elems)


AC_EMPTY = MinAntichain()
AC_FULL = MinAntichain(frozenset({frozenset()}))


def ac_insert(f: MinAntichain, s: Iterable[str]) -> MinAntichain:
    s = frozenset(s)
    if f.contains_upward(s):
        return f
    return MinAntichain(frozenset(m for m in f.elems if not s <= m) | {s})


def ac_of(sets: Iterable[Iterable[str]]) -> MinAntichain:
    out = AC_EMPTY
    for s in sets:
        out = ac_insert(out, s)
    return out


def ac_join(f: MinAntichain, g: MinAntichain) -> MinAntichain:
    if len(f) < len(g):
        f, g = g, f
    for s in g.elems:
        f = ac_insert(f, s)
    return f


def ac_leq(f: MinAntichain, g: MinAntichain) -> bool:
    return all(g.contains_upward(s) for s in f.elems)


def ac_expand(f: MinAntichain, universe: Iterable[str]) -> frozenset[frozenset[str]]:
    """Explicit upward closure within ``universe`` (for testing)."""
    u = sorted(universe)
    subsets = (
        frozenset(c) for r in range(len(u) + 1) for c in itertools.combinations(u, r)
    )
    return frozenset(s for s in subsets if f.contains_upward(s))


# ---------------------------------------------------------------------------
# AbstractEnv


class FrozenMap(Mapping[str, Any]):
    """Immutable, hashable mapping."""

    __slots__ = ("_d", "_hash")

    def __init__(self, d: Mapping[str, Any] = ()):  # type: ignore[assignment]
        self._d = dict(d)
        self._hash: Optional[int] = None

    def __getitem__(self, key: str) -> Any:
        return self._d[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._d.items()))
        return self._hash

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, FrozenMap):
            return self._d == other._d
        return NotImplemented

    def __repr__(self) -> str:
        return "{" + ", ".join(f"{k}: {_show(v)}" for k, v in sorted(self._d.items())) + "}"

    def set(self, updates: Mapping[str, Any]) -> "FrozenMap":
        d = dict(self._d)
        d.update(updates)
        return type(self)(d)

    def to_json(self) -> dict:
        return {k: _json(v) for k, v in sorted(self._d.items())}


def _show(v: Any) -> str:
    if isinstance(v, frozenset):
        return "{" + ",".join(sorted(v)) + "}"
    return str(v)


def _json(v: Any) -> Any:
    if isinstance(v, frozenset):
        return sorted(v)
    return v.to_json()


class AbstractEnv(FrozenMap):
    """Total immutable map from variables to abstract values."""

    __slots__ = ()

    @classmethod
    def initial(cls, locals_: Iterable[str], globals_: Iterable[str]) -> "AbstractEnv":
        d = {x: TOP for x in locals_}
        d.update({g: BOT for g in globals_})
        return cls(d)


def env_update(e: AbstractEnv, updates: Mapping[str, ValueD]) -> AbstractEnv:
    """Override (not join) the given keys."""
    for k in updates:
        if k not in e._d:
            raise KeyError(f"unknown variable {k!r}")
    return e.set(updates)  # type: ignore[return-value]


def _same_keys(a: AbstractEnv, b: AbstractEnv) -> None:
    if a._d.keys() != b._d.keys():
        raise KeyError("environments over different variables")


def env_join(a: AbstractEnv, b: AbstractEnv, k: int = K_DEFAULT) -> AbstractEnv:
    if a is b:
        return a
    _same_keys(a, b)
    return AbstractEnv({x: vd_join(v, b._d[x], k) for x, v in a._d.items()})


def env_leq(a: AbstractEnv, b: AbstractEnv) -> bool:
    _same_keys(a, b)
    return all(vd_leq(v, b._d[x]) for x, v in a._d.items())


# ---------------------------------------------------------------------------
# Map helpers for total maps into antichains / sets


def map_join(a: Mapping, b: Mapping, join: Callable) -> dict:
    return {k: join(v, b[k]) for k, v in a.items()}


def map_leq(a: Mapping, b: Mapping, leq: Callable) -> bool:
    return all(leq(v, b[k]) for k, v in a.items())


# ---------------------------------------------------------------------------
# Lattice descriptors


@dataclass(frozen=True)
class LatticeKind:
    name: str
    bottom: Any
    join: Callable[[Any, Any], Any]
    leq: Callable[[Any, Any], bool]

    def show(self, v: Any) -> str:
        if isinstance(v, frozenset):
            return "{" + ",".join(sorted(v)) + "}"
        return str(v)


VALUE_LATTICE = LatticeKind("value", BOT, vd_join, vd_leq)


def superset_lattice(universe: Iterable[str]) -> LatticeKind:
    """Locksets ordered by reverse inclusion: bottom is the full set."""
    return LatticeKind(
        "lockset-sup",
        frozenset(universe),
        lambda a, b: a & b,
        lambda a, b: a >= b,
    )


def lift_optional(name: str, join: Callable, leq: Callable) -> LatticeKind:
    """Adds a bottom element ``None`` to a join semilattice."""

    def j(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return join(a, b)

    def le(a, b):
        if a is None:
            return True
        if b is None:
            return False
        return leq(a, b)

    return LatticeKind(name, None, j, le)
