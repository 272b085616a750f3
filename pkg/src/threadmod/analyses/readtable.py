"""Read tables and their pointwise precision comparison."""

from __future__ import annotations

from enum import Enum
from typing import Mapping, Optional

from ..lattice import ValueD, vd_leq

ReadTable = Mapping[str, Optional[ValueD]]


class Cmp(str, Enum):
    LESS = "<"
    EQUAL = "="
    GREATER = ">"
    INCOMPARABLE = "<>"

    def flip(self) -> "Cmp":
        return {Cmp.LESS: Cmp.GREATER, Cmp.GREATER: Cmp.LESS}.get(self, self)


def _leq(a: Optional[ValueD], b: Optional[ValueD]) -> bool:
    # Unreachable is the least element.
    if a is None:
        return True
    if b is None:
        return False
    return vd_leq(a, b)


def compare_values(a: Optional[ValueD], b: Optional[ValueD]) -> Cmp:
    le, ge = _leq(a, b), _leq(b, a)
    if le and ge:
        return Cmp.EQUAL
    if le:
        return Cmp.LESS
    if ge:
        return Cmp.GREATER
    return Cmp.INCOMPARABLE


def compare_precision(t1: ReadTable, t2: ReadTable) -> dict[str, Cmp]:
    if set(t1) != set(t2):
        raise ValueError("read tables cover different sites")
    return {site: compare_values(t1[site], t2[site]) for site in t1}


def table_leq(t1: ReadTable, t2: ReadTable) -> list[str]:
    """Sites where ``t1`` is not below ``t2``."""
    return [s for s, c in compare_precision(t1, t2).items() if c not in (Cmp.LESS, Cmp.EQUAL)]
