"""The five thread-modular value analyses."""

from __future__ import annotations

from typing import Optional

from ..lang.cfg import Cfg
from ..lang.locksets import LocksetMap
from ..lattice import K_DEFAULT
from .combined import CombinedAnalysis, CombinedState
from .common import Analysis, ReadResult, eval_abstract, guard_passable
from .lock import LockCenteredAnalysis, LockState
from .mine import MineAnalysis, MineState
from .protection import ProtectionAnalysis, ProtState
from .readtable import Cmp, ReadTable, compare_precision, compare_values, table_leq
from .write import WriteCenteredAnalysis, WriteState

ANALYSES = ("protection", "protection-otf", "lock", "write", "combined", "mine")


def make_analysis(name: str, cfg: Cfg, locksets: Optional[LocksetMap] = None,
                  k: int = K_DEFAULT) -> Analysis:
    if name == "protection":
        return ProtectionAnalysis(cfg, locksets, k)
    if name == "protection-otf":
        return ProtectionAnalysis(cfg, locksets, k, on_the_fly=True)
    cls = {"lock": LockCenteredAnalysis, "write": WriteCenteredAnalysis,
           "combined": CombinedAnalysis, "mine": MineAnalysis}.get(name)
    if cls is None:
        raise ValueError(f"unknown analysis {name!r}; choose from {', '.join(ANALYSES)}")
    return cls(cfg, locksets, k)


def sys_protection(cfg: Cfg, mode: str = "pre-pass"):
    return make_analysis("protection-otf" if mode == "on-the-fly" else "protection", cfg).system()


def sys_lock_centered(cfg: Cfg):
    return LockCenteredAnalysis(cfg).system()


def sys_write_centered(cfg: Cfg):
    return WriteCenteredAnalysis(cfg).system()


def sys_combined(cfg: Cfg):
    return CombinedAnalysis(cfg).system()


def sys_mine(cfg: Cfg):
    return MineAnalysis(cfg).system()


def run_analysis(name: str, cfg: Cfg, **solve_kw):
    """Solve one analysis; returns ``(analysis, assignment, read_table)``."""
    an = make_analysis(name, cfg)
    a = an.solve(**solve_kw)
    return an, a, an.read_table(a)


__all__ = [
    "ANALYSES", "Analysis", "Cmp", "CombinedAnalysis", "CombinedState", "LockCenteredAnalysis",
    "LockState", "MineAnalysis", "MineState", "ProtState", "ProtectionAnalysis", "ReadResult",
    "ReadTable", "WriteCenteredAnalysis", "WriteState", "compare_precision", "compare_values",
    "eval_abstract", "guard_passable", "make_analysis", "run_analysis", "sys_combined",
    "sys_lock_centered", "sys_mine", "sys_protection", "sys_write_centered", "table_leq",
]
