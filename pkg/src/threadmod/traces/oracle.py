"""Concrete read tables and the soundness check against abstract ones."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..lang.cfg import Cfg
from ..lattice import Value, ValueD, value_key, value_str
from .enumerate import TraceBudgetExceeded, enumerate_global
from .semantics import TraceConfig
from .trace import LocalTrace


class InitializationError(ValueError):
    """A global can be read before any write to it."""


@dataclass
class ConcreteReadTable:
    values: dict[str, frozenset[Value]]
    witnesses: dict[tuple[str, Value], LocalTrace]
    blocked: frozenset[str]
    bound_reached: bool
    trace_count: int

    def to_json(self) -> dict:
        return {
            "sites": {s: [value_str(v) for v in sorted(vs, key=value_key)]
                      for s, vs in sorted(self.values.items())},
            "blocked": sorted(self.blocked),
            "bound_reached": self.bound_reached,
            "traces": self.trace_count,
        }


def concrete_read_table(cfg: Cfg, config: Optional[TraceConfig] = None,
                        strict: bool = False) -> ConcreteReadTable:
    """Values read at each site over all traces whose last step is that read.

    With ``strict``, a read that can happen before any write raises
    InitializationError; otherwise such schedules are simply dropped.
    """
    en = enumerate_global(cfg, config)
    if strict and en.blocked_reads:
        raise InitializationError(
            "global read before any possible initialization at " + ", ".join(sorted(en.blocked_reads))
        )
    values: dict[str, set] = {s: set() for s in cfg.read_sites()}
    witnesses: dict[tuple[str, Value], LocalTrace] = {}
    for t in sorted(en.traces, key=lambda t: (t.size(), str(t))):
        last = t.last
        if last is None or last.edge.site not in values:
            continue
        site = last.edge.site
        values[site].add(last.value)
        witnesses.setdefault((site, last.value), t)
    return ConcreteReadTable(
        {s: frozenset(v) for s, v in values.items()},
        witnesses,
        en.blocked_reads,
        en.truncated,
        len(en.traces),
    )


@dataclass(frozen=True)
class Counterexample:
    site: str
    value: Value
    abstract: Optional[ValueD]
    trace: LocalTrace

    def __str__(self) -> str:
        shown = "unreachable" if self.abstract is None else str(self.abstract)
        return f"{self.site}: concrete {value_str(self.value)} not in {shown} (trace {self.trace})"


def soundness_violations(concrete: ConcreteReadTable,
                         abstract: Mapping[str, Optional[ValueD]]) -> list[Counterexample]:
    out = []
    for site in sorted(concrete.values):
        a = abstract[site]
        for v in sorted(concrete.values[site], key=value_key):
            if a is None or v not in a:
                out.append(Counterexample(site, v, a, concrete.witnesses[(site, v)]))
    return out


@dataclass
class Verdict:
    status: str  # PASS, FAIL or INCONCLUSIVE
    failures: dict[str, list[Counterexample]] = field(default_factory=dict)
    bound_reached: bool = False
    reason: str = ""


def check_soundness(cfg: Cfg, tables: Mapping[str, Mapping[str, Optional[ValueD]]],
                    config: Optional[TraceConfig] = None) -> tuple[Verdict, Optional[ConcreteReadTable]]:
    try:
        concrete = concrete_read_table(cfg, config)
    except TraceBudgetExceeded as exc:
        return Verdict("INCONCLUSIVE", reason=str(exc)), None
    failures = {name: soundness_violations(concrete, t) for name, t in tables.items()}
    failures = {k: v for k, v in failures.items() if v}
    status = "FAIL" if failures else "PASS"
    return Verdict(status, failures, concrete.bound_reached), concrete
