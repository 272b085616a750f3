"""Graphviz rendering of local traces: one row per thread, ego on top."""

from __future__ import annotations

from ..lang.cfg import action_str
from ..lattice import value_str
from .trace import LocalTrace, NodeId


def _nid(n: NodeId) -> str:
    return f'"{n[0]}/{n[1]}"'


def _esc(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', r"\"")


def trace_to_dot(t: LocalTrace, name: str = "trace") -> str:
    lines = [f'digraph "{_esc(name)}" {{', "  rankdir=LR;", "  node [shape=circle fontsize=10];"]
    runs = sorted(t.runs, key=lambda r: (r.tid != t.ego, r.tid))
    for r in runs:
        lines.append(f'  subgraph "cluster_{r.tid}" {{ label="{r.tid}"; rank=same;')
        for j, u in enumerate(r.points):
            style = " style=bold" if (r.tid, j) == t.sink else ""
            lines.append(f'    {_nid((r.tid, j))} [label="{u}"{style}];')
        for j, s in enumerate(r.steps):
            label = action_str(s.edge.action)
            if s.value is not None:
                label += f" [{value_str(s.value)}]"
            lines.append(f'    {_nid((r.tid, j))} -> {_nid((r.tid, j + 1))} [label="{_esc(label)}"];')
        lines.append("  }")
    for a, b in sorted(t.creates):
        lines.append(f'  {_nid(a)} -> {_nid(b)} [label="c" style=dashed color=blue constraint=false];')
    for m, a, b in sorted(t.chains):
        lines.append(f'  {_nid(a)} -> {_nid(b)} [label="{_esc(m)}" style=dashed color=red constraint=false];')
    lines.append("}")
    return "\n".join(lines) + "\n"
