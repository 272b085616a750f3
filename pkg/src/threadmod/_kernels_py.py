"""Pure-Python DAG kernels (reference implementation)."""

from __future__ import annotations

from typing import Optional, Sequence


def topo_order(n: int, src: Sequence[int], dst: Sequence[int]) -> Optional[list[int]]:
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for a, b in zip(src, dst):
        succ[a].append(b)
        indeg[b] += 1
    stack = [i for i in range(n) if indeg[i] == 0]
    order: list[int] = []
    while stack:
        i = stack.pop()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                stack.append(j)
    return order if len(order) == n else None


def ancestors(n: int, src: Sequence[int], dst: Sequence[int]) -> Optional[list[int]]:
    """Strict-ancestor bitmasks, or None when the graph has a cycle."""
    order = topo_order(n, src, dst)
    if order is None:
        return None
    preds: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(src, dst):
        preds[b].append(a)
    anc = [0] * n
    for i in order:
        m = 0
        for p in preds[i]:
            m |= anc[p] | (1 << p)
        anc[i] = m
    return anc


def maximal_predecessors(
    n: int,
    src: Sequence[int],
    dst: Sequence[int],
    queries: Sequence[tuple[int, Sequence[int]]],
) -> Optional[list[list[int]]]:
    """For each ``(target, candidates)``, the maximal candidates strictly below
    ``target``; None when the graph has a cycle."""
    anc = ancestors(n, src, dst)
    if anc is None:
        return None
    out: list[list[int]] = []
    for target, cands in queries:
        below = [c for c in cands if anc[target] >> c & 1]
        out.append(sorted(c for c in below if not any(anc[d] >> c & 1 for d in below)))
    return out


def below_mask(n: int, src: Sequence[int], dst: Sequence[int], target: int) -> Optional[int]:
    anc = ancestors(n, src, dst)
    return None if anc is None else anc[target]
