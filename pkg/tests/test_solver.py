from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threadmod.analyses import ANALYSES, make_analysis
from threadmod.lattice import VALUE_LATTICE, LatticeKind, vd, vd_join
from threadmod.solver import (
    PP,
    ConstraintSystem,
    MProt,
    RestartBudgetExceeded,
    Rhs,
    SolverBudgetExceeded,
    SyncG,
    solve,
    solve_with_restarts,
    verify_post_solution,
)

from conftest import CORPUS, corpus_cfg, solved

SETS = LatticeKind("sets", frozenset(), lambda a, b: a | b, lambda a, b: a <= b)


def system(rhs: dict, seeds=None, lattice=SETS):
    return ConstraintSystem(lambda x: lattice, lambda x: rhs.get(x, []), seeds or {})


def test_chain_with_side_effect():
    rhs = {
        "a": [Rhs("a", lambda v: ({"g": frozenset({1})}, frozenset({0})))],
        "b": [Rhs("b", lambda v: ({}, v.get("a") | v.get("g")))],
    }
    a = solve(system(rhs), ["b"])
    assert a["b"] == {0, 1}
    assert a["g"] == {1}
    assert verify_post_solution(a.cs, a) == []


def test_demand_driven_materializes_dependencies_only():
    rhs = {
        "x": [Rhs("x", lambda v: ({}, v.get("y")))],
        "y": [Rhs("y", lambda v: ({}, frozenset({7})))],
        "z": [Rhs("z", lambda v: ({}, frozenset({9})))],
    }
    a = solve(system(rhs), ["x"])
    assert a["x"] == {7}
    assert "z" not in a


def test_cycle_reaches_least_fixpoint():
    # x = {0} ∪ {n+1 | n ∈ x, n < 5}
    rhs = {"x": [Rhs("x", lambda v: ({}, frozenset({0}) | {n + 1 for n in v.get("x") if n < 5}))]}
    a = solve(system(rhs), ["x"])
    assert a["x"] == set(range(6))


def test_family_reads_see_late_members():
    def reader(v):
        return {}, frozenset().union(*[val for _, val in v.family(("SyncG", "g"))])

    def writer(v):
        return {SyncG("g", "a", frozenset()): frozenset({3})}, frozenset()

    rhs = {"r": [Rhs("r", reader)], "w": [Rhs("w", writer)]}
    a = solve(system(rhs), ["r", "w"])
    assert a["r"] == {3}
    assert verify_post_solution(a.cs, a) == []


def test_budget_exceeded():
    rhs = {"x": [Rhs("x", lambda v: ({}, frozenset({len(v.get("x"))})))]}
    with pytest.raises(SolverBudgetExceeded) as exc:
        solve(system(rhs), ["x"], budget=20)
    assert "x" in str(exc.value)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("CONC_AI_BUDGET", "3")
    with pytest.raises(SolverBudgetExceeded):
        make_analysis("protection", corpus_cfg("ex1")).solve()


def test_restarts_when_watched_value_grows_after_read():
    shrink = LatticeKind("sup", frozenset("ab"), lambda a, b: a & b, lambda a, b: a >= b)
    rhs = {
        "r": [Rhs("r", lambda v: ({}, frozenset({len(v.get("m"))})))],
        "w": [Rhs("w", lambda v: ({"m": frozenset("a")}, frozenset()))],
    }
    cs = ConstraintSystem(lambda x: shrink if x == "m" else SETS, lambda x: rhs.get(x, []), {})
    a = solve_with_restarts(cs, ["r", "w"], ["m"])
    assert a.stats.restarts == 1
    assert a["r"] == {1}
    assert verify_post_solution(a.cs, a) == []
    with pytest.raises(RestartBudgetExceeded):
        solve_with_restarts(cs, ["r", "w"], ["m"], max_restarts=0)


def test_verify_detects_mutations():
    an, a, _ = solved("ex43", "write")
    assert verify_post_solution(a.cs, a) == []
    for x in sorted(a, key=str)[:40]:
        mutated = dict(a._values)
        mutated[x] = a.cs.bottom(x)
        if mutated[x] == a[x]:
            continue
        broken = type(a)(a.cs, mutated, a.domain, a.stats)
        assert verify_post_solution(a.cs, broken), f"dropping {x} went unnoticed"


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("analysis", ANALYSES)
def test_fifo_and_lifo_agree(name, analysis):
    an = make_analysis(analysis, corpus_cfg(name))
    lifo = an.solve(order="lifo")
    fifo = an.solve(order="fifo")
    assert an.read_table(lifo) == an.read_table(fifo)
    assert {x: lifo[x] for x in lifo if isinstance(x, PP)} == {x: fifo[x] for x in fifo if isinstance(x, PP)}
    assert verify_post_solution(fifo.cs, fifo) == []


@pytest.mark.parametrize("name", CORPUS)
def test_solve_is_deterministic(name):
    an = make_analysis("combined", corpus_cfg(name))
    assert an.solve().dump() == an.solve().dump()


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 9)), max_size=15))
def test_random_systems_yield_post_solutions(edges):
    # x_i ⊇ x_j ∪ {c}, plus a side effect of c to x_(i+1)%6
    rhs: dict = {}
    for i, jdx, c in edges:
        def fn(v, jdx=jdx, c=c, i=i):
            return {(i + 1) % 6: frozenset({c})}, v.get(jdx) | {c}
        rhs.setdefault(i, []).append(Rhs(f"{i}<-{jdx}", fn))
    cs = system(rhs)
    a = solve(cs, list(range(6)))
    b = solve(cs, list(range(6)), order="fifo")
    assert verify_post_solution(cs, a) == [] and verify_post_solution(cs, b) == []
    assert all(a[i] == b[i] for i in range(6))


def test_mprot_watch_on_corpus():
    an, a, _ = solved("disjoint", "protection-otf")
    assert a[MProt("g")] == {"m_g"}
    assert verify_post_solution(a.cs, a) == []


def test_value_lattice_join_in_solver():
    rhs = {"x": [Rhs("1", lambda v: ({}, vd(1))), Rhs("2", lambda v: ({}, vd(2)))]}
    a = solve(system(rhs, lattice=VALUE_LATTICE), ["x"])
    assert a["x"] == vd_join(vd(1), vd(2))
