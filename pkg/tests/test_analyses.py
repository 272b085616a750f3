from __future__ import annotations

import itertools
import random

import pytest

from threadmod.analyses import (
    ANALYSES,
    Cmp,
    compare_precision,
    compare_values,
    eval_abstract,
    guard_passable,
    make_analysis,
    table_leq,
)
from threadmod.lang import Guard, Unlock, program_to_cfg
from threadmod.lang.syntax import BinOp, Const, InputExpr, Var
from threadmod.lattice import BOT, TOP, Tid, vd, vd_leq
from threadmod.solver import PP, ProtG, ProtGUnprot, WriteG, verify_post_solution
from threadmod.solver import _FixedView
from threadmod.traces import beta_lock, beta_lock_violations, beta_write, beta_write_violations, enumerate_global
from threadmod.traces.queries import trace_queries

from conftest import CORPUS, corpus_cfg, solved, table, values

# -- golden read tables ---------------------------------------------------------

GOLDEN = {
    # program: {analysis: main's read}
    "ex1": {"protection": {0, 17}, "protection-otf": {0, 17}, "lock": {0, 17, 42},
            "write": {0, 17}, "combined": {0, 17}, "mine": {0, 17, 42}},
    "ex43": {"protection": {17, 31, 42, 59}, "protection-otf": {17, 31, 42, 59}, "lock": {17, 31, 42},
             "write": {17, 31}, "combined": {17, 31}, "mine": {17, 31, 42}},
    "ex44": {"protection": {17, 42}, "protection-otf": {17, 42}, "lock": {17},
             "write": {17, 42}, "combined": {17}, "mine": {17}},
}


@pytest.mark.parametrize("name, analysis", [(n, a) for n in GOLDEN for a in ANALYSES])
def test_golden(name, analysis):
    assert values(name, analysis) == GOLDEN[name][analysis]


@pytest.mark.parametrize("analysis", ANALYSES)
def test_single_thread_is_exact(analysis):
    assert values("single", analysis) == {5}


@pytest.mark.parametrize("analysis", ANALYSES)
def test_join_over_locksets(analysis):
    assert values("join2", analysis) == {5, 6}


@pytest.mark.parametrize("analysis", ANALYSES)
def test_unreachable_reads(analysis):
    assert table("deadread", analysis)["main:x=g"] is None
    assert table("unreach", analysis)["t9:z=g"] is None


@pytest.mark.parametrize("analysis", ANALYSES)
def test_thread_ids_go_top(analysis):
    assert table("tidglobal", analysis)["t1:z=g"] == TOP


# -- protection-based example state sequence -------------------------------------------


def _main_point_after(c, pred):
    (e,) = [e for e in c.edges if c.node(e.src).thread == "main" and pred(e.action)]
    return e.dst


def test_protection_fragment_states():
    c = corpus_cfg("ex41")
    an, a, _ = solved("ex41", "protection")
    u1 = _main_point_after(c, lambda x: x == Unlock("b"))
    s1 = a[PP(u1, frozenset({"a"}))]
    assert s1.P == {"g"}
    assert s1.sigma["g"] == vd(5) and s1.sigma["x"] == TOP
    u3 = _main_point_after(c, lambda x: x == Unlock("a"))
    s3 = a[PP(u3, frozenset())]
    assert s3.P == frozenset()
    assert s3.sigma["g"] == vd(6) and s3.sigma["x"] == vd(5)
    assert a[ProtG("g")] == vd(6)
    assert vd_leq(vd(5, 6), a[ProtGUnprot("g")])


@pytest.mark.parametrize("name", CORPUS)
def test_protected_below_unprotected(name):
    an, a, _ = solved(name, "protection")
    for g in an.globals:
        assert vd_leq(a[ProtG(g)], a[ProtGUnprot(g)])


# -- orderings ---------------------------------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
def test_refinement_orderings(name):
    assert table_leq(table(name, "write"), table(name, "protection")) == []
    assert table_leq(table(name, "combined"), table(name, "lock")) == []
    assert table_leq(table(name, "combined"), table(name, "write")) == []


@pytest.mark.parametrize("name", CORPUS)
def test_on_the_fly_matches_pre_pass(name):
    assert table(name, "protection-otf") == table(name, "protection")


def test_on_the_fly_restarts_on_disjoint_writes():
    assert solved("disjoint", "protection-otf")[1].stats.restarts >= 1


def test_lock_and_write_incomparable():
    assert compare_precision(table("ex43", "write"), table("ex43", "lock"))["main:x=g"] == Cmp.LESS
    assert compare_precision(table("ex44", "lock"), table("ex44", "write"))["main:x=g"] == Cmp.LESS


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("analysis", ANALYSES)
def test_post_solutions(name, analysis):
    a = solved(name, analysis)[1]
    assert verify_post_solution(a.cs, a) == []


# -- abstraction spot checks ------------------------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
def test_beta_subsumption(name):
    c = corpus_cfg(name)
    lock_a = solved(name, "lock")[1]
    write_a = solved(name, "write")[1]
    for t in enumerate_global(c).traces:
        q = trace_queries(c, t)
        key = PP(t.loc, q.sink_lockset)
        assert beta_lock_violations(beta_lock(c, t, q), lock_a[key]) == [], str(t)
        assert beta_write_violations(beta_write(c, t, q), write_a[key]) == [], str(t)


# -- monotonicity of right-hand sides ----------------------------------------------------

PRE_PASS = [a for a in ANALYSES if a != "protection-otf"]


def _dominated(an, x, v, e2: dict) -> bool:
    lat = an.lattice_of(x)
    if lat.leq(v, e2.get(x, lat.bottom)):
        return True
    # An entry published for write-lockset w is read wherever one for w' ⊆ w would be.
    if isinstance(x, WriteG):
        return any(
            isinstance(y, WriteG) and (y.g, y.a, y.S) == (x.g, x.a, x.S) and y.w <= x.w and lat.leq(v, u)
            for y, u in e2.items()
        )
    return False


def _leq_effects(an, e1: dict, e2: dict) -> bool:
    return all(_dominated(an, x, v, e2) for x, v in e1.items())


@pytest.mark.parametrize("name", ["ex1", "ex43", "ex44", "multi", "vreset", "loop"])
@pytest.mark.parametrize("analysis", PRE_PASS)
def test_rhs_monotone(name, analysis):
    an, a, _ = solved(name, analysis)
    view = _FixedView(a)
    states = [a[x] for x in sorted(a, key=str) if isinstance(x, PP) and a[x] is not None]
    rng = random.Random(f"{name}/{analysis}")
    checked = 0
    for e in an.cfg.edges:
        for S in an.locksets.at(e.src):
            for s, t in rng.sample(list(itertools.product(states, states)), min(6, len(states) ** 2)):
                big = s.join(t)
                e1, r1 = an.transfer(e, S, s, view)
                e2, r2 = an.transfer(e, S, big, view)
                assert an.lattice_of(PP(e.dst, S)).leq(r1, r2), (str(e), S)
                assert _leq_effects(an, e1, e2), (str(e), S)
                checked += 1
    assert checked > 0


# -- expression evaluation and comparison --------------------------------------------------


def test_eval_abstract():
    sigma = {"x": vd(1, 2), "y": vd(10), "t": vd(Tid((0,))), "b": BOT, "T": TOP}
    assert eval_abstract(BinOp("+", Var("x"), Var("y")), sigma) == vd(11, 12)
    assert eval_abstract(BinOp("<", Var("x"), Const(2)), sigma) == vd(0, 1)
    assert eval_abstract(BinOp("+", Var("x"), Var("b")), sigma) == BOT
    assert eval_abstract(BinOp("+", Var("x"), Var("T")), sigma) == TOP
    assert eval_abstract(BinOp("==", Var("t"), Var("x")), sigma) == TOP
    assert eval_abstract(InputExpr(), sigma) == TOP
    assert eval_abstract(BinOp("*", Var("x"), Var("x")), sigma, k=2) == TOP


def test_guard_pruning():
    sigma = {"x": vd(0), "y": vd(0, 1), "T": TOP}
    assert not guard_passable(Guard(Var("x"), True), sigma)
    assert guard_passable(Guard(Var("x"), False), sigma)
    assert guard_passable(Guard(Var("y"), True), sigma) and guard_passable(Guard(Var("y"), False), sigma)
    assert guard_passable(Guard(Var("T"), True), sigma)


def test_compare_values():
    assert compare_values(vd(1), vd(1, 2)) == Cmp.LESS
    assert compare_values(vd(1, 2), vd(1)) == Cmp.GREATER
    assert compare_values(vd(1), vd(2)) == Cmp.INCOMPARABLE
    assert compare_values(None, vd(2)) == Cmp.LESS
    assert compare_values(None, None) == Cmp.EQUAL
    assert Cmp.LESS.flip() == Cmp.GREATER
    with pytest.raises(ValueError):
        compare_precision({"a": vd(1)}, {"b": vd(1)})


def test_compare_table_with_itself():
    t = table("multi", "lock")
    assert set(compare_precision(t, t).values()) == {Cmp.EQUAL}


def test_unknown_analysis():
    with pytest.raises(ValueError):
        make_analysis("nope", corpus_cfg("ex1"))


def test_small_guarded_program():
    c = program_to_cfg("global g; thread main { g = 1; c = 0; if (c) { g = 2; } x = g; }")
    for name in ANALYSES:
        assert make_analysis(name, c).read_table(make_analysis(name, c).solve())["main:x=g"] == vd(1)
