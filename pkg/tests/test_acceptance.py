"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import json
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from threadmod.analyses import ANALYSES, table_leq  # noqa: E402
from threadmod.cli import main as cli_main  # noqa: E402
from threadmod.lang import Unlock  # noqa: E402
from threadmod.lattice import (  # noqa: E402
    TOP,
    AbstractEnv,
    Tid,
    ValueD,
    ac_expand,
    ac_join,
    ac_leq,
    ac_of,
    env_join,
    env_leq,
    vd,
    vd_join,
    vd_leq,
    vd_meet,
)
from threadmod.solver import PP, ProtG, ProtGUnprot, verify_post_solution  # noqa: E402
from threadmod.traces import (  # noqa: E402
    MutexTraces,
    TraceAt,
    TraceConfig,
    concrete_read_table,
    enumerate_global,
    enumerate_local,
    init_traces,
    soundness_violations,
)

from conftest import CORPUS, MULTITHREADED, corpus_cfg, solved  # noqa: E402

RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def read(name: str, analysis: str, site: str = "main:x=g"):
    v = solved(name, analysis)[2][site]
    return None if v is None else set(v.elems)


def golden(name: str, expected: dict) -> tuple[bool, str]:
    got = {a: read(name, a) for a in expected}
    ok = got == expected
    shown = ", ".join(f"{a}={sorted(v)}" for a, v in got.items())
    return ok, shown


def test_criterion_01_example1():
    # By hand, lock-centered at main's read: L a = {∅}, L b = {{a}}, V a = V b = ∅.
    # [g,a,{b}] = {42} (t1's unlock(a)) is admitted through a since ∅ ∩ {b} = ∅;
    # [g,b,∅] = {0,17} is admitted through either mutex.  Result {0,17,42}.
    # Write-centered: the unlock(a) entry has S' = {b}, which meets main's S, so
    # only unlock(b)'s 17 at S' = ∅ is read, plus main's own 0.  Result {0,17}.
    ok, shown = golden("ex1", {"protection": {0, 17}, "mine": {0, 17, 42}, "lock": {0, 17, 42}, "write": {0, 17}})
    conc = concrete_read_table(corpus_cfg("ex1")).values["main:x=g"]
    ok = ok and conc <= {0, 17}
    record(1, ok, f"ex1 {shown}; concrete={sorted(conc)}")


def test_criterion_02_write_centered_example():
    ok, shown = golden("ex43", {"write": {17, 31}, "protection": {17, 31, 42, 59}, "lock": {17, 31, 42}})
    record(2, ok, f"ex43 {shown}")


def test_criterion_03_lock_centered_example():
    ok, shown = golden("ex44", {"write": {17, 42}, "lock": {17}, "combined": {17}})
    record(3, ok, f"ex44 {shown}")


def test_criterion_04_protection_states():
    c = corpus_cfg("ex41")
    _, a, _ = solved("ex41", "protection")
    after = {e.action: e.dst for e in c.edges if c.node(e.src).thread == "main" and isinstance(e.action, Unlock)}
    s1 = a[PP(after[Unlock("b")], frozenset({"a"}))]
    s3 = a[PP(after[Unlock("a")], frozenset())]
    ok = (
        s1.P == {"g"} and s1.sigma["g"] == vd(5) and s1.sigma["x"] == TOP
        and s3.P == frozenset() and s3.sigma["g"] == vd(6) and s3.sigma["x"] == vd(5)
        and a[ProtG("g")] == vd(6) and vd_leq(vd(5, 6), a[ProtGUnprot("g")])
    )
    record(4, ok, f"s1=({sorted(s1.P)},g={s1.sigma['g']},x={s1.sigma['x']}) "
                  f"[g]={a[ProtG('g')]} [g]'={a[ProtGUnprot('g')]}")


def test_criterion_05_soundness_oracle():
    t0 = time.perf_counter()
    bad = []
    for name in CORPUS:
        cr = concrete_read_table(corpus_cfg(name))
        for an in ANALYSES:
            bad += [f"{name}/{an}: {v}" for v in soundness_violations(cr, solved(name, an)[2])]
    dt = time.perf_counter() - t0
    ok = not bad and len(CORPUS) >= 15 and dt < 120
    record(5, ok, f"{len(CORPUS)} programs x {len(ANALYSES)} modes, {len(bad)} violations, {dt:.1f}s"
                  + (f"; first: {bad[0]}" if bad else ""))


def test_criterion_06_enumerations_agree():
    cfg = TraceConfig(bound=32)
    progs = ["ex2"] + [n for n in MULTITHREADED if n != "ex2"]
    failed = []
    for name in progs:
        c = corpus_cfg(name)
        en = enumerate_global(c, cfg)
        loc = enumerate_local(c, cfg)
        same = all(loc[TraceAt(n.id)] == en.at(n.id) for n in c.nodes) and all(
            loc[MutexTraces(m)] == init_traces(c) | en.ending_in_unlock(m) for m in c.mutexes
        )
        if not same:
            failed.append(name)
    ok = not failed and len(progs) >= 6
    record(6, ok, f"k=32, {len(progs)} multithreaded programs, disagreements: {failed or 'none'}")


def test_criterion_07_orderings():
    bad = []
    for name in CORPUS:
        t = {a: solved(name, a)[2] for a in ("write", "protection", "lock", "combined")}
        bad += [f"{name}: write vs protection at {s}" for s in table_leq(t["write"], t["protection"])]
        bad += [f"{name}: combined vs lock at {s}" for s in table_leq(t["combined"], t["lock"])]
        bad += [f"{name}: combined vs write at {s}" for s in table_leq(t["combined"], t["write"])]
        an, a, _ = solved(name, "protection")
        bad += [f"{name}: [{g}] not below [{g}]'" for g in an.globals if not vd_leq(a[ProtG(g)], a[ProtGUnprot(g)])]
    record(7, not bad, f"{len(CORPUS)} programs, {len(bad)} violations" + (f"; first: {bad[0]}" if bad else ""))


def _compare(name: str, analyses: str) -> dict:
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        assert cli_main(["compare", name, "-a", analyses]) == 0
    return json.loads(buf.getvalue())


def test_criterion_08_incomparability():
    r43 = _compare("ex43", "lock,write")
    r44 = _compare("ex44", "lock,write")
    w_lt_l = r43["matrix"]["main:x=g"]["write"]["lock"] == "<"
    l_lt_w = r44["matrix"]["main:x=g"]["lock"]["write"] == "<"
    record(8, w_lt_l and l_lt_w, f"ex43 write<lock: {w_lt_l}; ex44 lock<write: {l_lt_w}")


def _laws(rng: random.Random, n: int) -> list[str]:
    K = 6
    errs: list[str] = []

    def value():
        if rng.random() < 0.1:
            return TOP
        pool = list(range(-3, 6)) + [Tid((i,)) for i in range(3)]
        return ValueD(frozenset(rng.sample(pool, rng.randint(0, K))))

    mutexes = "abcd"

    def antichain():
        return ac_of(frozenset(rng.sample(mutexes, rng.randint(0, 4))) for _ in range(rng.randint(0, 4)))

    keys = ("self", "x", "g")

    def env():
        return AbstractEnv({k: value() for k in keys})

    lattices = {
        "ValueD": (value, lambda a, b: vd_join(a, b, K), vd_leq),
        "MinAntichain": (antichain, ac_join, ac_leq),
        "AbstractEnv": (env, lambda a, b: env_join(a, b, K), env_leq),
    }
    for lname, (gen, join, leq) in lattices.items():
        for _ in range(n):
            a, b, c = gen(), gen(), gen()
            checks = {
                "commutative": join(a, b) == join(b, a),
                "associative": join(join(a, b), c) == join(a, join(b, c)),
                "idempotent": join(a, a) == a,
                "upper bound": leq(a, join(a, b)) and leq(b, join(a, b)),
                "least": not (leq(a, c) and leq(b, c)) or leq(join(a, b), c),
                "reflexive": leq(a, a),
                "antisymmetric": not (leq(a, b) and leq(b, a)) or a == b,
                "transitive": not (leq(a, b) and leq(b, c)) or leq(a, c),
            }
            if lname == "ValueD":
                m = vd_meet(a, b)
                checks["meet lower bound"] = leq(m, a) and leq(m, b)
            errs += [f"{lname} {law}" for law, okay in checks.items() if not okay]
    return errs


def _exhaustive_antichains() -> list[str]:
    universe = ("a", "b", "c")
    subsets = [frozenset(x) for r in range(4) for x in itertools.combinations(universe, r)]
    fams = []
    for mask in range(1 << len(subsets)):
        fam = frozenset(s for i, s in enumerate(subsets) if mask >> i & 1)
        if all(t in fam for s in fam for t in subsets if s <= t):
            fams.append(fam)
    errs = [] if len(fams) == 20 else [f"{len(fams)} upward-closed families, expected 20"]
    for fa, fb in itertools.product(fams, repeat=2):
        f, g = ac_of(fa), ac_of(fb)
        if ac_expand(ac_join(f, g), universe) != fa | fb or ac_leq(f, g) != (fa <= fb):
            errs.append(f"{sorted(map(sorted, fa))} vs {sorted(map(sorted, fb))}")
    return errs


def test_criterion_09_lattice_laws():
    errs = _laws(random.Random(2024), 1000) + _exhaustive_antichains()
    record(9, not errs, f"1000 cases per law x 3 lattices + 400 exhaustive |M|=3 pairs, {len(errs)} failures"
                        + (f"; first: {errs[0]}" if errs else ""))


def test_criterion_10_post_solutions():
    bad = []
    for name in CORPUS:
        for an in ANALYSES:
            a = solved(name, an)[1]
            bad += [f"{name}/{an}: {v}" for v in verify_post_solution(a.cs, a)]
    differ = [n for n in CORPUS if solved(n, "protection")[2] != solved(n, "protection-otf")[2]]
    ok = not bad and not differ
    record(10, ok, f"{len(CORPUS) * len(ANALYSES)} solves, {len(bad)} violations; "
                   f"on-the-fly vs pre-pass differs on: {differ or 'none'}")


if __name__ == "__main__":
    failed = 0
    for fn in [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
