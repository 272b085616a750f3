from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threadmod.lang import (
    Guard,
    Lock,
    ParseError,
    ReadGlobal,
    Unlock,
    ValidationError,
    WriteGlobal,
    build_cfg,
    format_program,
    instrument_atomicity,
    mutex_for,
    parse,
    program_to_cfg,
    reachable_locksets,
)
from threadmod.lang.locksets import lockset_transfer

from conftest import CORPUS, corpus_cfg, corpus_text

EX1 = corpus_text("ex1")


def test_parse_ex1_shape():
    p = parse(EX1, "ex1")
    assert p.globals == ("g",)
    assert [t.name for t in p.threads] == ["main", "t1"]
    assert p.locals == ("self", "x", "y")
    assert not p.instrumented


@pytest.mark.parametrize("name", CORPUS)
def test_format_roundtrip(name):
    p = parse(corpus_text(name), name)
    assert parse(format_program(p), name) == p


@pytest.mark.parametrize(
    "src, fragment, line",
    [
        ("thread main { x = ; }", "expected", 1),
        ("global g;\nthread main {\n  x = g + 1;\n}", "temporary", 3),
        ("thread main { x = h; }", "x = h", None),
        ("thread t1 { x = 1; }", "main", None),
        ("thread main { x = create(t9); }", "t9", None),
        ("thread main { self = 1; }", "self", None),
        ("global g; global g; thread main { }", "g", None),
        ("thread main { } thread main { }", "main", None),
        ("thread main { x = create(main); }", "main", None),
    ],
)
def test_rejects_ill_formed(src, fragment, line):
    with pytest.raises((ParseError, ValidationError)) as exc:
        parse(src)
    if line is not None:
        assert exc.value.line == line
    if fragment != "x = h":
        assert fragment in str(exc.value)


def test_reserved_mutex_names():
    with pytest.raises(ValidationError):
        parse("global g; thread main { lock(m_g); unlock(m_g); }")
    parse("global g; thread main { lock(m_g); unlock(m_g); }", allow_reserved=True)


def test_instrumentation_wraps_every_access():
    p = instrument_atomicity(parse(EX1))
    assert p.instrumented
    assert mutex_for("g") == "m_g" and "m_g" in p.mutexes
    body = p.threads[0].body
    i = next(k for k, s in enumerate(body) if isinstance(s, WriteGlobal))
    assert body[i - 1] == Lock("m_g") and body[i + 1] == Unlock("m_g")
    with pytest.raises(ValidationError):
        instrument_atomicity(p)


def test_cfg_structure():
    c = corpus_cfg("ex1")
    assert c.entry == c.thread_entries["main"]
    assert all(not c.into[u] for u in c.thread_entries.values())
    assert c.read_sites() == ["main:x=g"]
    assert c.mutexes == ("a", "b", "m_g")
    assert c.to_dot().startswith("digraph")


def test_if_and_while_lower_to_guards():
    c = program_to_cfg("thread main { i = 0; while (i < 2) { i = i + 1; } if (i) { j = 1; } else { j = 2; } }")
    guards = [e.action for e in c.edges if isinstance(e.action, Guard)]
    assert sorted(g.positive for g in guards) == [False, False, True, True]


def test_leading_while_gets_entry_edge():
    c = program_to_cfg("thread main { while (1) { x = 1; } }")
    assert not c.into[c.entry]


def test_repeated_sites_are_numbered():
    c = program_to_cfg("global g; thread main { g = 1; x = g; x = g; }")
    assert c.read_sites() == ["main:x=g", "main:x=g#2"]


def test_lockset_transfer():
    S = frozenset({"a"})
    assert lockset_transfer(Lock("b"), S) == {"a", "b"}
    assert lockset_transfer(Unlock("a"), S) == frozenset()
    assert lockset_transfer(Lock("a"), S) is None
    assert lockset_transfer(Unlock("b"), S) is None


def test_reachable_locksets_ex1():
    c = corpus_cfg("ex1")
    ls = reachable_locksets(c)
    read = c.read_edges()[0]
    assert ls.at(read.src) == {frozenset({"a", "b", "m_g"})}
    assert ls.protecting["g"] == {"b", "m_g"}


def test_unreachable_thread_has_no_locksets():
    c = corpus_cfg("unreach")
    ls = reachable_locksets(c)
    assert not ls.at(c.thread_entries["t9"])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["x = 1;", "y = x + 2;", "g = x;", "x = g;", "lock(a);", "unlock(a);"]),
                max_size=8))
def test_random_straight_line_programs_build(stmts):
    src = "global g; thread main { g = 0; x = 0; " + " ".join(stmts) + " }"
    c = program_to_cfg(src)
    assert len(c.edges) == len(c.nodes) - 1
    assert build_cfg(instrument_atomicity(parse(src))).read_sites() == c.read_sites()
