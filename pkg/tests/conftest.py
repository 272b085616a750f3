from __future__ import annotations

import functools
import sys
from importlib import resources

import pytest

from threadmod.analyses import ANALYSES, run_analysis
from threadmod.lang import program_to_cfg
from threadmod.traces import concrete_read_table

CORPUS = sorted(
    p.name[:-4] for p in (resources.files("threadmod") / "corpus").iterdir() if p.name.endswith(".toy")
)
MULTITHREADED = [n for n in CORPUS if "create(" in (resources.files("threadmod") / "corpus" / f"{n}.toy").read_text()]


def corpus_text(name: str) -> str:
    return (resources.files("threadmod") / "corpus" / f"{name}.toy").read_text()


@functools.lru_cache(maxsize=None)
def corpus_cfg(name: str):
    return program_to_cfg(corpus_text(name), name)


@functools.lru_cache(maxsize=None)
def solved(name: str, analysis: str):
    """(analysis object, assignment, read table) for a corpus program."""
    return run_analysis(analysis, corpus_cfg(name))


@functools.lru_cache(maxsize=None)
def concrete(name: str):
    return concrete_read_table(corpus_cfg(name))


def table(name: str, analysis: str):
    return solved(name, analysis)[2]


def values(name: str, analysis: str, site: str = "main:x=g"):
    v = table(name, analysis)[site]
    return None if v is None else set(v.elems)


@pytest.fixture(params=CORPUS)
def corpus_name(request):
    return request.param


@pytest.fixture(params=ANALYSES)
def analysis_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
