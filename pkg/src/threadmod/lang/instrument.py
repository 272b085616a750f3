"""Atomicity instrumentation: wrap every global access in its dedicated mutex."""

from __future__ import annotations

from dataclasses import replace

from .syntax import (
    If,
    Lock,
    Program,
    ReadGlobal,
    Stmt,
    Unlock,
    ValidationError,
    While,
    WriteGlobal,
    mutex_for,
    walk,
)


def _wrap(stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
    out: list[Stmt] = []
    for s in stmts:
        if isinstance(s, If):
            out.append(replace(s, then=_wrap(s.then), orelse=_wrap(s.orelse)))
        elif isinstance(s, While):
            out.append(replace(s, body=_wrap(s.body)))
        elif isinstance(s, (ReadGlobal, WriteGlobal)):
            m = mutex_for(s.glob)
            out += [Lock(m, s.pos), s, Unlock(m, s.pos)]
        else:
            out.append(s)
    return tuple(out)


def instrument_atomicity(p: Program) -> Program:
    if p.instrumented:
        raise ValidationError("program is already instrumented")
    reserved = {mutex_for(g) for g in p.globals}
    for t in p.threads:
        for s in walk(t.body):
            if isinstance(s, (Lock, Unlock)) and s.mutex in reserved:
                raise ValidationError(f"mutex name {s.mutex!r} is reserved", *s.pos)
    threads = tuple(replace(t, body=_wrap(t.body)) for t in p.threads)
    mutexes = tuple(sorted(set(p.mutexes) | reserved))
    return replace(p, threads=threads, mutexes=mutexes, instrumented=True)
