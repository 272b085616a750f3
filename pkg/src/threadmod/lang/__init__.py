"""Front end: parsing, validation, instrumentation, control-flow graphs."""

from __future__ import annotations

from .cfg import AssignLocal, Cfg, Edge, Guard, Node, action_str, build_cfg, program_to_cfg
from .instrument import instrument_atomicity
from .locksets import EMPTY, Lockset, LocksetMap, lockset_str, lockset_transfer, reachable_locksets
from .syntax import (
    BinOp,
    Const,
    Create,
    InputExpr,
    LangError,
    Lock,
    ParseError,
    Program,
    ReadGlobal,
    Unlock,
    ValidationError,
    Var,
    WriteGlobal,
    format_program,
    mutex_for,
    parse,
)

__all__ = [
    "AssignLocal", "BinOp", "Cfg", "Const", "Create", "EMPTY", "Edge", "Guard",
    "InputExpr", "LangError", "Lock", "Lockset", "LocksetMap", "Node", "ParseError",
    "Program", "ReadGlobal", "Unlock", "ValidationError", "Var", "WriteGlobal",
    "action_str", "build_cfg", "format_program", "instrument_atomicity",
    "lockset_str", "lockset_transfer", "mutex_for", "parse", "program_to_cfg",
    "reachable_locksets",
]
