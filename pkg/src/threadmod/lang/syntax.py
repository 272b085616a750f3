"""Abstract syntax, parser and pretty-printer for the toy concurrent language.

The surface syntax::

    program := decl*
    decl    := "global" ident ";" | "thread" ident "{" stmt* "}"
    stmt    := ident "=" expr ";" | ident "=" "create" "(" ident ")" ";"
             | ident "=" "input" "(" ")" ";"
             | "lock" "(" ident ")" ";" | "unlock" "(" ident ")" ";"
             | "if" "(" expr ")" block ("else" block)?
             | "while" "(" expr ")" block

Assignments are classified once all declarations are known: a declared
global on the left makes a global write, a bare declared global on the right
makes a global read.  Anything mixing a global into a compound expression is
rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

RESERVED_LOCAL = "self"
KEYWORDS = frozenset(
    {"global", "thread", "if", "else", "while", "lock", "unlock", "create", "input"}
)
BINOPS = ("==", "!=", "<=", "<", "+", "-", "*")


class LangError(Exception):
    """Error raised for malformed or ill-formed programs; carries a location."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        loc = f"{line}:{col}: " if line else ""
        super().__init__(f"{loc}{message}")


class ParseError(LangError):
    pass


class ValidationError(LangError):
    pass


Pos = tuple[int, int]


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"{_paren(self.left, self.op, False)} {self.op} {_paren(self.right, self.op, True)}"


@dataclass(frozen=True)
class InputExpr:
    """Nondeterministic value supplied by the environment."""

    def __str__(self) -> str:
        return "input()"


Expr = Union[Const, Var, BinOp, InputExpr]

_PREC = {"==": 1, "!=": 1, "<": 1, "<=": 1, "+": 2, "-": 2, "*": 3}


def _paren(e: Expr, parent: str, right: bool) -> str:
    if isinstance(e, BinOp):
        p, q = _PREC[e.op], _PREC[parent]
        if p < q or (right and p == q):
            return f"({e})"
    return str(e)


def expr_vars(e: Expr) -> Iterator[str]:
    if isinstance(e, Var):
        yield e.name
    elif isinstance(e, BinOp):
        yield from expr_vars(e.left)
        yield from expr_vars(e.right)


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class WriteGlobal:
    glob: str
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class ReadGlobal:
    target: str
    glob: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Create:
    target: str
    thread: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Lock:
    mutex: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Unlock:
    mutex: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    pos: Pos = field(default=(0, 0), compare=False)


Stmt = Union[Assign, WriteGlobal, ReadGlobal, Create, Lock, Unlock, If, While]


@dataclass(frozen=True)
class Thread:
    name: str
    body: tuple[Stmt, ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Program:
    globals: tuple[str, ...]
    threads: tuple[Thread, ...]
    locals: tuple[str, ...]
    mutexes: tuple[str, ...]
    instrumented: bool = False
    name: str = field(default="<input>", compare=False)

    @property
    def entry(self) -> str:
        return "main"

    def thread(self, name: str) -> Thread:
        for t in self.threads:
            if t.name == name:
                return t
        raise KeyError(name)


def walk(stmts: tuple[Stmt, ...]) -> Iterator[Stmt]:
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk(s.then)
            yield from walk(s.orelse)
        elif isinstance(s, While):
            yield from walk(s.body)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|<|\+|-|\*|=|\(|\)|\{|\}|;)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            word = m.group()
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, line, col))
        elif kind in ("int", "op"):
            toks.append(Token(kind, m.group(), line, col))
        i = m.end()
    toks.append(Token("eof", "", line, i - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser (recursive descent into a raw tree, classified afterwards)


@dataclass(frozen=True)
class _RawAssign:
    target: str
    expr: Expr
    pos: Pos


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> Optional[Token]:
        if self.tok.text == text and self.tok.kind in ("op", "kw"):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected identifier, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def program(self):
        globals_: list[Token] = []
        threads: list[tuple[Token, list]] = []
        while self.tok.kind != "eof":
            if self.accept("global"):
                globals_.append(self.ident())
                self.expect(";")
            elif self.accept("thread"):
                name = self.ident()
                threads.append((name, self.block()))
            else:
                raise self.error(f"expected 'global' or 'thread', found {self.tok.text!r}")
        return globals_, threads

    def block(self) -> list:
        self.expect("{")
        body = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            body.append(self.stmt())
        return body

    def stmt(self):
        tok = self.tok
        pos = (tok.line, tok.col)
        if self.accept("lock") or self.accept("unlock"):
            self.expect("(")
            m = self.ident().text
            self.expect(")")
            self.expect(";")
            return (Lock if tok.text == "lock" else Unlock)(m, pos)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = self.block() if self.accept("else") else []
            return ("if", cond, then, orelse, pos)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return ("while", cond, self.block(), pos)
        target = self.ident().text
        self.expect("=")
        if self.accept("create"):
            self.expect("(")
            name = self.ident().text
            self.expect(")")
            self.expect(";")
            return Create(target, name, pos)
        if self.accept("input"):
            self.expect("(")
            self.expect(")")
            self.expect(";")
            return _RawAssign(target, InputExpr(), pos)
        e = self.expr()
        self.expect(";")
        return _RawAssign(target, e, pos)

    def expr(self) -> Expr:
        left = self.arith()
        while self.tok.kind == "op" and self.tok.text in ("==", "!=", "<", "<="):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.arith())
        return left

    def arith(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.atom()
        while self.tok.kind == "op" and self.tok.text == "*":
            self.i += 1
            left = BinOp("*", left, self.atom())
        return left

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Const(int(tok.text))
        if tok.kind == "op" and tok.text == "-" and self.toks[self.i + 1].kind == "int":
            self.i += 2
            return Const(-int(self.toks[self.i - 1].text))
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"expected expression, found {tok.text or 'end of input'!r}")


def parse(text: str, name: str = "<input>", *, allow_reserved: bool = False) -> Program:
    """Parse and validate a program.

    ``allow_reserved`` admits the dedicated ``m_<global>`` mutexes in the
    source, which is only meaningful for re-reading instrumented output.
    """
    globals_, threads = _Parser(text).program()
    return _resolve(globals_, threads, name, allow_reserved)


def mutex_for(glob: str) -> str:
    return f"m_{glob}"


def _resolve(globals_, threads, name: str, allow_reserved: bool) -> Program:
    gnames: list[str] = []
    for tok in globals_:
        if tok.text in gnames:
            raise ValidationError(f"duplicate global {tok.text!r}", tok.line, tok.col)
        if tok.text == RESERVED_LOCAL:
            raise ValidationError("'self' cannot be a global", tok.line, tok.col)
        gnames.append(tok.text)
    gset = set(gnames)
    tnames: dict[str, Token] = {}
    for tok, _ in threads:
        if tok.text in tnames:
            raise ValidationError(f"duplicate thread name {tok.text!r}", tok.line, tok.col)
        tnames[tok.text] = tok
    if "main" not in tnames:
        raise ValidationError("program has no thread named 'main'")

    # Everything ever assigned as a local, across all threads: locals are
    # inherited by created threads, so the namespace is program-wide.
    assigned: set[str] = set()

    def collect(raw):
        for s in raw:
            if isinstance(s, (_RawAssign, Create)):
                if s.target not in gset:
                    assigned.add(s.target)
            elif isinstance(s, tuple):
                for part in s[2:-1]:
                    collect(part)

    for _, body in threads:
        collect(body)

    mutexes: dict[str, Pos] = {}
    reserved = {mutex_for(g) for g in gnames}

    def check_expr(e: Expr, pos: Pos, *, allow_global: bool = False):
        for v in expr_vars(e):
            if v in gset and not allow_global:
                raise ValidationError(
                    f"global {v!r} used inside an expression; "
                    f"read it into a temporary local first (e.g. tmp = {v};)",
                    *pos,
                )
            if v not in gset and v != RESERVED_LOCAL and v not in assigned:
                raise ValidationError(f"undeclared global {v!r}", *pos)

    def conv(raw) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in raw:
            if isinstance(s, _RawAssign):
                if s.target == RESERVED_LOCAL:
                    raise ValidationError("assignment to reserved local 'self'", *s.pos)
                if s.target in gset:
                    check_expr(s.expr, s.pos)
                    out.append(WriteGlobal(s.target, s.expr, s.pos))
                elif isinstance(s.expr, Var) and s.expr.name in gset:
                    out.append(ReadGlobal(s.target, s.expr.name, s.pos))
                else:
                    check_expr(s.expr, s.pos)
                    out.append(Assign(s.target, s.expr, s.pos))
            elif isinstance(s, Create):
                if s.target == RESERVED_LOCAL:
                    raise ValidationError("assignment to reserved local 'self'", *s.pos)
                if s.target in gset:
                    raise ValidationError(
                        "thread ids must be stored in a local before writing them to a global",
                        *s.pos,
                    )
                if s.thread not in tnames:
                    raise ValidationError(f"undeclared thread {s.thread!r}", *s.pos)
                if s.thread == "main":
                    raise ValidationError("the main thread cannot be created", *s.pos)
                out.append(s)
            elif isinstance(s, (Lock, Unlock)):
                if s.mutex in reserved and not allow_reserved:
                    raise ValidationError(
                        f"mutex name {s.mutex!r} is reserved for atomicity of global "
                        f"{s.mutex[2:]!r}",
                        *s.pos,
                    )
                mutexes.setdefault(s.mutex, s.pos)
                out.append(s)
            elif s[0] == "if":
                _, cond, then, orelse, pos = s
                check_expr(cond, pos)
                out.append(If(cond, conv(then), conv(orelse), pos))
            else:
                _, cond, body, pos = s
                check_expr(cond, pos)
                out.append(While(cond, conv(body), pos))
        return tuple(out)

    thread_objs = tuple(
        Thread(tok.text, conv(body), (tok.line, tok.col)) for tok, body in threads
    )

    # Namespace disjointness.
    namespaces = {
        "global": gset,
        "local": assigned | {RESERVED_LOCAL},
        "mutex": set(mutexes),
        "thread": set(tnames),
    }
    kinds = list(namespaces)
    for i, a in enumerate(kinds):
        for b in kinds[i + 1 :]:
            clash = namespaces[a] & namespaces[b]
            if clash:
                n = sorted(clash)[0]
                pos = mutexes.get(n, (0, 0))
                raise ValidationError(f"name {n!r} used both as {a} and as {b}", *pos)

    locals_ = (RESERVED_LOCAL,) + tuple(sorted(assigned))
    used = set(mutexes)
    if allow_reserved:
        used |= reserved
    return Program(
        tuple(gnames), thread_objs, locals_, tuple(sorted(used)), allow_reserved, name
    )


# ---------------------------------------------------------------------------
# Pretty-printer


def format_stmt(s: Stmt, indent: int = 1) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assign):
        return [f"{pad}{s.target} = {s.expr};"]
    if isinstance(s, WriteGlobal):
        return [f"{pad}{s.glob} = {s.expr};"]
    if isinstance(s, ReadGlobal):
        return [f"{pad}{s.target} = {s.glob};"]
    if isinstance(s, Create):
        return [f"{pad}{s.target} = create({s.thread});"]
    if isinstance(s, Lock):
        return [f"{pad}lock({s.mutex});"]
    if isinstance(s, Unlock):
        return [f"{pad}unlock({s.mutex});"]
    if isinstance(s, If):
        lines = [f"{pad}if ({s.cond}) {{"]
        for c in s.then:
            lines += format_stmt(c, indent + 1)
        if s.orelse:
            lines.append(f"{pad}}} else {{")
            for c in s.orelse:
                lines += format_stmt(c, indent + 1)
        lines.append(f"{pad}}}")
        return lines
    lines = [f"{pad}while ({s.cond}) {{"]
    for c in s.body:
        lines += format_stmt(c, indent + 1)
    lines.append(f"{pad}}}")
    return lines


def format_program(p: Program) -> str:
    lines = [f"global {g};" for g in p.globals]
    for t in p.threads:
        if lines:
            lines.append("")
        lines.append(f"thread {t.name} {{")
        for s in t.body:
            lines += format_stmt(s)
        lines.append("}")
    return "\n".join(lines) + "\n"
