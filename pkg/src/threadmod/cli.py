"""Command-line front end: ``threadmod run | compare | oracle | corpus``.

Exit codes: 0 success (oracle: PASS), 1 unreadable or ill-formed program,
2 solver or enumeration budget exceeded, 3 oracle FAIL, 4 oracle INCONCLUSIVE.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Sequence

from .analyses import ANALYSES, compare_precision, make_analysis
from .analyses.readtable import Cmp
from .lang import LangError, program_to_cfg
from .lang.cfg import Cfg
from .solver import RestartBudgetExceeded, SolverBudgetExceeded, unknown_sort_key
from .traces import TraceBudgetExceeded, TraceConfig, check_soundness, trace_to_dot
from .traces.enumerate import enumerate_global

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Helpers


def corpus_names() -> list[str]:
    root = resources.files("threadmod") / "corpus"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".toy"))


def read_program(path: str) -> tuple[str, str]:
    """Source text and program name; bare names fall back to the shipped corpus."""
    p = Path(path)
    if p.is_file():
        return p.read_text(), p.stem
    name = path[:-4] if path.endswith(".toy") else path
    if name in corpus_names():
        return (resources.files("threadmod") / "corpus" / f"{name}.toy").read_text(), name
    raise CliError(f"{path}: no such file or corpus program", EXIT_INPUT)


def load_cfg(path: str) -> Cfg:
    text, name = read_program(path)
    try:
        return program_to_cfg(text, name)
    except LangError as exc:
        raise CliError(f"{path}:{exc}", EXIT_INPUT) from exc


def to_jsonable(v: Any) -> Any:
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if hasattr(v, "to_json"):
        return v.to_json()
    if isinstance(v, (frozenset, set)):
        return sorted(to_jsonable(x) for x in v)
    return str(v)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def parse_analyses(values: Optional[list[str]], default: Sequence[str]) -> list[str]:
    names: list[str] = []
    for v in values or []:
        names.extend(x.strip() for x in v.split(",") if x.strip())
    names = names or list(default)
    for n in names:
        if n not in ANALYSES:
            raise CliError(f"unknown analysis {n!r}; choose from {', '.join(ANALYSES)}", EXIT_INPUT)
    return names


def solver_tracer(enabled: bool):
    if not enabled:
        return None

    def trace(x, ndeps: int, changed: bool) -> None:
        print(f"eval {x} deps={ndeps}{' changed' if changed else ''}", file=sys.stderr)

    return trace


def solve_one(cfg: Cfg, name: str, args) -> dict:
    an = make_analysis(name, cfg)
    t0 = time.perf_counter()
    try:
        a = an.solve(trace=solver_tracer(args.trace_solver))
    except (SolverBudgetExceeded, RestartBudgetExceeded) as exc:
        raise CliError(f"{name}: {exc}", EXIT_BUDGET) from exc
    wall = time.perf_counter() - t0
    sites = []
    for r in an.read_results(a):
        act = r.edge.action
        sites.append({
            "site": r.site,
            "line": act.pos[0],  # type: ignore[union-attr]
            "col": act.pos[1],  # type: ignore[union-attr]
            "local": act.target,  # type: ignore[union-attr]
            "global": act.glob,  # type: ignore[union-attr]
            "reachable": r.reachable,
            "value": None if r.value is None else r.value.to_json(),
            "shown": "unreachable" if r.value is None else str(r.value),
        })
    report: dict[str, Any] = {
        "program": cfg.program.name,
        "analysis": name,
        "sites": sites,
        "stats": a.stats.to_json(),
    }
    if args.timing:
        report["wall_time_s"] = round(wall, 6)
    if args.dump_states:
        report["states"] = {str(x): to_jsonable(a[x]) for x in sorted(a, key=unknown_sort_key)}
    report["_table"] = an.read_table(a)
    return report


def strip_private(report: dict) -> dict:
    return {k: v for k, v in report.items() if not k.startswith("_")}


def table_text(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


# ---------------------------------------------------------------------------
# Commands


def cmd_run(args) -> int:
    cfg = load_cfg(args.program)
    if args.format == "dot":
        sys.stdout.write(cfg.to_dot())
        return EXIT_OK
    names = parse_analyses(args.analysis, ["protection"])
    reports = [solve_one(cfg, n, args) for n in names]
    if args.format == "table":
        rows = [["analysis", "site", "line", "value"]]
        for rep in reports:
            for s in rep["sites"]:
                rows.append([rep["analysis"], s["site"], str(s["line"]), s["shown"]])
        sys.stdout.write(table_text(rows))
    else:
        out = [strip_private(r) for r in reports]
        sys.stdout.write(dumps(out[0] if len(out) == 1 else out) + "\n")
    return EXIT_OK


def labels_for(names: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for n in names:
        seen[n] = seen.get(n, 0) + 1
        out.append(n if seen[n] == 1 else f"{n}#{seen[n]}")
    return out


def compare_report(cfg: Cfg, names: list[str], args) -> dict:
    labels = labels_for(names)
    tables = {lab: solve_one(cfg, n, args)["_table"] for lab, n in zip(labels, names)}
    sites = cfg.read_sites()
    matrix = {s: {a: {} for a in labels} for s in sites}
    for a in labels:
        for b in labels:
            for s, c in compare_precision(tables[a], tables[b]).items():
                matrix[s][a][b] = c.value
    best: dict[str, list[str]] = {a: [] for a in labels}
    tied: list[str] = []
    for s in sites:
        row = matrix[s]
        if all(row[a][b] == Cmp.EQUAL.value for a in labels for b in labels):
            tied.append(s)
            continue
        for a in labels:
            if all(row[a][b] == Cmp.LESS.value for b in labels if b != a):
                best[a].append(s)
    return {
        "program": cfg.program.name,
        "analyses": labels,
        "values": {s: {a: (None if tables[a][s] is None else str(tables[a][s])) for a in labels}
                   for s in sites},
        "matrix": matrix,
        "summary": {"strictly_best": best, "tied": tied},
    }


def cmd_compare(args) -> int:
    cfg = load_cfg(args.program)
    names = parse_analyses(args.analysis, ANALYSES)
    if len(names) < 2:
        raise CliError("compare needs at least two analyses", EXIT_INPUT)
    rep = compare_report(cfg, names, args)
    if args.format == "table":
        labels = rep["analyses"]
        rows = [["site", *labels, "best"]]
        for s, vals in rep["values"].items():
            best = [a for a in labels if s in rep["summary"]["strictly_best"][a]]
            tag = "tie" if s in rep["summary"]["tied"] else (best[0] if best else "-")
            rows.append([s, *[vals[a] or "unreachable" for a in labels], tag])
        sys.stdout.write(table_text(rows))
    else:
        sys.stdout.write(dumps(rep) + "\n")
    return EXIT_OK


def trace_config(args) -> TraceConfig:
    try:
        inputs = tuple(int(x) for x in args.input_set.split(",") if x.strip())
    except ValueError as exc:
        raise CliError(f"bad --input-set {args.input_set!r}", EXIT_INPUT) from exc
    if args.bound < 1 or not inputs:
        raise CliError("--bound must be positive and --input-set non-empty", EXIT_INPUT)
    return TraceConfig(bound=args.bound, inputs=inputs)


def dump_traces(cfg: Cfg, config: TraceConfig, outdir: Path) -> dict:
    outdir.mkdir(parents=True, exist_ok=True)
    en = enumerate_global(cfg, config)
    paths = {}
    for i, t in enumerate(sorted(en.traces, key=lambda t: (t.size(), str(t)))):
        p = outdir / f"{cfg.program.name}-{i:05d}.dot"
        p.write_text(trace_to_dot(t, f"{cfg.program.name} {t}"))
        paths[t] = str(p)
    return paths


def cmd_oracle(args) -> int:
    cfg = load_cfg(args.program)
    names = parse_analyses(args.analysis, ANALYSES)
    config = trace_config(args)
    tables = {n: solve_one(cfg, n, args)["_table"] for n in names}
    verdict, concrete = check_soundness(cfg, tables, config)
    paths: dict = {}
    if args.dump_traces and concrete is not None:
        paths = dump_traces(cfg, config, Path(args.dump_traces))
    rep: dict[str, Any] = {
        "program": cfg.program.name,
        "analyses": names,
        "verdict": verdict.status,
        "bound": config.bound,
        "bound_reached": verdict.bound_reached,
    }
    if verdict.reason:
        rep["reason"] = verdict.reason
    if concrete is not None:
        rep["concrete"] = concrete.to_json()
    rep["failures"] = [
        {"analysis": n, "site": c.site, "value": str(c.value),
         "abstract": "unreachable" if c.abstract is None else str(c.abstract),
         "trace": paths.get(c.trace, str(c.trace))}
        for n, cs in sorted(verdict.failures.items()) for c in cs
    ]
    if args.format == "table":
        print(f"{cfg.program.name}: {verdict.status}"
              + (" (bound reached)" if verdict.bound_reached else ""))
        for f in rep["failures"]:
            print(f"  {f['analysis']} {f['site']}: {f['value']} not in {f['abstract']} [{f['trace']}]")
    else:
        sys.stdout.write(dumps(rep) + "\n")
    return {"PASS": EXIT_OK, "FAIL": EXIT_FAIL}.get(verdict.status, EXIT_INCONCLUSIVE)


def cmd_corpus(args) -> int:
    for n in corpus_names():
        print(n)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="threadmod", description="Thread-modular value analyses for a toy language.")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, default_format="json", formats=("json", "table")):
        sp.add_argument("program", help="path to a .toy file or the name of a corpus program")
        sp.add_argument("--analysis", "-a", action="append",
                        help=f"analysis name or comma list ({', '.join(ANALYSES)})")
        sp.add_argument("--format", choices=formats, default=default_format)
        sp.add_argument("--trace-solver", action="store_true", help="log rhs evaluations to stderr")
        sp.add_argument("--dump-states", action="store_true", help="include every solved unknown")
        sp.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")

    run = sub.add_parser("run", help="solve analyses and print read tables")
    common(run, formats=("json", "table", "dot"))
    run.set_defaults(fn=cmd_run)

    cmp_ = sub.add_parser("compare", help="compare read tables of several analyses")
    common(cmp_)
    cmp_.set_defaults(fn=cmd_compare)

    orc = sub.add_parser("oracle", help="check analyses against the bounded concrete semantics")
    common(orc)
    orc.add_argument("--bound", type=int, default=TraceConfig.bound, help="events per thread")
    orc.add_argument("--input-set", default="0,1", help="values produced by input()")
    orc.add_argument("--dump-traces", metavar="DIR", help="write every trace as a DOT file")
    orc.set_defaults(fn=cmd_oracle)

    cor = sub.add_parser("corpus", help="list the shipped example programs")
    cor.set_defaults(fn=cmd_corpus)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"threadmod: {exc}", file=sys.stderr)
        return exc.code
    except TraceBudgetExceeded as exc:
        print(f"threadmod: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
