"""Command-line driver: compile, export, check, filter, and measure.

Exit codes: 0 success, 1 usage error, 2 input error (formula or file),
3 semantic negative (empty language, inequivalent formulas, nothing
accepted), 4 external-tool failure.  Results go to standard output;
diagnostics and summaries go to standard error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from .afw import Afw, afw_accepts, compile_afw
from .export import (
    MonaError,
    AspFactError,
    automaton_view,
    emit_asp_facts,
    emit_dot,
    emit_mona,
    find_mona,
)
from .formula import (
    And,
    Atom,
    Eventually,
    Formula,
    FormulaSyntaxError,
    Next,
    Until,
    parse_formula,
    render,
)
from .fsa import (
    afw_to_nfa,
    compile_dfa,
    dfa_accepts,
    equivalent,
    is_empty,
    minimize,
    nfa_to_dfa,
    shortest_witness,
)
from .semantics import Trace, make_trace
from .traces import (
    BACKENDS,
    TraceFormatError,
    filter_traces,
    read_traces,
    write_traces,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NEGATIVE = 3
EXIT_EXTERNAL = 4

FAMILIES = ("nested-next", "eventually-chain", "until-ladder")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_formula(text: str) -> Formula:
    if text.startswith("@"):
        return parse_formula(Path(text[1:]).read_text(encoding="utf-8"))
    return parse_formula(text)


def _build(f: Formula, target: str):
    automaton = compile_afw(f)
    if target == "afw":
        return automaton
    nfa = afw_to_nfa(automaton)
    if target == "nfa":
        return nfa
    dfa = nfa_to_dfa(nfa)
    if target == "dfa":
        return dfa
    return minimize(dfa)


def _write_output(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _trace_json(trace: Trace) -> str:
    return json.dumps([sorted(letter) for letter in trace])


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_compile(args: argparse.Namespace) -> int:
    f = _load_formula(args.formula)
    emit = args.emit or "asp"
    if emit == "mona":
        if args.to is not None:
            print("error: --to does not apply to --emit mona", file=sys.stderr)
            return EXIT_USAGE
        text = emit_mona(f)
        _write_output(text, args.output)
        binary = find_mona(args.mona_bin) if args.mona_bin else None
        if binary is not None:
            import subprocess
            import tempfile

            with tempfile.NamedTemporaryFile("w", suffix=".mona", delete=False) as handle:
                handle.write(text)
                path = handle.name
            try:
                result = subprocess.run([binary, "-q", path], capture_output=True, text=True)
            finally:
                Path(path).unlink()
            if result.returncode != 0:
                raise MonaError(f"MONA rejected the program: {result.stderr.strip()}")
        return EXIT_OK
    view = automaton_view(_build(f, args.to or "afw"))
    text = emit_asp_facts(view) if emit == "asp" else emit_dot(view)
    _write_output(text, args.output)
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    f = _load_formula(args.formula)
    corpus = read_traces(args.traces)
    _, report = filter_traces(f, corpus, backend=args.backend, jobs=args.jobs)
    lines = [
        f"{v.trace_id}\t{'accept' if v.accepted else 'reject'}" for v in report.verdicts
    ]
    _write_output("\n".join(lines) + ("\n" if lines else ""), args.output)
    return EXIT_OK


def _cmd_filter(args: argparse.Namespace) -> int:
    f = _load_formula(args.formula)
    corpus = read_traces(args.traces)
    accepted, report = filter_traces(f, corpus, backend=args.backend, jobs=args.jobs)
    if args.output is None or args.output == "-":
        write_traces(accepted, sys.stdout)
    else:
        write_traces(accepted, args.output)
    elapsed = report.wall_time[args.backend]
    print(
        f"filter: accepted {report.accepted}/{report.total} traces"
        f" (backend={args.backend}, jobs={args.jobs}, {elapsed:.3f}s)",
        file=sys.stderr,
    )
    return EXIT_OK if report.accepted else EXIT_NEGATIVE


def _cmd_empty(args: argparse.Namespace) -> int:
    f = _load_formula(args.formula)
    dfa = compile_dfa(f)
    if is_empty(dfa):
        print("language is empty")
        return EXIT_NEGATIVE
    witness = shortest_witness(dfa)
    assert witness is not None
    print(_trace_json(witness))
    return EXIT_OK


def _cmd_equiv(args: argparse.Namespace) -> int:
    left = compile_dfa(_load_formula(args.formula))
    right = compile_dfa(_load_formula(args.other))
    same, counterexample = equivalent(left, right)
    if same:
        print("equivalent")
        return EXIT_OK
    assert counterexample is not None
    print(_trace_json(counterexample))
    print("formulas differ on the printed trace", file=sys.stderr)
    return EXIT_NEGATIVE


def _cmd_stats(args: argparse.Namespace) -> int:
    f = _load_formula(args.formula)
    afw = compile_afw(f)
    mindfa = minimize(nfa_to_dfa(afw_to_nfa(afw)))
    rows = [
        ("afw", len(afw.states), len(automaton_view(afw).transitions)),
        ("min-dfa", mindfa.n_states, len(automaton_view(mindfa).transitions)),
    ]
    lines = ["representation states transitions"]
    lines += [f"{name} {states} {transitions}" for name, states, transitions in rows]
    _write_output("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def family_formula(family: str, depth: int) -> Formula:
    """Benchmark preset: a formula of the named family at the given depth."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    atoms = [f"p{i}" for i in range(1, depth + 1)]
    if family == "nested-next":
        f: Formula = Atom(atoms[-1])
        for name in reversed(atoms[:-1]):
            f = And(Atom(name), Next(f))
        return f
    if family == "eventually-chain":
        f = Atom(atoms[-1])
        for name in reversed(atoms[:-1]):
            f = And(Atom(name), Next(f))
        return Eventually(f)
    if family == "until-ladder":
        f = Atom(atoms[-1])
        for name in reversed(atoms[:-1]):
            f = Until(Atom(name), f)
        return f
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def _bench_sample(depth: int, count: int = 50) -> list[Trace]:
    rng = random.Random(0)
    atoms = [f"p{i}" for i in range(1, depth + 1)]
    traces = []
    for _ in range(count):
        length = 2 * depth
        letters = [
            {a for a in atoms if rng.random() < 0.5} for _ in range(length)
        ]
        traces.append(make_trace(letters))
    return traces


def _cmd_bench(args: argparse.Namespace) -> int:
    lines = [
        "family,depth,afw_states,afw_transitions,mindfa_states,mindfa_transitions,"
        "compile_ms,afw_checks_per_s,dfa_checks_per_s"
    ]
    for depth in range(args.min_depth, args.max_depth + 1):
        f = family_formula(args.family, depth)
        started = time.perf_counter()
        afw = compile_afw(f)
        mindfa = minimize(nfa_to_dfa(afw_to_nfa(afw)))
        compile_ms = (time.perf_counter() - started) * 1000.0
        sample = _bench_sample(depth)
        afw_rate = _throughput(lambda t: afw_accepts(afw, t), sample)
        dfa_rate = _throughput(lambda t: dfa_accepts(mindfa, t), sample)
        afw_transitions = len(automaton_view(afw).transitions)
        mindfa_transitions = len(automaton_view(mindfa).transitions)
        lines.append(
            f"{args.family},{depth},{len(afw.states)},{afw_transitions},"
            f"{mindfa.n_states},{mindfa_transitions},"
            f"{compile_ms:.3f},{afw_rate:.0f},{dfa_rate:.0f}"
        )
    _write_output("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _throughput(checker, sample: list[Trace]) -> float:
    started = time.perf_counter()
    for trace in sample:
        checker(trace)
    elapsed = time.perf_counter() - started
    return len(sample) / elapsed if elapsed > 0 else float("inf")


# ---------------------------------------------------------------------------
# Parser and entry point


def _build_parser() -> _Parser:
    parser = _Parser(prog="dynaut", description=__doc__)
    parser.add_argument(
        "--mona-bin", metavar="PATH", default=None,
        help="path to the optional MONA binary (or set DYNAUT_MONA)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="translate a formula to an automaton export")
    p.add_argument("formula", help="formula text, or @FILE")
    p.add_argument("--to", choices=("afw", "nfa", "dfa", "mindfa"), default=None,
                   help="target representation (default afw)")
    p.add_argument("--emit", choices=("asp", "dot", "mona"), default=None,
                   help="export format (default asp)")
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("check", help="report per-trace verdicts")
    p.add_argument("formula")
    p.add_argument("traces", help="trace corpus file")
    p.add_argument("--backend", choices=BACKENDS, default="afw")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("filter", help="keep the traces satisfying the formula")
    p.add_argument("formula")
    p.add_argument("traces")
    p.add_argument("--backend", choices=BACKENDS, default="afw")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("empty", help="decide language emptiness; print a shortest witness")
    p.add_argument("formula")
    p.set_defaults(func=_cmd_empty)

    p = sub.add_parser("equiv", help="decide language equivalence of two formulas")
    p.add_argument("formula")
    p.add_argument("other")
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("stats", help="state/transition counts, alternating vs minimal deterministic")
    p.add_argument("formula")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("bench", help="size and throughput table for a formula family (CSV)")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--min-depth", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (FormulaSyntaxError, TraceFormatError, AspFactError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except MonaError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_EXTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
