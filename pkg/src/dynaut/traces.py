"""Trace corpus I/O and the plan-filtering harness.

A corpus file is newline-delimited: each line is one trace, either a bare
JSON array of letters (each letter an array of atom names) or an object
``{"id": ..., "trace": [...]}``.  Lines starting with ``#`` are comments.
Filtering keeps the traces a chosen backend accepts; all backends agree,
so the choice only affects speed and the failure-position diagnostics.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, IO, Iterable, Iterator

from .afw import afw_accepts, compile_afw
from .formula import Formula
from .fsa import Dfa, compile_dfa, dfa_accepts
from .semantics import Trace, accepts_semantics, make_trace

BACKENDS = ("oracle", "afw", "dfa")


class TraceFormatError(ValueError):
    """Malformed trace file content, with the offending line number."""


@dataclass(frozen=True)
class TraceCorpus:
    entries: tuple[tuple[str, Trace], ...]

    def __post_init__(self) -> None:
        ids = [ident for ident, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("trace ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, Trace]]:
        return iter(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(ident for ident, _ in self.entries)


@dataclass(frozen=True)
class Verdict:
    trace_id: str
    accepted: bool
    # For the dfa backend on rejected traces: index of the first letter
    # after which no accepting continuation of the remaining length exists.
    failed_at: int | None = None


@dataclass(frozen=True)
class FilterReport:
    total: int
    accepted: int
    rejected: int
    verdicts: tuple[Verdict, ...]
    wall_time: dict[str, float]


def read_traces(source: str | Path | IO[str] | Iterable[str]) -> TraceCorpus:
    """Read a corpus; bare-array records get ids ``t0, t1, ...`` by position."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return _read_lines(handle)
    return _read_lines(source)


def _read_lines(lines: Iterable[str]) -> TraceCorpus:
    entries: list[tuple[str, Trace]] = []
    seen: set[str] = set()
    record = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as err:
            raise TraceFormatError(f"line {lineno}: invalid JSON: {err}") from err
        if isinstance(payload, dict):
            ident = payload.get("id")
            letters = payload.get("trace")
            if not isinstance(ident, str) or letters is None:
                raise TraceFormatError(f"line {lineno}: expected 'id' and 'trace' fields")
        elif isinstance(payload, list):
            ident = f"t{record}"
            letters = payload
        else:
            raise TraceFormatError(f"line {lineno}: expected an array or an object")
        if not isinstance(letters, list) or not letters:
            raise TraceFormatError(f"line {lineno}: traces must be nonempty arrays of letters")
        for letter in letters:
            if not isinstance(letter, list) or any(not isinstance(a, str) for a in letter):
                raise TraceFormatError(f"line {lineno}: letters must be arrays of atom names")
        try:
            trace = make_trace(letters)
        except ValueError as err:
            raise TraceFormatError(f"line {lineno}: {err}") from err
        if ident in seen:
            raise TraceFormatError(f"line {lineno}: duplicate trace id {ident!r}")
        seen.add(ident)
        entries.append((ident, trace))
        record += 1
    return TraceCorpus(tuple(entries))


def write_traces(corpus: TraceCorpus, sink: str | Path | IO[str]) -> None:
    """Write the corpus; ``read_traces`` of the result is the identity."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as handle:
            _write_lines(corpus, handle)
    else:
        _write_lines(corpus, sink)


def _write_lines(corpus: TraceCorpus, handle: IO[str]) -> None:
    for ident, trace in corpus:
        payload = {"id": ident, "trace": [sorted(letter) for letter in trace]}
        handle.write(json.dumps(payload, separators=(", ", ": ")) + "\n")


def _backend_checker(f: Formula, backend: str) -> Callable[[Trace], bool]:
    if backend == "oracle":
        return lambda t: accepts_semantics(f, t)
    if backend == "afw":
        automaton = compile_afw(f)
        return lambda t: afw_accepts(automaton, t)
    if backend == "dfa":
        automaton = compile_dfa(f)
        return lambda t: dfa_accepts(automaton, t)
    raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")


def first_failure_position(automaton: Dfa, t: Trace) -> int | None:
    """Index of the first letter after which acceptance became impossible.

    None when the trace is accepted.  Computed against the automaton: a
    state can finish in r letters when some length-r continuation, final
    flag on its last letter, reaches an accepting state.
    """
    n = len(t)
    n_minterms = len(automaton.alphabet)
    can_finish: set[int] = set(automaton.accepting)
    layers = [can_finish]
    for _ in range(n):
        previous = layers[-1]
        layers.append(
            {
                s
                for s in range(automaton.n_states)
                if any(
                    automaton.next_state[s][m][1 if len(layers) == 1 else 0] in previous
                    for m in range(n_minterms)
                )
            }
        )
    # layers[r] = states that can finish in exactly r more letters.
    current = automaton.initial
    for i, letter in enumerate(t):
        minterm = automaton.minterm_index(automaton.table.letter_ids(letter))
        flag = 1 if i == n - 1 else 0
        current = automaton.next_state[current][minterm][flag]
        remaining = n - 1 - i
        if remaining == 0:
            if current in automaton.accepting:
                return None
            return i
        if current not in layers[remaining]:
            return i
    return None


def filter_traces(
    f: Formula,
    corpus: TraceCorpus,
    backend: str = "afw",
    jobs: int = 1,
) -> tuple[TraceCorpus, FilterReport]:
    """Keep the traces the backend accepts; order and ids are preserved."""
    started = time.perf_counter()
    checker = _backend_checker(f, backend)
    traces = [trace for _, trace in corpus]
    if jobs > 1 and traces:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(checker, traces))
    else:
        outcomes = [checker(trace) for trace in traces]

    dfa_automaton = compile_dfa(f) if backend == "dfa" else None
    verdicts = []
    kept = []
    for (ident, trace), accepted in zip(corpus, outcomes):
        failed_at = None
        if not accepted and dfa_automaton is not None:
            failed_at = first_failure_position(dfa_automaton, trace)
        verdicts.append(Verdict(trace_id=ident, accepted=accepted, failed_at=failed_at))
        if accepted:
            kept.append((ident, trace))
    elapsed = time.perf_counter() - started
    report = FilterReport(
        total=len(corpus),
        accepted=len(kept),
        rejected=len(corpus) - len(kept),
        verdicts=tuple(verdicts),
        wall_time={backend: elapsed},
    )
    return TraceCorpus(tuple(kept)), report
