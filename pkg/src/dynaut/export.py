"""Serialization of automata: logic-program facts, GraphViz, and MSO programs.

Every automaton is first projected onto :class:`AutomatonView`, a uniform
read-only shape (symbol table, labeled states, initial state, literal-
conditioned transitions with universal successor sets).  Acceptance is
carried by discharge transitions (empty successor set), so one fact schema
serves alternating, nondeterministic, and deterministic automata alike.

The fact format, one fact per line:

    prop(Id,Name).                  symbol table, Id from 1
    state(Id,"Label").              states with their formula text, Id from 0
    initial_state(Id).
    delta(State,Trans).             a transition choice of a state
    delta(State,Trans,pos,PropId).  literal conditions on the letter
    delta(State,Trans,neg,PropId).
    delta(State,Trans,pos,last).    end-of-trace flag conditions
    delta(State,Trans,neg,last).
    delta(State,Trans,succ,State).  universal successor set

``%`` comments are permitted on ingestion.  The MSO emitter produces a MONA
program per formula; MONA's GraphViz automaton export can be ingested back
for cross-validation.  All MONA paths are optional: the binary is located
via an explicit path, the ``DYNAUT_MONA`` environment variable, or PATH.
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass

from .afw import (
    Afw,
    LAST_ANY,
    LAST_FORBIDDEN,
    LAST_REQUIRED,
    LastCond,
    Transition,
)
from .formula import (
    Alt,
    And,
    Atom,
    Box,
    Diamond,
    FF,
    Formula,
    FormulaSyntaxError,
    Not,
    Or,
    PathExpression,
    Prop,
    Seq,
    Star,
    SymbolTable,
    TT,
    Test,
    normalize,
    parse_formula,
    render,
)
from .fsa import Dfa, Nfa


class AspFactError(ValueError):
    """Malformed or inconsistent automaton fact text."""


class MonaDotError(ValueError):
    """Unrecognized MONA GraphViz output."""


class MonaError(RuntimeError):
    """The external MONA tool failed or is unusable."""


# ---------------------------------------------------------------------------
# Uniform projection


@dataclass(frozen=True)
class ViewTransition:
    source: int
    index: int
    pos: tuple[int, ...]
    neg: tuple[int, ...]
    last: LastCond
    succ: tuple[int, ...]


@dataclass(frozen=True)
class AutomatonView:
    table: SymbolTable
    states: tuple[tuple[int, str], ...]
    initial: int
    transitions: tuple[ViewTransition, ...]


def automaton_view(automaton: Afw | Nfa | Dfa) -> AutomatonView:
    if isinstance(automaton, Afw):
        return view_afw(automaton)
    if isinstance(automaton, Nfa):
        return view_nfa(automaton)
    if isinstance(automaton, Dfa):
        return view_dfa(automaton)
    raise TypeError(f"not an automaton: {automaton!r}")


def view_afw(automaton: Afw) -> AutomatonView:
    transitions = []
    for source, row in enumerate(automaton.delta):
        for index, tr in enumerate(row):
            transitions.append(
                ViewTransition(
                    source=source,
                    index=index,
                    pos=tuple(sorted(tr.pos)),
                    neg=tuple(sorted(tr.neg)),
                    last=tr.last,
                    succ=tuple(sorted(tr.succ)),
                )
            )
    return AutomatonView(
        table=automaton.table,
        states=tuple((i, render(f)) for i, f in enumerate(automaton.states)),
        initial=automaton.initial,
        transitions=tuple(transitions),
    )


def view_nfa(automaton: Nfa) -> AutomatonView:
    transitions = []
    tested = set(automaton.tested)
    for source in range(len(automaton.states)):
        index = 0
        for m, minterm in enumerate(automaton.alphabet):
            pos = tuple(sorted(minterm))
            neg = tuple(sorted(tested - minterm))
            for target in automaton.moves[source][m][0]:
                transitions.append(
                    ViewTransition(source, index, pos, neg, LAST_FORBIDDEN, (target,))
                )
                index += 1
            if automaton.accepting in automaton.moves[source][m][1]:
                transitions.append(
                    ViewTransition(source, index, pos, neg, LAST_REQUIRED, ())
                )
                index += 1
    return AutomatonView(
        table=automaton.table,
        states=tuple((i, render(f)) for i, f in enumerate(automaton.labels)),
        initial=automaton.initial,
        transitions=tuple(transitions),
    )


def view_dfa(automaton: Dfa) -> AutomatonView:
    transitions = []
    tested = set(automaton.tested)
    for source in range(automaton.n_states):
        index = 0
        for m, minterm in enumerate(automaton.alphabet):
            pos = tuple(sorted(minterm))
            neg = tuple(sorted(tested - minterm))
            transitions.append(
                ViewTransition(
                    source, index, pos, neg, LAST_FORBIDDEN,
                    (automaton.next_state[source][m][0],),
                )
            )
            index += 1
            if automaton.next_state[source][m][1] in automaton.accepting:
                transitions.append(
                    ViewTransition(source, index, pos, neg, LAST_REQUIRED, ())
                )
                index += 1
    return AutomatonView(
        table=automaton.table,
        states=tuple((i, render(f)) for i, f in enumerate(automaton.labels)),
        initial=automaton.initial,
        transitions=tuple(transitions),
    )


# ---------------------------------------------------------------------------
# Logic-program facts


def emit_asp_facts(view: AutomatonView) -> str:
    """Deterministic fact text for the view, one fact per line."""
    lines: list[str] = []
    for i, name in enumerate(view.table.names):
        lines.append(f"prop({i + 1},{name}).")
    for ident, label in view.states:
        lines.append(f'state({ident},"{label}").')
    lines.append(f"initial_state({view.initial}).")
    for tr in view.transitions:
        head = f"delta({tr.source},{tr.index}"
        lines.append(head + ").")
        for ident in tr.pos:
            lines.append(head + f",pos,{ident}).")
        for ident in tr.neg:
            lines.append(head + f",neg,{ident}).")
        if tr.last == LAST_REQUIRED:
            lines.append(head + ",pos,last).")
        elif tr.last == LAST_FORBIDDEN:
            lines.append(head + ",neg,last).")
        for ident in tr.succ:
            lines.append(head + f",succ,{ident}).")
    return "\n".join(lines) + "\n"


_PROP_FACT = re.compile(r"prop\((\d+),([a-z][a-zA-Z0-9_]*)\)\.")
_STATE_FACT = re.compile(r'state\((\d+),"([^"]*)"\)\.')
_INITIAL_FACT = re.compile(r"initial_state\((\d+)\)\.")
_DELTA2_FACT = re.compile(r"delta\((\d+),(\d+)\)\.")
_DELTA4_FACT = re.compile(r"delta\((\d+),(\d+),(pos|neg|succ),(\d+|last)\)\.")


def parse_asp_facts(text: str) -> Afw:
    """Rebuild an alternating automaton from fact text.

    Inverse of :func:`emit_asp_facts` up to the canonical ordering: a parsed
    automaton re-emits byte-identically.  Raises :class:`AspFactError` on
    malformed facts, dangling state or proposition references, or a
    duplicate/missing initial state.
    """
    props: dict[int, str] = {}
    state_labels: dict[int, str] = {}
    initial: int | None = None
    declared: dict[int, list[int]] = {}
    conditions: dict[tuple[int, int], dict[str, object]] = {}

    def fail(lineno: int, message: str) -> AspFactError:
        return AspFactError(f"line {lineno}: {message}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if m := _PROP_FACT.fullmatch(line):
            ident, name = int(m.group(1)), m.group(2)
            if ident in props:
                raise fail(lineno, f"duplicate prop id {ident}")
            props[ident] = name
        elif m := _STATE_FACT.fullmatch(line):
            ident, label = int(m.group(1)), m.group(2)
            if ident in state_labels:
                raise fail(lineno, f"duplicate state id {ident}")
            state_labels[ident] = label
        elif m := _INITIAL_FACT.fullmatch(line):
            if initial is not None:
                raise fail(lineno, "duplicate initial_state fact")
            initial = int(m.group(1))
        elif m := _DELTA2_FACT.fullmatch(line):
            state, tid = int(m.group(1)), int(m.group(2))
            declared.setdefault(state, [])
            if tid not in declared[state]:
                declared[state].append(tid)
        elif m := _DELTA4_FACT.fullmatch(line):
            state, tid, role, arg = int(m.group(1)), int(m.group(2)), m.group(3), m.group(4)
            entry = conditions.setdefault(
                (state, tid), {"pos": set(), "neg": set(), "succ": set(), "last": LAST_ANY}
            )
            if arg == "last":
                if role == "succ":
                    raise fail(lineno, "last cannot be a successor")
                wanted = LAST_REQUIRED if role == "pos" else LAST_FORBIDDEN
                if entry["last"] not in (LAST_ANY, wanted):
                    raise fail(lineno, "contradictory last conditions")
                entry["last"] = wanted
            else:
                entry[role].add(int(arg))  # type: ignore[union-attr]
        else:
            raise fail(lineno, f"malformed fact: {line}")

    if sorted(props) != list(range(1, len(props) + 1)):
        raise AspFactError("prop identifiers must be contiguous from 1")
    table = SymbolTable(tuple(props[i] for i in sorted(props)))
    if sorted(state_labels) != list(range(len(state_labels))):
        raise AspFactError("state identifiers must be contiguous from 0")
    if initial is None:
        raise AspFactError("missing initial_state fact")
    if initial not in state_labels:
        raise AspFactError(f"initial state {initial} is not declared")

    states: list[Formula] = []
    for ident in sorted(state_labels):
        try:
            states.append(parse_formula(state_labels[ident]))
        except FormulaSyntaxError as err:
            raise AspFactError(f"state {ident}: unparsable label: {err}") from err

    n_states = len(states)
    for (state, tid) in conditions:
        if state not in declared or tid not in declared[state]:
            raise AspFactError(f"conditions for undeclared transition delta({state},{tid})")
    rows: list[tuple[Transition, ...]] = []
    for state in range(n_states):
        row = []
        for tid in sorted(declared.get(state, [])):
            entry = conditions.get(
                (state, tid), {"pos": set(), "neg": set(), "succ": set(), "last": LAST_ANY}
            )
            for ident in entry["pos"] | entry["neg"]:  # type: ignore[operator]
                if not 1 <= ident <= len(table):
                    raise AspFactError(f"delta({state},{tid}): unknown prop id {ident}")
            for ident in entry["succ"]:  # type: ignore[union-attr]
                if not 0 <= ident < n_states:
                    raise AspFactError(f"delta({state},{tid}): unknown successor state {ident}")
            row.append(
                Transition(
                    pos=frozenset(entry["pos"]),  # type: ignore[arg-type]
                    neg=frozenset(entry["neg"]),  # type: ignore[arg-type]
                    last=entry["last"],  # type: ignore[arg-type]
                    succ=frozenset(entry["succ"]),  # type: ignore[arg-type]
                )
            )
        rows.append(tuple(row))
    for state in declared:
        if not 0 <= state < n_states:
            raise AspFactError(f"transition from undeclared state {state}")
    return Afw(table=table, states=tuple(states), initial=initial, delta=tuple(rows))


# ---------------------------------------------------------------------------
# GraphViz


def _condition_label(view: AutomatonView, tr: ViewTransition) -> str:
    parts = [view.table.name_of(i) for i in tr.pos]
    parts += ["~" + view.table.name_of(i) for i in tr.neg]
    if tr.last == LAST_REQUIRED:
        parts.append("last")
    elif tr.last == LAST_FORBIDDEN:
        parts.append("~last")
    return " & ".join(parts) if parts else "true"


def emit_dot(view: AutomatonView) -> str:
    """GraphViz digraph; universal successor sets fan out of a point node."""

    def quote(text: str) -> str:
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = ["digraph automaton {", "  rankdir=LR;", '  init [shape=none, label=""];']
    for ident, label in view.states:
        lines.append(f"  s{ident} [shape=circle, label={quote(label)}];")
    lines.append(f"  init -> s{view.initial};")
    for tr in view.transitions:
        label = quote(_condition_label(view, tr))
        if len(tr.succ) == 1:
            lines.append(f"  s{tr.source} -> s{tr.succ[0]} [label={label}];")
        else:
            junction = f"u{tr.source}_{tr.index}"
            lines.append(f"  {junction} [shape=point];")
            lines.append(f"  s{tr.source} -> {junction} [label={label}];")
            for target in tr.succ:
                lines.append(f"  {junction} -> s{target};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# MSO emission


def _mso_variables(table: SymbolTable) -> dict[str, str]:
    names: dict[str, str] = {}
    used: set[str] = set()
    for i, atom in enumerate(table.names):
        candidate = atom.upper()
        # Avoid clashing with bound variables (v.., S..) or earlier atoms.
        if candidate in used or re.fullmatch(r"[VS]\d+", candidate):
            candidate = f"{candidate}_{i + 1}"
        used.add(candidate)
        names[atom] = candidate
    return names


class _MsoEmitter:
    def __init__(self, variables: dict[str, str]):
        self.variables = variables
        self.fresh_first = 0
        self.fresh_second = 0

    def first(self) -> str:
        self.fresh_first += 1
        return f"v{self.fresh_first}"

    def second(self) -> str:
        self.fresh_second += 1
        return f"S{self.fresh_second}"

    def formula(self, f: Formula, x: str) -> str:
        if isinstance(f, TT):
            return "true"
        if isinstance(f, FF):
            return "false"
        if isinstance(f, Atom):
            return f"({x} in {self.variables[f.name]})"
        if isinstance(f, Not):
            return f"~{self.formula(f.arg, x)}"
        if isinstance(f, And):
            return f"({self.formula(f.left, x)} & {self.formula(f.right, x)})"
        if isinstance(f, Or):
            return f"({self.formula(f.left, x)} | {self.formula(f.right, x)})"
        if isinstance(f, Diamond):
            y = self.first()
            return (
                f"(ex1 {y}: {y} <= max($) & {self.path(f.path, x, y)}"
                f" & {self.formula(f.arg, y)})"
            )
        if isinstance(f, Box):
            y = self.first()
            return (
                f"(all1 {y}: ({y} <= max($) & {self.path(f.path, x, y)})"
                f" => {self.formula(f.arg, y)})"
            )
        raise ValueError(f"core form required: {render(f)}")

    def path(self, rho: PathExpression, x: str, y: str) -> str:
        if isinstance(rho, Prop):
            return f"({y} = {x} + 1 & {self.formula(rho.arg, x)})"
        if isinstance(rho, Test):
            return f"({x} = {y} & {self.formula(rho.arg, x)})"
        if isinstance(rho, Seq):
            z = self.first()
            return f"(ex1 {z}: {self.path(rho.left, x, z)} & {self.path(rho.right, z, y)})"
        if isinstance(rho, Alt):
            return f"({self.path(rho.left, x, y)} | {self.path(rho.right, x, y)})"
        if isinstance(rho, Star):
            # y belongs to every set that contains x and is closed under
            # single path steps.
            closed = self.second()
            u = self.first()
            v = self.first()
            return (
                f"(all2 {closed}: (({x} in {closed})"
                f" & (all1 {u}, {v}: (({u} in {closed}) & {self.path(rho.arg, u, v)})"
                f" => ({v} in {closed})))"
                f" => ({y} in {closed}))"
            )
        raise TypeError(f"not a path expression: {rho!r}")


def emit_mona(f: Formula) -> str:
    """A complete MONA program whose word models are the formula's traces.

    Emitted in ``m2l-str`` mode, where ``max($)`` denotes the final position
    of the word; a nonemptiness guard aligns MONA's possibly-empty words with
    the nonempty-trace convention.  One free second-order variable is
    declared per atom.
    """
    g = normalize(f)
    table = SymbolTable.from_formula(g)
    variables = _mso_variables(table)
    emitter = _MsoEmitter(variables)
    body = emitter.formula(g, "0")
    lines = [f"# {render(f)}", "m2l-str;"]
    if table.names:
        lines.append("var2 " + ", ".join(variables[a] for a in table.names) + ";")
    lines.append(f"(0 <= max($)) & {body};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# MONA ingestion


_DOT_EDGE = re.compile(r"^\s*(\w+)\s*->\s*(\w+)\s*(?:\[label=\"([^\"]*)\"\])?\s*;?\s*$")
_DOT_SHAPE = re.compile(r"^\s*node\s*\[shape\s*=\s*(\w+)\s*\]\s*;(.*)$")


def parse_mona_dot(text: str, table: SymbolTable) -> Dfa:
    """Deterministic automaton from MONA's GraphViz export.

    Track order must match the symbol table (the ``emit_mona`` variable
    ordering); ``X`` don't-care bits are expanded.  MONA automata read one
    leading don't-care letter before the word proper, so the initial
    state's single all-don't-care edge is skipped when present.
    """
    accepting_raw: set[str] = set()
    edges: list[tuple[str, str, str]] = []
    init_target: str | None = None
    n_vars = len(table)

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("digraph", "}", "rankdir", "center", "size", "edge", "init [")):
            continue
        if m := _DOT_SHAPE.match(line):
            if m.group(1) == "doublecircle":
                accepting_raw.update(re.findall(r"(\w+)\s*;", m.group(2)))
            continue
        if m := _DOT_EDGE.match(line):
            source, target, label = m.group(1), m.group(2), m.group(3)
            if source == "init":
                if init_target is not None:
                    raise MonaDotError("multiple init arrows")
                init_target = target
            else:
                edges.append((source, target, label or ""))
            continue
        if re.fullmatch(r"node\s*\[.*\];?", line):
            continue
        raise MonaDotError(f"unrecognized line: {line}")

    if init_target is None:
        raise MonaDotError("missing init arrow")

    def bits_of(label: str) -> str:
        bits = label.split("\\n") if label else []
        if bits == [""]:
            bits = []
        if len(bits) != n_vars:
            raise MonaDotError(
                f"variable count mismatch: label {label!r} has {len(bits)} tracks, expected {n_vars}"
            )
        for b in bits:
            if b not in ("0", "1", "X"):
                raise MonaDotError(f"bad track value {b!r} in label {label!r}")
        return "".join(bits)

    # Skip MONA's leading don't-care step.
    initial = init_target
    leading = [e for e in edges if e[0] == init_target]
    incoming = [e for e in edges if e[1] == init_target]
    if len(leading) == 1 and not incoming and set(bits_of(leading[0][2])) <= {"X"}:
        initial = leading[0][1]
        edges = [e for e in edges if e[0] != init_target]

    names = sorted({s for s, _, _ in edges} | {t for _, t, _ in edges} | {initial})
    names.remove(initial)
    names.insert(0, initial)
    index = {name: i for i, name in enumerate(names)}

    n_minterms = 1 << n_vars
    target_of: list[list[int | None]] = [[None] * n_minterms for _ in names]
    for source, target, label in edges:
        bits = bits_of(label)
        free = [i for i, b in enumerate(bits) if b == "X"]
        base = sum(1 << i for i, b in enumerate(bits) if b == "1")
        for mask in range(1 << len(free)):
            minterm = base
            for j, i in enumerate(free):
                if mask >> j & 1:
                    minterm |= 1 << i
            if target_of[index[source]][minterm] is not None:
                raise MonaDotError(f"nondeterministic transition from {source}")
            target_of[index[source]][minterm] = index[target]

    for state, row in enumerate(target_of):
        for minterm, target in enumerate(row):
            if target is None:
                raise MonaDotError(f"missing transition from {names[state]} on minterm {minterm}")

    tested = tuple(range(1, n_vars + 1))
    alphabet = tuple(
        frozenset(i + 1 for i in range(n_vars) if bits >> i & 1) for bits in range(n_minterms)
    )
    rows = tuple(
        tuple((row[m], row[m]) for m in range(n_minterms)) for row in target_of  # type: ignore[misc]
    )
    accepting = frozenset(index[name] for name in accepting_raw if name in index)
    labels = tuple(Atom(f"q{i}") for i in range(len(names)))
    return Dfa(
        table=table,
        tested=tested,
        alphabet=alphabet,
        labels=labels,
        initial=0,
        accepting=accepting,
        next_state=rows,
    )


# ---------------------------------------------------------------------------
# MONA invocation (optional)


def find_mona(explicit: str | None = None) -> str | None:
    """Locate the MONA binary: explicit path, then DYNAUT_MONA, then PATH."""
    for candidate in (explicit, os.environ.get("DYNAUT_MONA")):
        if candidate:
            found = shutil.which(candidate) or (candidate if os.access(candidate, os.X_OK) else None)
            if found:
                return found
    return shutil.which("mona")


def mona_dfa(f: Formula, binary: str | None = None) -> Dfa:
    """Compile a formula through MONA and ingest the resulting automaton."""
    mona = find_mona(binary)
    if mona is None:
        raise MonaError("MONA binary not found (set DYNAUT_MONA or pass a path)")
    g = normalize(f)
    table = SymbolTable.from_formula(g)
    program = emit_mona(f)
    with tempfile.NamedTemporaryFile("w", suffix=".mona", delete=False) as handle:
        handle.write(program)
        path = handle.name
    try:
        result = subprocess.run(
            [mona, "-q", "-gw", path], capture_output=True, text=True, timeout=120
        )
    except (OSError, subprocess.TimeoutExpired) as err:
        raise MonaError(f"failed to run MONA: {err}") from err
    finally:
        os.unlink(path)
    if result.returncode != 0:
        raise MonaError(f"MONA exited with {result.returncode}: {result.stderr.strip()}")
    return parse_mona_dot(result.stdout, table)
