"""Compilation of dynamic formulas into alternating finite automata.

States are the normalized formula's unfolding members; each state carries a
list of transition choices in disjunctive normal form.  A transition is a
set of positive/negative atom conditions, an end-of-trace flag condition,
and a universal (conjunctive) successor set.  A transition with an empty
successor set discharges its state's obligation on the letter it reads,
which is how acceptance is encoded.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Literal

from .formula import (
    Alt,
    And,
    Atom,
    Box,
    Diamond,
    FF,
    Formula,
    Not,
    Or,
    PathExpression,
    Prop,
    Seq,
    Star,
    SymbolTable,
    TT,
    Test,
    _nnf_neg,
    normalize,
)
from .semantics import Trace

LastCond = Literal["required", "forbidden", "unconstrained"]
LAST_REQUIRED: LastCond = "required"
LAST_FORBIDDEN: LastCond = "forbidden"
LAST_ANY: LastCond = "unconstrained"


@dataclass(frozen=True)
class Transition:
    """One disjunctive choice out of a state.

    ``pos``/``neg`` hold symbol-table identifiers that must be present or
    absent in the letter; ``last`` constrains the end-of-trace flag; ``succ``
    is the universal successor set (empty = obligation discharged).
    """

    pos: frozenset[int] = frozenset()
    neg: frozenset[int] = frozenset()
    last: LastCond = LAST_ANY
    succ: frozenset[int] = frozenset()

    def enabled(self, letter_ids: frozenset[int], is_last: bool) -> bool:
        if self.last == LAST_REQUIRED and not is_last:
            return False
        if self.last == LAST_FORBIDDEN and is_last:
            return False
        return self.pos <= letter_ids and not (self.neg & letter_ids)


@dataclass(frozen=True)
class Stats:
    states: int
    transitions: int
    max_successors: int
    alphabet: int


@dataclass(frozen=True)
class Afw:
    """Alternating automaton; immutable and shareable after construction."""

    table: SymbolTable
    states: tuple[Formula, ...]
    initial: int
    delta: tuple[tuple[Transition, ...], ...]


# ---------------------------------------------------------------------------
# Construction

# Raw transitions carry atom names and ordered successor formulas until the
# state space is fixed.
_RawTransition = tuple[frozenset[str], frozenset[str], LastCond, tuple[Formula, ...]]

_DISCHARGE: list[_RawTransition] = [(frozenset(), frozenset(), LAST_ANY, ())]


def compile_afw(f: Formula) -> Afw:
    """Translate a formula into an alternating automaton over its atoms.

    The input is desugared and normalized internally; the construction is
    horizon independent (no trace length is involved) and the reachable
    states are a subset of the formula's closure.
    """
    root = normalize(f)
    table = SymbolTable.from_formula(root)

    states: list[Formula] = [root]
    index: dict[Formula, int] = {root: 0}
    rows: list[tuple[Transition, ...]] = []
    queue: deque[int] = deque([0])
    expanded = 0
    while queue:
        state = queue.popleft()
        raw = _prune(_delta(states[state], frozenset()))
        row = []
        for pos, neg, last, succ in raw:
            ids = []
            for g in succ:
                if g not in index:
                    index[g] = len(states)
                    states.append(g)
                    queue.append(len(states) - 1)
                ids.append(index[g])
            row.append(
                Transition(
                    pos=frozenset(table.id_of(a) for a in pos),
                    neg=frozenset(table.id_of(a) for a in neg),
                    last=last,
                    succ=frozenset(ids),
                )
            )
        rows.append(tuple(row))
        expanded += 1
    assert expanded == len(states)
    return Afw(table=table, states=tuple(states), initial=0, delta=tuple(rows))


def _delta(g: Formula, visiting: frozenset[Formula]) -> list[_RawTransition]:
    if isinstance(g, TT):
        return list(_DISCHARGE)
    if isinstance(g, FF):
        return []
    if isinstance(g, Atom):
        return [(frozenset({g.name}), frozenset(), LAST_ANY, ())]
    if isinstance(g, Not):
        if not isinstance(g.arg, Atom):
            raise ValueError("transition construction requires negation normal form")
        return [(frozenset(), frozenset({g.arg.name}), LAST_ANY, ())]
    if isinstance(g, And):
        return _product(_delta(g.left, visiting), _delta(g.right, visiting))
    if isinstance(g, Or):
        return _delta(g.left, visiting) + _delta(g.right, visiting)
    if isinstance(g, Diamond):
        return _delta_diamond(g, visiting)
    if isinstance(g, Box):
        return _delta_box(g, visiting)
    raise ValueError("transition construction requires core form; desugar first")


def _delta_diamond(g: Diamond, visiting: frozenset[Formula]) -> list[_RawTransition]:
    rho, phi = g.path, g.arg
    if isinstance(rho, Prop):
        return [(pos, neg, LAST_FORBIDDEN, (phi,)) for pos, neg in _dnf(rho.arg)]
    if isinstance(rho, Test):
        return _product(_delta(rho.arg, visiting), _delta(phi, visiting))
    if isinstance(rho, Seq):
        return _delta(Diamond(rho.left, Diamond(rho.right, phi)), visiting)
    if isinstance(rho, Alt):
        return _delta(Diamond(rho.left, phi), visiting) + _delta(Diamond(rho.right, phi), visiting)
    # Star: unfolding may re-enter through tests alone, which must fail for
    # a diamond (no progress is made), hence the visiting guard.
    if g in visiting:
        return []
    inner = visiting | {g}
    return _delta(phi, inner) + _delta(Diamond(rho.arg, g), inner)


def _delta_box(g: Box, visiting: frozenset[Formula]) -> list[_RawTransition]:
    rho, phi = g.path, g.arg
    if isinstance(rho, Prop):
        choices: list[_RawTransition] = [
            (pos, neg, LAST_ANY, ()) for pos, neg in _dnf(_nnf_neg(rho.arg))
        ]
        for pos, neg in _dnf(rho.arg):
            choices.append((pos, neg, LAST_REQUIRED, ()))
            choices.append((pos, neg, LAST_FORBIDDEN, (phi,)))
        return choices
    if isinstance(rho, Test):
        return _delta(_nnf_neg(rho.arg), visiting) + _delta(phi, visiting)
    if isinstance(rho, Seq):
        return _delta(Box(rho.left, Box(rho.right, phi)), visiting)
    if isinstance(rho, Alt):
        return _product(_delta(Box(rho.left, phi), visiting), _delta(Box(rho.right, phi), visiting))
    # Star re-entered through tests alone holds trivially for a box.
    if g in visiting:
        return list(_DISCHARGE)
    inner = visiting | {g}
    return _product(_delta(phi, inner), _delta(Box(rho.arg, g), inner))


def _product(left: list[_RawTransition], right: list[_RawTransition]) -> list[_RawTransition]:
    out: list[_RawTransition] = []
    for pos1, neg1, last1, succ1 in left:
        for pos2, neg2, last2, succ2 in right:
            pos = pos1 | pos2
            neg = neg1 | neg2
            if pos & neg:
                continue
            if {last1, last2} == {LAST_REQUIRED, LAST_FORBIDDEN}:
                continue
            last = last1 if last2 == LAST_ANY else last2
            succ = succ1 + tuple(s for s in succ2 if s not in succ1)
            out.append((pos, neg, last, succ))
    return out


def _dnf(psi: Formula) -> list[tuple[frozenset[str], frozenset[str]]]:
    """Disjunctive normal form of a propositional NNF formula, as literal sets."""
    if isinstance(psi, TT):
        return [(frozenset(), frozenset())]
    if isinstance(psi, FF):
        return []
    if isinstance(psi, Atom):
        return [(frozenset({psi.name}), frozenset())]
    if isinstance(psi, Not):
        if not isinstance(psi.arg, Atom):
            raise ValueError("step conditions must be in negation normal form")
        return [(frozenset(), frozenset({psi.arg.name}))]
    if isinstance(psi, Or):
        return _merge_unique(_dnf(psi.left) + _dnf(psi.right))
    if isinstance(psi, And):
        out = []
        for pos1, neg1 in _dnf(psi.left):
            for pos2, neg2 in _dnf(psi.right):
                pos, neg = pos1 | pos2, neg1 | neg2
                if not pos & neg:
                    out.append((pos, neg))
        return _merge_unique(out)
    raise ValueError("step conditions must be propositional")


def _merge_unique(items: list[tuple[frozenset[str], frozenset[str]]]) -> list[tuple[frozenset[str], frozenset[str]]]:
    seen = set()
    out = []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return out


def _prune(raw: list[_RawTransition]) -> list[_RawTransition]:
    # A successor obligation of ff can never be discharged, and a transition
    # that requires the final letter but still spawns obligations can never
    # contribute to acceptance; both are dropped, as are exact duplicates.
    seen = set()
    out = []
    for pos, neg, last, succ in raw:
        if any(isinstance(s, FF) for s in succ):
            continue
        if last == LAST_REQUIRED and succ:
            continue
        key = (pos, neg, last, succ)
        if key in seen:
            continue
        seen.add(key)
        out.append((pos, neg, last, succ))
    return out


# ---------------------------------------------------------------------------
# Running and measuring


def afw_accepts(automaton: Afw, t: Trace) -> bool:
    """Run the obligation-set semantics over a trace.

    A frontier of alternative obligation sets starts at {initial}; on each
    letter every obligated state picks one enabled transition and the chosen
    successor sets are merged.  The trace is accepted when some alternative
    ends with every obligation discharged.  Atoms unknown to the symbol
    table constrain nothing.
    """
    if not t:
        raise ValueError("traces must contain at least one letter")
    frontier: set[frozenset[int]] = {frozenset({automaton.initial})}
    n = len(t)
    for i, letter in enumerate(t):
        is_last = i == n - 1
        letter_ids = automaton.table.letter_ids(letter)
        successors: set[frozenset[int]] = set()
        for obligations in frontier:
            options = []
            for q in sorted(obligations):
                enabled = [tr for tr in automaton.delta[q] if tr.enabled(letter_ids, is_last)]
                if not enabled:
                    options = None
                    break
                options.append(enabled)
            if options is None:
                continue
            for combo in itertools.product(*options):
                merged: frozenset[int] = frozenset()
                for choice in combo:
                    merged |= choice.succ
                successors.add(merged)
        frontier = _minimal_antichain(successors)
        if not frontier:
            return False
    return frozenset() in frontier


def _minimal_antichain(sets: Iterable[frozenset[int]]) -> set[frozenset[int]]:
    # Fewer obligations are always easier to discharge, so supersets of
    # another alternative are dominated and dropped.
    kept: list[frozenset[int]] = []
    for s in sorted(sets, key=lambda s: (len(s), sorted(s))):
        if not any(r <= s for r in kept):
            kept.append(s)
    return set(kept)


def reachable_states(automaton: Afw) -> list[int]:
    """State indices reachable from the initial state, in BFS order."""
    seen = [automaton.initial]
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for tr in automaton.delta[q]:
            for s in sorted(tr.succ):
                if s not in seen:
                    seen.append(s)
                    queue.append(s)
    return seen


def afw_stats(automaton: Afw) -> Stats:
    """Size measurements over the reachable part of the automaton."""
    reach = reachable_states(automaton)
    transitions = sum(len(automaton.delta[q]) for q in reach)
    max_succ = max(
        (len(tr.succ) for q in reach for tr in automaton.delta[q]),
        default=0,
    )
    return Stats(
        states=len(reach),
        transitions=transitions,
        max_successors=max_succ,
        alphabet=len(automaton.table),
    )
