"""Determinization pipeline: alternating -> nondeterministic -> deterministic.

Letters are abstracted to minterms, the truth assignments over the atoms the
automaton actually tests, paired with the end-of-trace flag.  One automaton
therefore serves every horizon; the run, emptiness, and equivalence
algorithms enforce the flag discipline (the flag is true exactly on the
final letter) rather than the automaton shape.

Dealternation tracks obligation sets; the empty obligation set is the
absorbing accepting state.  Determinization is the subset construction and
minimization is Hopcroft partition refinement over the minterm alphabet.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product as iter_product

from .afw import Afw, reachable_states
from .formula import And, FF, Formula, Or, SymbolTable, TT, render
from .semantics import Trace

# moves[state][minterm] is a pair (successors without the flag, with it).
_NfaRow = tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
_DfaRow = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Nfa:
    table: SymbolTable
    tested: tuple[int, ...]
    alphabet: tuple[frozenset[int], ...]
    states: tuple[frozenset[int], ...]
    labels: tuple[Formula, ...]
    initial: int
    accepting: int | None
    moves: tuple[_NfaRow, ...]

    def minterm_index(self, letter_ids: frozenset[int]) -> int:
        return _minterm_index(self.tested, letter_ids)


@dataclass(frozen=True)
class Dfa:
    table: SymbolTable
    tested: tuple[int, ...]
    alphabet: tuple[frozenset[int], ...]
    labels: tuple[Formula, ...]
    initial: int
    accepting: frozenset[int]
    next_state: tuple[_DfaRow, ...]

    @property
    def n_states(self) -> int:
        return len(self.labels)

    def minterm_index(self, letter_ids: frozenset[int]) -> int:
        return _minterm_index(self.tested, letter_ids)


def _minterm_index(tested: tuple[int, ...], letter_ids: frozenset[int]) -> int:
    return sum(1 << i for i, ident in enumerate(tested) if ident in letter_ids)


def _minterm_alphabet(tested: tuple[int, ...]) -> tuple[frozenset[int], ...]:
    return tuple(
        frozenset(ident for i, ident in enumerate(tested) if bits >> i & 1)
        for bits in range(1 << len(tested))
    )


def _conjunction_label(members: list[Formula]) -> Formula:
    if not members:
        return TT()
    ordered = sorted(members, key=render)
    label = ordered[0]
    for g in ordered[1:]:
        label = And(label, g)
    return label


def _disjunction_label(members: list[Formula]) -> Formula:
    if not members:
        return FF()
    ordered = sorted(members, key=render)
    label = ordered[0]
    for g in ordered[1:]:
        label = Or(label, g)
    return label


# ---------------------------------------------------------------------------
# Dealternation


def afw_to_nfa(automaton: Afw) -> Nfa:
    """Track obligation sets to remove universality.

    Every alternative way the alternating automaton can distribute its
    obligations becomes one nondeterministic successor; no dominance pruning
    is applied, so the result is a deterministic artifact of the input alone.
    """
    reach = reachable_states(automaton)
    tested = sorted(
        {ident for q in reach for tr in automaton.delta[q] for ident in tr.pos | tr.neg}
    )
    alphabet = _minterm_alphabet(tuple(tested))

    start = frozenset({automaton.initial})
    states: list[frozenset[int]] = [start]
    index: dict[frozenset[int], int] = {start: 0}
    rows: list[_NfaRow] = []
    queue: deque[frozenset[int]] = deque([start])

    def register(s: frozenset[int]) -> int:
        if s not in index:
            index[s] = len(states)
            states.append(s)
            queue.append(s)
        return index[s]

    while queue:
        obligations = queue.popleft()
        row = []
        for minterm in alphabet:
            per_flag = []
            for is_last in (False, True):
                targets: set[frozenset[int]] = set()
                options = []
                for q in sorted(obligations):
                    enabled = [
                        tr for tr in automaton.delta[q] if tr.enabled(minterm, is_last)
                    ]
                    if not enabled:
                        options = None
                        break
                    options.append(enabled)
                if options is not None:
                    for combo in iter_product(*options):
                        merged: frozenset[int] = frozenset()
                        for choice in combo:
                            merged |= choice.succ
                        targets.add(merged)
                ordered = sorted(targets, key=lambda s: (len(s), sorted(s)))
                per_flag.append(tuple(register(s) for s in ordered))
            row.append((per_flag[0], per_flag[1]))
        rows.append(tuple(row))

    labels = tuple(
        _conjunction_label([automaton.states[q] for q in s]) for s in states
    )
    return Nfa(
        table=automaton.table,
        tested=tuple(tested),
        alphabet=alphabet,
        states=tuple(states),
        labels=labels,
        initial=0,
        accepting=index.get(frozenset()),
        moves=tuple(rows),
    )


def nfa_accepts(automaton: Nfa, t: Trace) -> bool:
    if not t:
        raise ValueError("traces must contain at least one letter")
    if automaton.accepting is None:
        return False
    current = {automaton.initial}
    n = len(t)
    for i, letter in enumerate(t):
        minterm = automaton.minterm_index(automaton.table.letter_ids(letter))
        flag = 1 if i == n - 1 else 0
        current = {s for q in current for s in automaton.moves[q][minterm][flag]}
        if not current:
            return False
    return automaton.accepting in current


# ---------------------------------------------------------------------------
# Subset construction


def nfa_to_dfa(automaton: Nfa) -> Dfa:
    """Classic subset construction over the minterm alphabet.

    The result is total: missing moves lead to the empty subset, a rejecting
    sink.  A deterministic state accepts when it contains the discharged
    obligation state of the input.
    """
    start = frozenset({automaton.initial})
    subsets: list[frozenset[int]] = [start]
    index: dict[frozenset[int], int] = {start: 0}
    rows: list[_DfaRow] = []
    queue: deque[frozenset[int]] = deque([start])

    def register(s: frozenset[int]) -> int:
        if s not in index:
            index[s] = len(subsets)
            subsets.append(s)
            queue.append(s)
        return index[s]

    n_minterms = len(automaton.alphabet)
    while queue:
        subset = queue.popleft()
        row = []
        for m in range(n_minterms):
            targets = []
            for flag in (0, 1):
                merged = frozenset(
                    s for q in sorted(subset) for s in automaton.moves[q][m][flag]
                )
                targets.append(register(merged))
            row.append((targets[0], targets[1]))
        rows.append(tuple(row))

    accepting = frozenset(
        i for i, s in enumerate(subsets)
        if automaton.accepting is not None and automaton.accepting in s
    )
    labels = tuple(
        _disjunction_label([automaton.labels[q] for q in s]) for s in subsets
    )
    return Dfa(
        table=automaton.table,
        tested=automaton.tested,
        alphabet=automaton.alphabet,
        labels=labels,
        initial=0,
        accepting=accepting,
        next_state=tuple(rows),
    )


def dfa_accepts(automaton: Dfa, t: Trace) -> bool:
    """Run the letters (flag on the final one); accept in an accepting state."""
    if not t:
        raise ValueError("traces must contain at least one letter")
    current = automaton.initial
    n = len(t)
    for i, letter in enumerate(t):
        minterm = automaton.minterm_index(automaton.table.letter_ids(letter))
        flag = 1 if i == n - 1 else 0
        current = automaton.next_state[current][minterm][flag]
    return current in automaton.accepting


# ---------------------------------------------------------------------------
# Minimization


def minimize(automaton: Dfa) -> Dfa:
    """Language-preserving minimization by Hopcroft partition refinement."""
    reach = _dfa_reachable(automaton)
    remap = {old: new for new, old in enumerate(reach)}
    n = len(reach)
    n_minterms = len(automaton.alphabet)
    symbols = [(m, flag) for m in range(n_minterms) for flag in (0, 1)]
    delta = [
        [remap[automaton.next_state[old][m][flag]] for (m, flag) in symbols]
        for old in reach
    ]
    accepting = {remap[old] for old in reach if old in automaton.accepting}

    partition = _hopcroft(n, len(symbols), delta, accepting)

    block_of = [0] * n
    for b, block in enumerate(partition):
        for s in block:
            block_of[s] = b

    # Renumber blocks by breadth-first discovery from the initial block so
    # repeated minimization yields an identical automaton.
    representative = [min(block) for block in partition]
    order: list[int] = [block_of[0]]
    queue = deque(order)
    while queue:
        b = queue.popleft()
        rep = representative[b]
        for c in range(len(symbols)):
            nb = block_of[delta[rep][c]]
            if nb not in order:
                order.append(nb)
                queue.append(nb)
    new_index = {b: i for i, b in enumerate(order)}

    rows: list[_DfaRow] = []
    labels: list[Formula] = []
    for b in order:
        rep = representative[b]
        row = []
        for m in range(n_minterms):
            row.append(
                (
                    new_index[block_of[delta[rep][2 * m]]],
                    new_index[block_of[delta[rep][2 * m + 1]]],
                )
            )
        rows.append(tuple(row))
        labels.append(automaton.labels[reach[rep]])
    new_accepting = frozenset(
        new_index[b] for b in order if representative[b] in accepting
    )
    return Dfa(
        table=automaton.table,
        tested=automaton.tested,
        alphabet=automaton.alphabet,
        labels=tuple(labels),
        initial=0,
        accepting=new_accepting,
        next_state=tuple(rows),
    )


def _dfa_reachable(automaton: Dfa) -> list[int]:
    seen = [automaton.initial]
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for pair in automaton.next_state[q]:
            for s in pair:
                if s not in seen:
                    seen.append(s)
                    queue.append(s)
    return seen


def _hopcroft(
    n: int, n_symbols: int, delta: list[list[int]], accepting: set[int]
) -> list[set[int]]:
    non_accepting = set(range(n)) - accepting
    partition = [s for s in (set(accepting), non_accepting) if s]
    worklist = [s.copy() for s in partition]

    preimage: list[list[set[int]]] = [[set() for _ in range(n_symbols)] for _ in range(n)]
    for s in range(n):
        for c in range(n_symbols):
            preimage[delta[s][c]][c].add(s)

    while worklist:
        splitter = worklist.pop()
        for c in range(n_symbols):
            x = set()
            for t in splitter:
                x |= preimage[t][c]
            if not x:
                continue
            next_partition = []
            for block in partition:
                inside = block & x
                outside = block - x
                if inside and outside:
                    next_partition.append(inside)
                    next_partition.append(outside)
                    if block in worklist:
                        worklist.remove(block)
                        worklist.append(inside)
                        worklist.append(outside)
                    else:
                        worklist.append(inside if len(inside) <= len(outside) else outside)
                else:
                    next_partition.append(block)
            partition = next_partition
    return partition


# ---------------------------------------------------------------------------
# Decision procedures


def is_empty(automaton: Dfa) -> bool:
    """Whether no well-formed word (flag exactly on the final letter) is accepted."""
    n_minterms = len(automaton.alphabet)
    productive = {
        s
        for s in range(automaton.n_states)
        if any(automaton.next_state[s][m][1] in automaton.accepting for m in range(n_minterms))
    }
    changed = True
    while changed:
        changed = False
        for s in range(automaton.n_states):
            if s in productive:
                continue
            if any(automaton.next_state[s][m][0] in productive for m in range(n_minterms)):
                productive.add(s)
                changed = True
    return automaton.initial not in productive


def shortest_witness(automaton: Dfa) -> Trace | None:
    """A minimum-length accepted trace, or None when the language is empty.

    Letters are materialized from minterms: the positive atoms are present
    and every other atom absent.  Breadth-first search makes the result
    deterministic and minimal.
    """
    n_minterms = len(automaton.alphabet)

    def letter_for(minterm: int) -> frozenset[str]:
        return frozenset(
            automaton.table.name_of(ident) for ident in automaton.alphabet[minterm]
        )

    def closing_move(state: int) -> int | None:
        for m in range(n_minterms):
            if automaton.next_state[state][m][1] in automaton.accepting:
                return m
        return None

    parents: dict[int, tuple[int, int] | None] = {automaton.initial: None}
    queue = deque([automaton.initial])
    while queue:
        state = queue.popleft()
        final = closing_move(state)
        if final is not None:
            letters = [letter_for(final)]
            at = state
            while parents[at] is not None:
                prev, minterm = parents[at]  # type: ignore[misc]
                letters.append(letter_for(minterm))
                at = prev
            letters.reverse()
            return tuple(letters)
        for m in range(n_minterms):
            target = automaton.next_state[state][m][0]
            if target not in parents:
                parents[target] = (state, m)
                queue.append(target)
    return None


def equivalent(left: Dfa, right: Dfa) -> tuple[bool, Trace | None]:
    """Language equality over well-formed words, with a shortest counterexample.

    The two automata may come from different symbol tables; letters are
    compared by atom name over the union of the tested atoms.
    """
    left_names = tuple(left.table.name_of(i) for i in left.tested)
    right_names = tuple(right.table.name_of(i) for i in right.tested)
    union_names = sorted(set(left_names) | set(right_names))
    letters = [
        frozenset(a for i, a in enumerate(union_names) if bits >> i & 1)
        for bits in range(1 << len(union_names))
    ]

    def minterm_pair(letter: frozenset[str]) -> tuple[int, int]:
        return (
            left.minterm_index(left.table.letter_ids(letter)),
            right.minterm_index(right.table.letter_ids(letter)),
        )

    start = (left.initial, right.initial)
    parents: dict[tuple[int, int], tuple[tuple[int, int], frozenset[str]] | None] = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        s1, s2 = pair
        for letter in letters:
            m1, m2 = minterm_pair(letter)
            a1 = left.next_state[s1][m1][1] in left.accepting
            a2 = right.next_state[s2][m2][1] in right.accepting
            if a1 != a2:
                trail = [letter]
                at = pair
                while parents[at] is not None:
                    prev, used = parents[at]  # type: ignore[misc]
                    trail.append(used)
                    at = prev
                trail.reverse()
                return False, tuple(trail)
        for letter in letters:
            m1, m2 = minterm_pair(letter)
            target = (left.next_state[s1][m1][0], right.next_state[s2][m2][0])
            if target not in parents:
                parents[target] = (pair, letter)
                queue.append(target)
    return True, None


def compile_dfa(f: Formula, minimized: bool = True) -> Dfa:
    """Formula straight to a (by default minimal) deterministic automaton."""
    from .afw import compile_afw

    dfa = nfa_to_dfa(afw_to_nfa(compile_afw(f)))
    return minimize(dfa) if minimized else dfa
