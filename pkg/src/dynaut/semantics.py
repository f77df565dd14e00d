"""Definition-level evaluation of dynamic formulas over finite traces.

This is the deliberately naive reference oracle: positions 0..n-1 of a
nonempty trace are evaluated directly against the satisfaction clauses,
and path expressions are turned into explicit reachability relations over
positions 0..n (a step from position i consumes letter i).  A modality is
only satisfied by landings strictly inside the trace, so ``<true> tt`` is
false at the final position while ``[true] ff`` is true exactly there.

Every automaton construction in this package is validated against this
module.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Iterator

from .formula import (
    ATOM_PATTERN,
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
    TT,
    Test,
    desugar,
    nnf,
    render,
)

Letter = frozenset[str]
Trace = tuple[Letter, ...]


def make_trace(letters: Iterable[Iterable[str]]) -> Trace:
    """Build a trace (nonempty tuple of atom-set letters) with validation."""
    trace = tuple(frozenset(letter) for letter in letters)
    if not trace:
        raise ValueError("traces must contain at least one letter")
    for letter in trace:
        for atom in letter:
            if not isinstance(atom, str) or not ATOM_PATTERN.fullmatch(atom):
                raise ValueError(f"invalid atom in letter: {atom!r}")
    return trace


def eval_formula(f: Formula, t: Trace, i: int) -> bool:
    """Satisfaction of a core-form formula at position ``i`` of ``t``."""
    if not 0 <= i < len(t):
        raise ValueError(f"position {i} outside trace of length {len(t)}")
    return _eval(f, t, i)


def _eval(f: Formula, t: Trace, i: int) -> bool:
    # Internally positions run up to len(t): the "end" position reached by
    # path relations, where atoms are false and diamonds cannot land.
    if isinstance(f, Atom):
        return i < len(t) and f.name in t[i]
    if isinstance(f, TT):
        return True
    if isinstance(f, FF):
        return False
    if isinstance(f, Not):
        return not _eval(f.arg, t, i)
    if isinstance(f, And):
        return _eval(f.left, t, i) and _eval(f.right, t, i)
    if isinstance(f, Or):
        return _eval(f.left, t, i) or _eval(f.right, t, i)
    if isinstance(f, Diamond):
        n = len(t)
        rel = _relation(f.path, t)
        return any(j < n and _eval(f.arg, t, j) for k, j in rel if k == i)
    if isinstance(f, Box):
        n = len(t)
        rel = _relation(f.path, t)
        return all(_eval(f.arg, t, j) for k, j in rel if k == i and j < n)
    raise ValueError(f"sugared operator in evaluation; desugar first: {render(f)}")


def path_relation(rho: PathExpression, t: Trace) -> set[tuple[int, int]]:
    """Pairs (i, j) such that ``rho`` can move from position i to j.

    Positions range over 0..len(t); steps consume letters, tests stay in
    place, and stars are the reflexive-transitive closure.
    """
    return set(_relation(rho, t))


@lru_cache(maxsize=65536)
def _relation(rho: PathExpression, t: Trace) -> frozenset[tuple[int, int]]:
    n = len(t)
    if isinstance(rho, Prop):
        return frozenset((i, i + 1) for i in range(n) if letter_satisfies(rho.arg, t[i]))
    if isinstance(rho, Test):
        return frozenset((i, i) for i in range(n + 1) if _eval(rho.arg, t, i))
    if isinstance(rho, Seq):
        return _compose(_relation(rho.left, t), _relation(rho.right, t))
    if isinstance(rho, Alt):
        return _relation(rho.left, t) | _relation(rho.right, t)
    if isinstance(rho, Star):
        base = _relation(rho.arg, t)
        rel = set((i, i) for i in range(n + 1))
        while True:
            grown = rel | _compose(frozenset(rel), base)
            if grown == rel:
                return frozenset(rel)
            rel = grown
    raise TypeError(f"not a path expression: {rho!r}")


def _compose(r1: frozenset[tuple[int, int]], r2: frozenset[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    by_source: dict[int, set[int]] = {}
    for j, k in r2:
        by_source.setdefault(j, set()).add(k)
    return frozenset((i, k) for i, j in r1 for k in by_source.get(j, ()))


def letter_satisfies(psi: Formula, letter: Letter) -> bool:
    """Propositional satisfaction of ``psi`` against a single letter."""
    if isinstance(psi, Atom):
        return psi.name in letter
    if isinstance(psi, TT):
        return True
    if isinstance(psi, FF):
        return False
    if isinstance(psi, Not):
        return not letter_satisfies(psi.arg, letter)
    if isinstance(psi, And):
        return letter_satisfies(psi.left, letter) and letter_satisfies(psi.right, letter)
    if isinstance(psi, Or):
        return letter_satisfies(psi.left, letter) or letter_satisfies(psi.right, letter)
    raise ValueError(f"step condition must be propositional: {render(psi)}")


def accepts_semantics(f: Formula, t: Trace) -> bool:
    """Whether the trace is a model of ``f`` (evaluated at position 0)."""
    if not t:
        raise ValueError("traces must contain at least one letter")
    return _eval(nnf(desugar(f)), t, 0)


def enumerate_traces(atoms: Iterable[str], max_len: int) -> Iterator[Trace]:
    """All traces over the powerset alphabet of ``atoms``, lengths 1..max_len.

    Deterministic order: lengths ascending; letters run through the subsets
    of the sorted atom list in binary-counting order (empty letter first).
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    ordered = sorted(atoms)
    letters = [
        frozenset(a for i, a in enumerate(ordered) if bits >> i & 1)
        for bits in range(1 << len(ordered))
    ]
    for length in range(1, max_len + 1):
        for combo in itertools.product(letters, repeat=length):
            yield combo
