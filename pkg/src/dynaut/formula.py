"""Formula ASTs for linear dynamic logic over finite traces.

Formulas combine boolean connectives with dynamic modalities ``< rho > f``
(some execution of the path ``rho`` ends in a position satisfying ``f``)
and ``[ rho ] f`` (every execution does).  The familiar finite-trace
temporal operators are available as sugar and compile away via
:func:`desugar`.

Concrete syntax (full table in ``docs/grammar.md``)::

    formula ::= "tt" | "ff" | "true" | "false" | "LAST" | atom
              | "~" formula | formula "&" formula | formula "|" formula
              | formula "U" formula | formula "R" formula
              | "X" formula | "wX" formula | "F" formula | "G" formula
              | "<" path ">" formula | "[" path "]" formula
              | "(" formula ")"
    path    ::= prop-formula | formula "?" | path ";" path | path "+" path
              | path "*" | "(" path ")"

Precedence, tightest first: ``~`` and the unary/modal operators, then
``U``/``R`` (right-associative), then ``&``, then ``|``.  On paths ``*``
binds tighter than ``;``, which binds tighter than ``+``.  Atoms match
``[a-z][a-zA-Z0-9_]*``; ``last`` is reserved for the end-of-trace flag and
is rejected as an atom name.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass


ATOM_PATTERN = re.compile(r"[a-z][a-zA-Z0-9_]*")

# Words that lex like atoms but are part of the syntax.
_WORD_KEYWORDS = {"tt", "ff", "true", "false", "wX", "LAST", "X", "F", "G", "U", "R"}


class FormulaSyntaxError(ValueError):
    """Malformed formula text, with position and the tokens that were expected."""

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += " (expected: " + ", ".join(self.expected) + ")"
        super().__init__(detail)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Formula:
    """Base class for formula nodes."""

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class TT(Formula):
    pass


@dataclass(frozen=True)
class FF(Formula):
    pass


@dataclass(frozen=True)
class Last(Formula):
    """Holds exactly at the final position of a trace (sugar for ``[true]ff``)."""


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    path: "PathExpression"
    arg: Formula


@dataclass(frozen=True)
class Box(Formula):
    path: "PathExpression"
    arg: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class WeakNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class PathExpression:
    """Base class for path (program) nodes inside modalities."""

    def __str__(self) -> str:
        return render_path(self)


@dataclass(frozen=True)
class Prop(PathExpression):
    """A single step whose source letter must satisfy a propositional formula.

    The plain step ``true`` is represented as ``Prop(TT())``.
    """

    arg: Formula


@dataclass(frozen=True)
class Test(PathExpression):
    """Check a formula at the current position without moving."""

    arg: Formula


@dataclass(frozen=True)
class Seq(PathExpression):
    left: PathExpression
    right: PathExpression


@dataclass(frozen=True)
class Alt(PathExpression):
    left: PathExpression
    right: PathExpression


@dataclass(frozen=True)
class Star(PathExpression):
    arg: PathExpression


_SUGAR = (Next, WeakNext, Eventually, Always, Until, Release, Last)


def is_propositional(f: Formula) -> bool:
    """True if ``f`` is a boolean combination of atoms and constants."""
    if isinstance(f, (TT, FF, Atom)):
        return True
    if isinstance(f, Not):
        return is_propositional(f.arg)
    if isinstance(f, (And, Or)):
        return is_propositional(f.left) and is_propositional(f.right)
    return False


def is_core(f: Formula) -> bool:
    """True if ``f`` contains no sugared temporal operators."""
    if isinstance(f, _SUGAR):
        return False
    if isinstance(f, Not):
        return is_core(f.arg)
    if isinstance(f, (And, Or)):
        return is_core(f.left) and is_core(f.right)
    if isinstance(f, (Diamond, Box)):
        return _is_core_path(f.path) and is_core(f.arg)
    return True


def _is_core_path(p: PathExpression) -> bool:
    if isinstance(p, (Prop, Test)):
        return is_core(p.arg)
    if isinstance(p, (Seq, Alt)):
        return _is_core_path(p.left) and _is_core_path(p.right)
    return _is_core_path(p.arg)


# ---------------------------------------------------------------------------
# Symbol table


@dataclass(frozen=True)
class SymbolTable:
    """Bijection between atom names and dense integer identifiers from 1.

    The reserved name ``last`` is a position flag, never an atom, and is
    refused.  Identifiers follow first textual occurrence so that exports
    are deterministic.
    """

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        seen = set()
        for name in self.names:
            if name == "last":
                raise ValueError("'last' is a reserved flag, not an atom")
            if not ATOM_PATTERN.fullmatch(name):
                raise ValueError(f"invalid atom name: {name!r}")
            if name in seen:
                raise ValueError(f"duplicate atom name: {name!r}")
            seen.add(name)
        object.__setattr__(self, "_index", {n: i + 1 for i, n in enumerate(self.names)})

    @classmethod
    def from_formula(cls, f: Formula) -> "SymbolTable":
        names: list[str] = []
        _collect_atoms(f, names)
        return cls(tuple(names))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index  # type: ignore[attr-defined]

    def id_of(self, name: str) -> int:
        return self._index[name]  # type: ignore[attr-defined]

    def name_of(self, ident: int) -> str:
        return self.names[ident - 1]

    def letter_ids(self, letter: frozenset[str]) -> frozenset[int]:
        """Identifiers of the letter's atoms; unknown atoms are dropped."""
        index = self._index  # type: ignore[attr-defined]
        return frozenset(index[a] for a in letter if a in index)


def _collect_atoms(f: Formula, out: list[str]) -> None:
    if isinstance(f, Atom):
        if f.name not in out:
            out.append(f.name)
    elif isinstance(f, (Not, Next, WeakNext, Eventually, Always)):
        _collect_atoms(f.arg, out)
    elif isinstance(f, (And, Or, Until, Release)):
        _collect_atoms(f.left, out)
        _collect_atoms(f.right, out)
    elif isinstance(f, (Diamond, Box)):
        _collect_path_atoms(f.path, out)
        _collect_atoms(f.arg, out)


def _collect_path_atoms(p: PathExpression, out: list[str]) -> None:
    if isinstance(p, (Prop, Test)):
        _collect_atoms(p.arg, out)
    elif isinstance(p, (Seq, Alt)):
        _collect_path_atoms(p.left, out)
        _collect_path_atoms(p.right, out)
    else:
        _collect_path_atoms(p.arg, out)


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


_SYMBOLS = "~&|<>[]()?*;+"


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
            continue
        if ch.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word == "last":
                raise FormulaSyntaxError("'last' is reserved (end-of-trace flag)", line, col)
            if word in _WORD_KEYWORDS:
                tokens.append(_Token(word, word, line, col))
            elif ATOM_PATTERN.fullmatch(word):
                tokens.append(_Token("atom", word, line, col))
            else:
                raise FormulaSyntaxError(f"unknown operator {word!r}", line, col)
            col += j - i
            i = j
            continue
        raise FormulaSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_FORMULA_START = ("atom", "tt", "ff", "true", "false", "LAST", "~", "X", "wX", "F", "G", "<", "[", "(")


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.error(f"unexpected {self._describe(tok)}", (kind,))
        return self.advance()

    @staticmethod
    def _describe(tok: _Token) -> str:
        return "end of input" if tok.kind == "end" else f"token {tok.text!r}"

    def error(self, message: str, expected: tuple[str, ...] = ()) -> FormulaSyntaxError:
        tok = self.peek()
        return FormulaSyntaxError(message, tok.line, tok.column, expected)

    # Formula levels, loosest binding first.

    def formula(self) -> Formula:
        left = self.conjunction()
        while self.peek().kind == "|":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.until_level()
        while self.peek().kind == "&":
            self.advance()
            left = And(left, self.until_level())
        return left

    def until_level(self) -> Formula:
        left = self.unary()
        kind = self.peek().kind
        if kind in ("U", "R"):
            self.advance()
            right = self.until_level()
            return Until(left, right) if kind == "U" else Release(left, right)
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.advance()
            return Not(self.unary())
        if tok.kind in ("X", "wX", "F", "G"):
            self.advance()
            ctor = {"X": Next, "wX": WeakNext, "F": Eventually, "G": Always}[tok.kind]
            return ctor(self.unary())
        if tok.kind == "<":
            self.advance()
            path = self.path()
            self.expect(">")
            return Diamond(path, self.unary())
        if tok.kind == "[":
            self.advance()
            path = self.path()
            self.expect("]")
            return Box(path, self.unary())
        return self.primary()

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind in ("tt", "true"):
            self.advance()
            return TT()
        if tok.kind in ("ff", "false"):
            self.advance()
            return FF()
        if tok.kind == "LAST":
            self.advance()
            return Last()
        if tok.kind == "atom":
            self.advance()
            return Atom(tok.text)
        if tok.kind == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        raise self.error(f"unexpected {self._describe(tok)}", _FORMULA_START)

    # Path levels.

    def path(self) -> PathExpression:
        left = self.path_seq()
        while self.peek().kind == "+":
            self.advance()
            left = Alt(left, self.path_seq())
        return left

    def path_seq(self) -> PathExpression:
        left = self.path_star()
        while self.peek().kind == ";":
            self.advance()
            left = Seq(left, self.path_star())
        return left

    def path_star(self) -> PathExpression:
        p = self.path_primary()
        while self.peek().kind == "*":
            self.advance()
            p = Star(p)
        return p

    def path_primary(self) -> PathExpression:
        # A path atom is either a formula (a test with postfix "?", or a bare
        # propositional step condition) or a parenthesized path.  A formula
        # parse that fails, e.g. on "(a ; b)", backtracks to the path reading.
        start = self.pos
        try:
            f = self.formula()
            if self.peek().kind == "?":
                self.advance()
                return Test(f)
            if is_propositional(f):
                return Prop(f)
            raise self.error("path atom must be propositional or a test", ("?",))
        except FormulaSyntaxError as formula_err:
            self.pos = start
            try:
                self.expect("(")
                inner = self.path()
                self.expect(")")
                return inner
            except FormulaSyntaxError as path_err:
                raise max(formula_err, path_err, key=lambda e: (e.line, e.column)) from None


def parse_formula(text: str) -> Formula:
    """Parse formula text into an AST.

    Raises :class:`FormulaSyntaxError` with line/column information and the
    set of expected tokens on malformed input.
    """
    parser = _Parser(_tokenize(text))
    f = parser.formula()
    if parser.peek().kind != "end":
        raise parser.error(f"trailing input: {parser._describe(parser.peek())}", ("end",))
    return f


# ---------------------------------------------------------------------------
# Printing


def render(f: Formula) -> str:
    """Canonical fully parenthesized text; ``parse_formula(render(f)) == f``."""
    if isinstance(f, TT):
        return "tt"
    if isinstance(f, FF):
        return "ff"
    if isinstance(f, Last):
        return "LAST"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return f"(~ {render(f.arg)})"
    if isinstance(f, And):
        return f"({render(f.left)} & {render(f.right)})"
    if isinstance(f, Or):
        return f"({render(f.left)} | {render(f.right)})"
    if isinstance(f, Until):
        return f"({render(f.left)} U {render(f.right)})"
    if isinstance(f, Release):
        return f"({render(f.left)} R {render(f.right)})"
    if isinstance(f, Next):
        return f"(X {render(f.arg)})"
    if isinstance(f, WeakNext):
        return f"(wX {render(f.arg)})"
    if isinstance(f, Eventually):
        return f"(F {render(f.arg)})"
    if isinstance(f, Always):
        return f"(G {render(f.arg)})"
    if isinstance(f, Diamond):
        return f"(< {render_path(f.path)} > {render(f.arg)})"
    if isinstance(f, Box):
        return f"([ {render_path(f.path)} ] {render(f.arg)})"
    raise TypeError(f"not a formula: {f!r}")


def render_path(p: PathExpression) -> str:
    if isinstance(p, Prop):
        if isinstance(p.arg, TT):
            return "true"
        if isinstance(p.arg, FF):
            return "false"
        return render(p.arg)
    if isinstance(p, Test):
        return render(p.arg) + "?"
    if isinstance(p, Seq):
        return f"({render_path(p.left)} ; {render_path(p.right)})"
    if isinstance(p, Alt):
        return f"({render_path(p.left)} + {render_path(p.right)})"
    if isinstance(p, Star):
        return render_path(p.arg) + "*"
    raise TypeError(f"not a path expression: {p!r}")


# ---------------------------------------------------------------------------
# Normal forms


def desugar(f: Formula) -> Formula:
    """Rewrite temporal sugar into dynamic modalities.

    X f => <true>f, wX f => [true]f, F f => <true*>f, G f => [true*]f,
    f U g => <(f?;true)*>g, f R g => [(~f?;true)*]g, LAST => [true]ff.
    """
    if isinstance(f, (TT, FF, Atom)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.arg))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Or):
        return Or(desugar(f.left), desugar(f.right))
    if isinstance(f, Diamond):
        return Diamond(_desugar_path(f.path), desugar(f.arg))
    if isinstance(f, Box):
        return Box(_desugar_path(f.path), desugar(f.arg))
    if isinstance(f, Next):
        return Diamond(Prop(TT()), desugar(f.arg))
    if isinstance(f, WeakNext):
        return Box(Prop(TT()), desugar(f.arg))
    if isinstance(f, Eventually):
        return Diamond(Star(Prop(TT())), desugar(f.arg))
    if isinstance(f, Always):
        return Box(Star(Prop(TT())), desugar(f.arg))
    if isinstance(f, Until):
        step = Seq(Test(desugar(f.left)), Prop(TT()))
        return Diamond(Star(step), desugar(f.right))
    if isinstance(f, Release):
        step = Seq(Test(Not(desugar(f.left))), Prop(TT()))
        return Box(Star(step), desugar(f.right))
    if isinstance(f, Last):
        return Box(Prop(TT()), FF())
    raise TypeError(f"not a formula: {f!r}")


def _desugar_path(p: PathExpression) -> PathExpression:
    if isinstance(p, Prop):
        return Prop(desugar(p.arg))
    if isinstance(p, Test):
        return Test(desugar(p.arg))
    if isinstance(p, Seq):
        return Seq(_desugar_path(p.left), _desugar_path(p.right))
    if isinstance(p, Alt):
        return Alt(_desugar_path(p.left), _desugar_path(p.right))
    return Star(_desugar_path(p.arg))


def nnf(f: Formula) -> Formula:
    """Negation normal form of a core-form formula.

    Negation is pushed down to atoms; diamonds and boxes dualize under it.
    """
    if isinstance(f, (TT, FF, Atom)):
        return f
    if isinstance(f, Not):
        return _nnf_neg(f.arg)
    if isinstance(f, And):
        return And(nnf(f.left), nnf(f.right))
    if isinstance(f, Or):
        return Or(nnf(f.left), nnf(f.right))
    if isinstance(f, Diamond):
        return Diamond(_nnf_path(f.path), nnf(f.arg))
    if isinstance(f, Box):
        return Box(_nnf_path(f.path), nnf(f.arg))
    raise ValueError(f"not in core form: {render(f)}")


def _nnf_neg(f: Formula) -> Formula:
    if isinstance(f, TT):
        return FF()
    if isinstance(f, FF):
        return TT()
    if isinstance(f, Atom):
        return Not(f)
    if isinstance(f, Not):
        return nnf(f.arg)
    if isinstance(f, And):
        return Or(_nnf_neg(f.left), _nnf_neg(f.right))
    if isinstance(f, Or):
        return And(_nnf_neg(f.left), _nnf_neg(f.right))
    if isinstance(f, Diamond):
        return Box(_nnf_path(f.path), _nnf_neg(f.arg))
    if isinstance(f, Box):
        return Diamond(_nnf_path(f.path), _nnf_neg(f.arg))
    raise ValueError(f"not in core form: {render(f)}")


def _nnf_path(p: PathExpression) -> PathExpression:
    if isinstance(p, Prop):
        return Prop(nnf(p.arg))
    if isinstance(p, Test):
        return Test(nnf(p.arg))
    if isinstance(p, Seq):
        return Seq(_nnf_path(p.left), _nnf_path(p.right))
    if isinstance(p, Alt):
        return Alt(_nnf_path(p.left), _nnf_path(p.right))
    return Star(_nnf_path(p.arg))


def normalize(f: Formula) -> Formula:
    """Desugar and convert to negation normal form."""
    return nnf(desugar(f))


# ---------------------------------------------------------------------------
# Closure


def closure(f: Formula) -> tuple[Formula, ...]:
    """The finite unfolding set of ``f``, in discovery order.

    Members are ``f`` itself plus everything reachable by the modality
    rewrite rules: ``<r1;r2>g`` contributes ``<r1><r2>g``, ``<r1+r2>g``
    contributes both branch modalities, ``<r*>g`` contributes ``g`` and
    ``<r><r*>g``, and tests contribute their payloads (boxes alike).  The
    result is the superset of states any transition construction can reach.
    """
    if not is_core(f):
        raise ValueError("closure requires a core-form formula; desugar first")
    ordered: list[Formula] = []
    seen: set[Formula] = set()

    def visit(g: Formula) -> None:
        if g in seen:
            return
        seen.add(g)
        ordered.append(g)
        if isinstance(g, Not):
            visit(g.arg)
        elif isinstance(g, (And, Or)):
            visit(g.left)
            visit(g.right)
        elif isinstance(g, (Diamond, Box)):
            mod = type(g)
            rho, phi = g.path, g.arg
            if isinstance(rho, Prop):
                visit(phi)
            elif isinstance(rho, Test):
                visit(rho.arg)
                visit(phi)
            elif isinstance(rho, Seq):
                visit(mod(rho.left, mod(rho.right, phi)))
            elif isinstance(rho, Alt):
                visit(mod(rho.left, phi))
                visit(mod(rho.right, phi))
            else:
                visit(phi)
                visit(mod(rho.arg, g))

    visit(f)
    return tuple(ordered)


# ---------------------------------------------------------------------------
# Random generation (drives the property suites)


def random_formula(seed: int, max_depth: int, atoms: list[str] | tuple[str, ...]) -> Formula:
    """Deterministic pseudo-random formula of AST depth at most ``max_depth``."""
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    atoms = tuple(atoms)
    if not atoms:
        raise ValueError("atoms must be nonempty")
    rng = random.Random(seed)
    return _rand_formula(rng, max_depth, atoms)


def _rand_leaf(rng: random.Random, atoms: tuple[str, ...]) -> Formula:
    k = rng.randrange(4)
    if k == 0:
        return TT()
    if k == 1:
        return FF()
    atom = Atom(rng.choice(atoms))
    return atom if k == 2 else Not(atom)


_FORMULA_KINDS = (
    "leaf", "last", "not", "and", "or",
    "next", "wnext", "eventually", "always", "until", "release",
    "diamond", "box",
)


def _rand_formula(rng: random.Random, depth: int, atoms: tuple[str, ...]) -> Formula:
    if depth <= 1:
        return _rand_leaf(rng, atoms)
    kind = rng.choice(_FORMULA_KINDS)
    if kind == "leaf":
        return _rand_leaf(rng, atoms)
    if kind == "last":
        return Last()
    if kind == "not":
        return Not(_rand_formula(rng, depth - 1, atoms))
    if kind in ("and", "or", "until", "release"):
        left = _rand_formula(rng, depth - 1, atoms)
        right = _rand_formula(rng, depth - 1, atoms)
        ctor = {"and": And, "or": Or, "until": Until, "release": Release}[kind]
        return ctor(left, right)
    if kind in ("next", "wnext", "eventually", "always"):
        ctor = {"next": Next, "wnext": WeakNext, "eventually": Eventually, "always": Always}[kind]
        return ctor(_rand_formula(rng, depth - 1, atoms))
    path = _rand_path(rng, depth - 1, atoms)
    body = _rand_formula(rng, depth - 1, atoms)
    return Diamond(path, body) if kind == "diamond" else Box(path, body)


def _rand_path(rng: random.Random, depth: int, atoms: tuple[str, ...]) -> PathExpression:
    if depth <= 1:
        return Prop(_rand_prop(rng, 1, atoms))
    kind = rng.choice(("prop", "test", "seq", "alt", "star"))
    if kind == "prop":
        return Prop(_rand_prop(rng, depth - 1, atoms))
    if kind == "test":
        return Test(_rand_formula(rng, depth - 1, atoms))
    if kind == "seq":
        return Seq(_rand_path(rng, depth - 1, atoms), _rand_path(rng, depth - 1, atoms))
    if kind == "alt":
        return Alt(_rand_path(rng, depth - 1, atoms), _rand_path(rng, depth - 1, atoms))
    return Star(_rand_path(rng, depth - 1, atoms))


def _rand_prop(rng: random.Random, depth: int, atoms: tuple[str, ...]) -> Formula:
    if depth <= 1:
        return _rand_leaf(rng, atoms)
    kind = rng.choice(("leaf", "not", "and", "or"))
    if kind == "leaf":
        return _rand_leaf(rng, atoms)
    if kind == "not":
        return Not(_rand_prop(rng, depth - 1, atoms))
    left = _rand_prop(rng, depth - 1, atoms)
    right = _rand_prop(rng, depth - 1, atoms)
    return And(left, right) if kind == "and" else Or(left, right)
