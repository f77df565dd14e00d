"""Fact, GraphViz, and MSO serialization plus re-ingestion."""

import re

import pytest

from dynaut import formula as fm
from dynaut.afw import compile_afw
from dynaut.export import (
    AspFactError,
    MonaDotError,
    automaton_view,
    emit_asp_facts,
    emit_dot,
    emit_mona,
    find_mona,
    mona_dfa,
    parse_asp_facts,
    parse_mona_dot,
    view_afw,
)
from dynaut.formula import SymbolTable, parse_formula, random_formula
from dynaut.fsa import afw_to_nfa, compile_dfa, equivalent, minimize, nfa_to_dfa

from conftest import DYNAMIC_TEXT


def test_facts_running_example(dynamic_formula):
    text = emit_asp_facts(view_afw(compile_afw(dynamic_formula)))
    lines = text.splitlines()
    assert "prop(1,b)." in lines
    assert "prop(2,a)." in lines
    assert "initial_state(0)." in lines
    assert "delta(0,0)." in lines
    assert "delta(0,0,pos,1)." in lines
    assert "delta(0,0,neg,last)." in lines
    assert "delta(0,0,succ,1)." in lines
    assert "delta(0,0,succ,2)." in lines


def test_facts_trivially_true():
    text = emit_asp_facts(view_afw(compile_afw(fm.TT())))
    assert text == 'state(0,"tt").\ninitial_state(0).\ndelta(0,0).\n'


def test_facts_round_trip_identity(dynamic_formula):
    automaton = compile_afw(dynamic_formula)
    text = emit_asp_facts(view_afw(automaton))
    parsed = parse_asp_facts(text)
    assert parsed == automaton
    assert emit_asp_facts(view_afw(parsed)) == text


def test_facts_round_trip_random():
    for seed in range(40):
        automaton = compile_afw(random_formula(seed, 3, ["a", "b"]))
        text = emit_asp_facts(view_afw(automaton))
        assert parse_asp_facts(text) == automaton


def test_facts_round_trip_derived_representations(dynamic_formula):
    automaton = compile_afw(dynamic_formula)
    nfa = afw_to_nfa(automaton)
    dfa = nfa_to_dfa(nfa)
    for derived in (nfa, dfa, minimize(dfa)):
        text = emit_asp_facts(automaton_view(derived))
        reparsed = parse_asp_facts(text)
        assert emit_asp_facts(view_afw(reparsed)) == text


def test_facts_deterministic(dynamic_formula):
    one = emit_asp_facts(view_afw(compile_afw(dynamic_formula)))
    two = emit_asp_facts(view_afw(compile_afw(parse_formula(DYNAMIC_TEXT))))
    assert one == two


def test_facts_comments_ignored():
    text = 'state(0,"tt"). % the only state\n% standalone comment\ninitial_state(0).\ndelta(0,0).\n'
    parsed = parse_asp_facts(text)
    assert parsed.states == (fm.TT(),)


@pytest.mark.parametrize(
    "text,match",
    [
        ("state(0,\"tt\").\ninitial_state(0).\nwhat(1).\n", "malformed"),
        ("state(0,\"tt\").\ninitial_state(0).\ninitial_state(0).\n", "duplicate initial"),
        ("state(0,\"tt\").\n", "missing initial"),
        ("state(0,\"tt\").\ninitial_state(3).\n", "not declared"),
        ("state(0,\"tt\").\ninitial_state(0).\ndelta(0,0).\ndelta(0,0,succ,9).\n", "unknown successor"),
        ("state(0,\"tt\").\ninitial_state(0).\ndelta(0,0).\ndelta(0,0,pos,4).\n", "unknown prop"),
        ("prop(2,a).\nstate(0,\"tt\").\ninitial_state(0).\n", "contiguous"),
    ],
)
def test_facts_errors(text, match):
    with pytest.raises(AspFactError, match=match):
        parse_asp_facts(text)


def _check_dot_syntax(text):
    """Minimal structural check of a DOT digraph."""
    assert text.startswith("digraph")
    assert text.count("{") == text.count("}") == 1
    body = text[text.index("{") + 1 : text.rindex("}")]
    for line in filter(None, (l.strip() for l in body.splitlines())):
        assert line.endswith(";"), line
        assert line.count('"') % 2 == 0, line
    assert re.search(r"->", body)


def test_dot_running_example(dynamic_formula):
    text = emit_dot(view_afw(compile_afw(dynamic_formula)))
    _check_dot_syntax(text)
    # Three formula nodes, one universal junction fan-out, one self-loop.
    assert text.count("shape=circle") == 3
    assert "u0_0 -> s1;" in text and "u0_0 -> s2;" in text
    assert 's1 -> s1 [label="b & ~last"];' in text


def test_dot_trivially_true():
    text = emit_dot(view_afw(compile_afw(fm.TT())))
    _check_dot_syntax(text)
    assert text.count("shape=circle") == 1
    assert 's0 -> u0_0 [label="true"];' in text


def test_dot_random_syntax():
    for seed in range(20):
        automaton = compile_afw(random_formula(seed, 3, ["a", "b"]))
        _check_dot_syntax(emit_dot(view_afw(automaton)))
        _check_dot_syntax(emit_dot(automaton_view(compile_dfa(random_formula(seed, 3, ["a", "b"])))))


def test_mona_program_atom():
    program = emit_mona(fm.Atom("a"))
    assert "m2l-str;" in program
    assert "var2 A;" in program
    assert "(0 in A)" in program
    assert "0 <= max($)" in program


def test_mona_program_trivially_true():
    program = emit_mona(fm.TT())
    assert "true;" in program.replace("(0 <= max($)) & ", "")


def test_mona_program_star_uses_second_order_closure():
    program = emit_mona(parse_formula("G b"))
    assert "all2" in program
    assert "var2 B;" in program


def test_mona_program_deterministic(dynamic_formula):
    assert emit_mona(dynamic_formula) == emit_mona(parse_formula(DYNAMIC_TEXT))


def test_mona_variable_collisions_resolved():
    program = emit_mona(parse_formula("s1 & v2"))
    # Bound-variable-shaped atom names get a disambiguating suffix.
    assert "var2 S1_1, V2_2;" in program


# A MONA-format automaton for "the first letter contains a": MONA reads one
# leading don't-care letter before the word proper.
_MONA_DOT_FOR_ATOM = """digraph MONA_DFA {
 rankdir = LR;
 center = true;
 size = "7.5,10.5";
 edge [fontname = Courier];
 node [height = .5, width = .5];
 node [shape = doublecircle]; 2;
 node [shape = circle]; 1; 3;
 node [shape = box]; 0;
 init [shape = plaintext, label = ""];
 init -> 0;
 0 -> 1 [label="X"];
 1 -> 2 [label="1"];
 1 -> 3 [label="0"];
 2 -> 2 [label="X"];
 3 -> 3 [label="X"];
}
"""


def test_parse_mona_dot_atom():
    table = SymbolTable(("a",))
    ingested = parse_mona_dot(_MONA_DOT_FOR_ATOM, table)
    internal = compile_dfa(fm.Atom("a"))
    same, counterexample = equivalent(ingested, internal)
    assert same, counterexample


def test_parse_mona_dot_variable_mismatch():
    with pytest.raises(MonaDotError, match="variable count"):
        parse_mona_dot(_MONA_DOT_FOR_ATOM, SymbolTable(("a", "b")))


def test_parse_mona_dot_rejects_garbage():
    with pytest.raises(MonaDotError):
        parse_mona_dot("digraph MONA_DFA {\n >>> nonsense <<<\n}\n", SymbolTable(("a",)))


_HAS_MONA = find_mona() is not None


@pytest.mark.skipif(not _HAS_MONA, reason="MONA binary not available")
def test_mona_cross_validation_running_example(dynamic_formula):
    external = mona_dfa(dynamic_formula)
    internal = compile_dfa(dynamic_formula)
    same, counterexample = equivalent(external, internal)
    assert same, counterexample


@pytest.mark.skipif(not _HAS_MONA, reason="MONA binary not available")
def test_mona_cross_validation_random():
    for seed in range(25):
        f = random_formula(seed, 3, ["a", "b"])
        same, counterexample = equivalent(mona_dfa(f), compile_dfa(f))
        assert same, (fm.render(f), counterexample)
