"""Corpus I/O and the filtering harness."""

import io

import pytest

from dynaut.formula import parse_formula
from dynaut.semantics import accepts_semantics, make_trace
from dynaut.traces import (
    TraceCorpus,
    TraceFormatError,
    filter_traces,
    first_failure_position,
    read_traces,
    write_traces,
)
from dynaut.fsa import compile_dfa

from conftest import DYNAMIC_TEXT


def test_read_bare_arrays():
    corpus = read_traces(iter(['[["b"],["a","b"]]']))
    assert corpus.ids() == ("t0",)
    assert corpus.entries[0][1] == make_trace([{"b"}, {"a", "b"}])


def test_read_empty_letter():
    corpus = read_traces(iter(["[[]]"]))
    assert corpus.entries[0][1] == (frozenset(),)


def test_read_wrapped_records_and_comments():
    corpus = read_traces(iter([
        "# corpus header",
        '{"id": "x", "trace": [["a"]]}',
        "",
        '[["b"]]',
    ]))
    assert corpus.ids() == ("x", "t1")


@pytest.mark.parametrize(
    "line,match",
    [
        ("[]", "nonempty"),
        ('[["a", 3]]', "atom names"),
        ('[{"a": 1}]', "arrays of atom names"),
        ("{nope}", "invalid JSON"),
        ('{"trace": [["a"]]}', "'id' and 'trace'"),
        ('[["Bad"]]', "invalid atom"),
    ],
)
def test_read_errors_carry_line_numbers(line, match):
    with pytest.raises(TraceFormatError, match="line 1"):
        try:
            read_traces(iter([line]))
        except TraceFormatError as err:
            assert match in str(err)
            raise


def test_duplicate_ids_rejected():
    with pytest.raises(TraceFormatError, match="duplicate"):
        read_traces(iter(['{"id": "x", "trace": [["a"]]}'] * 2))


def test_write_read_round_trip():
    corpus = read_traces(iter([
        '[["b"],["a","b"]]',
        "[[]]",
        '{"id": "named", "trace": [["a"],["b"]]}',
    ]))
    buffer = io.StringIO()
    write_traces(corpus, buffer)
    assert read_traces(iter(buffer.getvalue().splitlines())) == corpus


def test_filter_running_example(dynamic_formula):
    corpus = read_traces(iter([
        '{"id": "good", "trace": [["b"],["a","b"]]}',
        '{"id": "breaks_b", "trace": [["b"],["a"]]}',
        '{"id": "too_short", "trace": [["b"]]}',
    ]))
    for backend in ("oracle", "afw", "dfa"):
        accepted, report = filter_traces(dynamic_formula, corpus, backend=backend)
        assert accepted.ids() == ("good",)
        assert report.total == 3 and report.accepted == 1 and report.rejected == 2
        assert backend in report.wall_time


def test_filter_trivially_true_keeps_all():
    corpus = read_traces(iter(['[["a"]]', '[["b"],["a"]]']))
    accepted, report = filter_traces(parse_formula("tt"), corpus)
    assert accepted == corpus
    assert report.rejected == 0


def test_filter_unknown_backend():
    corpus = read_traces(iter(['[["a"]]']))
    with pytest.raises(ValueError, match="unknown backend"):
        filter_traces(parse_formula("tt"), corpus, backend="magic")


GRID_LINES = [
    '{"id": "t0", "trace": [["up"],["right"],["wait"]]}',
    '{"id": "t1", "trace": [["wait"]]}',
    '{"id": "t2", "trace": [["up"],["up"],["right"],["right"],["wait"],["wait"]]}',
    '{"id": "t3", "trace": [["up"],["wait"],["right"]]}',
    '{"id": "t4", "trace": [["right"],["up"],["wait"]]}',
    '{"id": "t5", "trace": [["up"],["right"]]}',
    '{"id": "t6", "trace": [["wait"],["wait"],["wait"]]}',
    '{"id": "t7", "trace": [["up"],["up"],["up"],["right"],["wait"]]}',
    '{"id": "t8", "trace": [["up"],["right"],["up"],["wait"]]}',
    '{"id": "t9", "trace": [["right"],["wait"]]}',
]

# Robot discipline: any number of up moves, then right moves, then waiting
# through the end of the plan.
GRID_CONSTRAINT = "< up* ; right* > G wait"

# Accepted subset computed by the oracle ahead of the automaton work.
GRID_EXPECTED = ("t0", "t1", "t2", "t6", "t7", "t9")


def grid_corpus():
    return read_traces(iter(GRID_LINES))


def test_grid_expected_matches_oracle():
    constraint = parse_formula(GRID_CONSTRAINT)
    oracle_ids = tuple(
        ident for ident, trace in grid_corpus() if accepts_semantics(constraint, trace)
    )
    assert oracle_ids == GRID_EXPECTED


def test_grid_backends_agree():
    constraint = parse_formula(GRID_CONSTRAINT)
    for backend in ("oracle", "afw", "dfa"):
        accepted, _ = filter_traces(constraint, grid_corpus(), backend=backend)
        assert accepted.ids() == GRID_EXPECTED


def test_grid_parallel_matches_serial():
    constraint = parse_formula(GRID_CONSTRAINT)
    serial, _ = filter_traces(constraint, grid_corpus(), backend="afw", jobs=1)
    parallel, _ = filter_traces(constraint, grid_corpus(), backend="afw", jobs=4)
    assert parallel == serial


def test_filter_concatenation_independent(dynamic_formula):
    lines = [
        '{"id": "a0", "trace": [["b"],["a","b"]]}',
        '{"id": "a1", "trace": [["a"]]}',
    ]
    other = [
        '{"id": "b0", "trace": [["b"],["b"],["a","b"]]}',
        '{"id": "b1", "trace": [["b"]]}',
    ]
    whole, _ = filter_traces(dynamic_formula, read_traces(iter(lines + other)))
    first, _ = filter_traces(dynamic_formula, read_traces(iter(lines)))
    second, _ = filter_traces(dynamic_formula, read_traces(iter(other)))
    assert whole.entries == first.entries + second.entries


def test_failure_positions(dynamic_formula):
    dfa = compile_dfa(dynamic_formula)
    # b fails at position 1: the letter read there kills every continuation.
    assert first_failure_position(dfa, make_trace([{"b"}, {"a"}])) == 1
    # A one-letter trace dies immediately: the initial move needs a successor.
    assert first_failure_position(dfa, make_trace([{"b"}])) == 0
    assert first_failure_position(dfa, make_trace([{"b"}, {"a", "b"}])) is None


def test_failure_positions_reported_for_dfa_backend(dynamic_formula):
    corpus = read_traces(iter([
        '{"id": "good", "trace": [["b"],["a","b"]]}',
        '{"id": "bad", "trace": [["b"],["a"]]}',
    ]))
    _, report = filter_traces(dynamic_formula, corpus, backend="dfa")
    verdicts = {v.trace_id: v for v in report.verdicts}
    assert verdicts["good"].failed_at is None
    assert verdicts["bad"].failed_at == 1
