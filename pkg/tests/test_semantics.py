"""The brute-force trace oracle."""

import pytest

from dynaut import formula as fm
from dynaut.formula import parse_formula, random_formula
from dynaut.semantics import (
    accepts_semantics,
    enumerate_traces,
    eval_formula,
    make_trace,
    path_relation,
)
from dynaut.formula import normalize


def test_running_example_verdicts(dynamic_formula, model_trace, broken_b_trace):
    assert accepts_semantics(dynamic_formula, model_trace) is True
    assert accepts_semantics(dynamic_formula, broken_b_trace) is False


def test_eval_tt_everywhere():
    t = make_trace([set(), {"a"}, {"b"}])
    for i in range(len(t)):
        assert eval_formula(fm.TT(), t, i)


def test_eval_position_bounds():
    t = make_trace([{"a"}])
    with pytest.raises(ValueError):
        eval_formula(fm.TT(), t, 1)
    with pytest.raises(ValueError):
        eval_formula(fm.TT(), t, -1)


def test_eval_rejects_sugar():
    t = make_trace([{"a"}])
    with pytest.raises(ValueError, match="desugar"):
        eval_formula(fm.Next(fm.Atom("a")), t, 0)


def test_path_relation_single_step():
    t = make_trace([set(), set()])
    assert path_relation(fm.Prop(fm.TT()), t) == {(0, 1), (1, 2)}


def test_path_relation_test_stays_put():
    t = make_trace([set()] * 3)
    assert path_relation(fm.Test(fm.TT()), t) == {(i, i) for i in range(4)}


def test_path_relation_star_closure():
    t = make_trace([set(), set()])
    expected = {(i, j) for i in range(3) for j in range(3) if i <= j}
    assert path_relation(fm.Star(fm.Prop(fm.TT())), t) == expected


def test_path_relation_conditioned_step():
    t = make_trace([{"a"}, set(), {"a"}])
    assert path_relation(fm.Prop(fm.Atom("a")), t) == {(0, 1), (2, 3)}


def test_step_relation_moves_forward_one():
    for seed in range(40):
        rho = fm.Prop(fm.Atom("a"))
        for t in enumerate_traces({"a"}, 3):
            for i, j in path_relation(rho, t):
                assert j == i + 1
                assert i < len(t)


def test_diamond_box_duality():
    """<rho>f is the negation of [rho]~f on every generated input."""
    traces = list(enumerate_traces({"a", "b"}, 3))
    for seed in range(40):
        f = normalize(random_formula(seed, 2, ["a", "b"]))
        rho = fm.Star(fm.Seq(fm.Test(fm.Atom("a")), fm.Prop(fm.TT())))
        dia = fm.Diamond(rho, f)
        box_neg = fm.Not(fm.Box(rho, fm.Not(f)))
        for t in traces:
            assert accepts_semantics(dia, t) == accepts_semantics(box_neg, t)


def test_boundary_next_true_fails_at_end():
    stepped = parse_formula("< true > tt")
    for t in (make_trace([{"a"}]), make_trace([set(), set()])):
        core = normalize(stepped)
        assert eval_formula(core, t, len(t) - 1) is False
        if len(t) > 1:
            assert eval_formula(core, t, 0) is True


def test_boundary_last_marker():
    last = normalize(parse_formula("LAST"))
    t = make_trace([set(), {"a"}, set()])
    for i in range(len(t)):
        assert eval_formula(last, t, i) == (i == len(t) - 1)


def test_enumerate_single_atom():
    traces = list(enumerate_traces({"a"}, 1))
    assert traces == [(frozenset(),), (frozenset({"a"}),)]


def test_enumerate_counts():
    assert len(list(enumerate_traces({"a", "b"}, 2))) == 20
    assert len(list(enumerate_traces({"a", "b"}, 5))) == 1364


def test_enumerate_no_atoms():
    assert list(enumerate_traces(set(), 2)) == [
        (frozenset(),),
        (frozenset(), frozenset()),
    ]


def test_enumerate_deterministic_order():
    first = list(enumerate_traces({"a", "b"}, 2))
    second = list(enumerate_traces({"a", "b"}, 2))
    assert first == second
    assert first[0] == (frozenset(),)


def test_make_trace_rejects_empty():
    with pytest.raises(ValueError):
        make_trace([])


def test_make_trace_rejects_bad_atom():
    with pytest.raises(ValueError):
        make_trace([{"Bad"}])


def test_accepts_desugars_internally(model_trace):
    assert accepts_semantics(parse_formula("G b & X a"), model_trace) is True
