"""Shared fixtures: the running example in both of its forms."""

import pytest

from dynaut.formula import parse_formula
from dynaut.semantics import make_trace

# "b holds along the way and a holds one step later" -- the dynamic form and
# its temporal equivalent.
DYNAMIC_TEXT = "< ([ true* ] b)? > < true > a"
TEMPORAL_TEXT = "G b & X a"


@pytest.fixture
def dynamic_formula():
    return parse_formula(DYNAMIC_TEXT)


@pytest.fixture
def temporal_formula():
    return parse_formula(TEMPORAL_TEXT)


@pytest.fixture
def model_trace():
    return make_trace([{"b"}, {"a", "b"}])


@pytest.fixture
def broken_b_trace():
    return make_trace([{"b"}, {"a"}])


@pytest.fixture
def short_trace():
    return make_trace([{"b"}])
