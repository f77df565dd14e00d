"""Finite-trace dynamic logic compiled to alternating and deterministic automata."""

from .afw import Afw, Stats, Transition, afw_accepts, afw_stats, compile_afw
from .export import (
    AutomatonView,
    automaton_view,
    emit_asp_facts,
    emit_dot,
    emit_mona,
    parse_asp_facts,
    parse_mona_dot,
)
from .formula import (
    Formula,
    FormulaSyntaxError,
    PathExpression,
    SymbolTable,
    closure,
    desugar,
    nnf,
    parse_formula,
    random_formula,
    render,
)
from .fsa import (
    Dfa,
    Nfa,
    afw_to_nfa,
    compile_dfa,
    dfa_accepts,
    equivalent,
    is_empty,
    minimize,
    nfa_accepts,
    nfa_to_dfa,
    shortest_witness,
)
from .semantics import (
    Trace,
    accepts_semantics,
    enumerate_traces,
    eval_formula,
    make_trace,
    path_relation,
)
from .traces import (
    FilterReport,
    TraceCorpus,
    TraceFormatError,
    filter_traces,
    read_traces,
    write_traces,
)

__version__ = "0.1.0"
