"""Exit codes, output contracts, and determinism of the command line."""

import json

import pytest

from dynaut.cli import main
from dynaut.formula import parse_formula
from dynaut.semantics import accepts_semantics, make_trace

from conftest import DYNAMIC_TEXT, TEMPORAL_TEXT


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def trace_file(tmp_path):
    path = tmp_path / "corpus.traces"
    path.write_text('[["b"],["a","b"]]\n[["b"],["a"]]\n[["b"]]\n', encoding="utf-8")
    return str(path)


def test_compile_min_dfa_asp(capsys):
    code, out, _ = run(capsys, "compile", "--to", "mindfa", "--emit", "asp", DYNAMIC_TEXT)
    assert code == 0
    assert out.startswith("prop(1,b).\nprop(2,a).\n")
    assert "initial_state(0)." in out


def test_compile_deterministic(capsys):
    _, first, _ = run(capsys, "compile", "--to", "mindfa", "--emit", "asp", DYNAMIC_TEXT)
    _, second, _ = run(capsys, "compile", "--to", "mindfa", "--emit", "asp", DYNAMIC_TEXT)
    assert first == second


def test_compile_dot(capsys):
    code, out, _ = run(capsys, "compile", "--emit", "dot", DYNAMIC_TEXT)
    assert code == 0
    assert out.startswith("digraph")


def test_compile_mona(capsys):
    code, out, _ = run(capsys, "compile", "--emit", "mona", "a")
    assert code == 0
    assert "m2l-str;" in out and "(0 in A)" in out


def test_compile_mona_rejects_target(capsys):
    code, _, err = run(capsys, "compile", "--to", "dfa", "--emit", "mona", "a")
    assert code == 1
    assert "--to" in err


def test_compile_formula_from_file(capsys, tmp_path):
    path = tmp_path / "formula.txt"
    path.write_text(DYNAMIC_TEXT, encoding="utf-8")
    code, out, _ = run(capsys, "compile", f"@{path}")
    assert code == 0 and "initial_state(0)." in out


def test_compile_to_output_file(capsys, tmp_path):
    target = tmp_path / "out.lp"
    code, out, _ = run(capsys, "compile", "-o", str(target), DYNAMIC_TEXT)
    assert code == 0 and out == ""
    assert target.read_text(encoding="utf-8").startswith("prop(1,b).")


def test_check_verdicts(capsys, trace_file):
    code, out, _ = run(capsys, "check", DYNAMIC_TEXT, trace_file)
    assert code == 0
    assert out.splitlines() == ["t0\taccept", "t1\treject", "t2\treject"]


def test_check_backends_agree(capsys, trace_file):
    outputs = set()
    for backend in ("oracle", "afw", "dfa"):
        _, out, _ = run(capsys, "check", DYNAMIC_TEXT, trace_file, "--backend", backend)
        outputs.add(out)
    assert len(outputs) == 1


def test_filter_writes_accepted_and_summary(capsys, trace_file):
    code, out, err = run(capsys, "filter", DYNAMIC_TEXT, trace_file)
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    assert [r["id"] for r in records] == ["t0"]
    assert "accepted 1/3" in err


def test_filter_none_accepted_is_negative(capsys, trace_file):
    code, out, _ = run(capsys, "filter", "a & ~a", trace_file)
    assert code == 3
    assert out == ""


def test_filter_jobs_match(capsys, trace_file):
    _, serial, _ = run(capsys, "filter", DYNAMIC_TEXT, trace_file, "--jobs", "1")
    _, parallel, _ = run(capsys, "filter", DYNAMIC_TEXT, trace_file, "--jobs", "4")
    assert serial == parallel


def test_empty_negative(capsys):
    code, out, _ = run(capsys, "empty", "a & ~a")
    assert code == 3
    assert out.strip() == "language is empty"


def test_empty_witness(capsys):
    code, out, _ = run(capsys, "empty", "< true > tt")
    assert code == 0
    letters = json.loads(out)
    assert len(letters) == 2
    witness = make_trace(letters)
    assert accepts_semantics(parse_formula("< true > tt"), witness)


def test_equiv_positive(capsys):
    code, out, _ = run(capsys, "equiv", DYNAMIC_TEXT, TEMPORAL_TEXT)
    assert code == 0
    assert out.strip() == "equivalent"


def test_equiv_negative_with_counterexample(capsys):
    code, out, _ = run(capsys, "equiv", "a", "b")
    assert code == 3
    trace = make_trace(json.loads(out))
    assert accepts_semantics(parse_formula("a"), trace) != accepts_semantics(
        parse_formula("b"), trace
    )


def test_stats_table(capsys):
    code, out, _ = run(capsys, "stats", DYNAMIC_TEXT)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "representation states transitions"
    assert lines[1].startswith("afw 3 4")
    assert lines[2].startswith("min-dfa 5 ")


def test_bench_csv(capsys):
    code, out, _ = run(
        capsys, "bench", "--family", "eventually-chain", "--min-depth", "2", "--max-depth", "3"
    )
    assert code == 0
    lines = out.splitlines()
    header = lines[0].split(",")
    assert header[:6] == [
        "family", "depth", "afw_states", "afw_transitions", "mindfa_states", "mindfa_transitions",
    ]
    assert "compile_ms" in header
    rows = [line.split(",") for line in lines[1:]]
    assert [r[1] for r in rows] == ["2", "3"]
    for row in rows:
        assert int(row[2]) <= int(row[4])


def test_bench_size_columns_deterministic(capsys):
    def sizes():
        _, out, _ = run(
            capsys, "bench", "--family", "nested-next", "--min-depth", "2", "--max-depth", "3"
        )
        return [line.split(",")[:6] for line in out.splitlines()]

    assert sizes() == sizes()


def test_usage_error(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys)[0] == 1


def test_parse_error_is_input_error(capsys):
    code, _, err = run(capsys, "compile", "((a")
    assert code == 2
    assert "error" in err


def test_missing_file_is_input_error(capsys):
    code, _, _ = run(capsys, "check", "a", "/nonexistent/corpus.traces")
    assert code == 2


def test_diagnostics_not_on_stdout(capsys, trace_file):
    _, out, err = run(capsys, "filter", DYNAMIC_TEXT, trace_file)
    assert "accepted" not in out
    assert "accepted" in err
