import numpy as np
import pytest
from hypothesis import given, settings

from conftest import draw_matrices
from ensemble_tcl import EnsembleError
from ensemble_tcl.io import (
    InputFormatError,
    atomic_write_many,
    draws_to_text,
    estimates_to_text,
    parse_draws,
    parse_estimates,
    read_draws,
)


def test_csv_is_draw_major():
    m = parse_draws("a,b\n1,10\n2,20\n3,30\n")
    assert m.unit_ids == ("a", "b")
    assert m.draws.tolist() == [[1, 2, 3], [10, 20, 30]]


def test_ndjson():
    m = parse_draws('{"a": 1, "b": 2.5}\n\n{"b": 3, "a": -1}\n', "ndjson")
    assert m.unit_ids == ("a", "b")
    assert m.draws.tolist() == [[1, -1], [2.5, 3]]


@settings(max_examples=50, deadline=None)
@given(draw_matrices())
def test_round_trip(m):
    for fmt in ("csv", "ndjson"):
        assert parse_draws(draws_to_text(m, fmt), fmt) == m


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("a,b\n1,2\n3,x\n", 3, 2),
        ("a,b\n1,2\n3\n", 3, 2),
        ("a,b\n1,nan\n", 2, 2),
        ("a,b\ninf,1\n", 2, 1),
    ],
)
def test_csv_errors_carry_position(text, line, column):
    with pytest.raises(InputFormatError) as exc:
        parse_draws(text)
    assert (exc.value.line, exc.value.column) == (line, column)
    assert f"line {line}, column {column}" in str(exc.value)


@pytest.mark.parametrize("text", ["", "a,b\n", "a,,b\n1,2,3\n", "a,a\n1,2\n"])
def test_csv_structural_errors(text):
    with pytest.raises(EnsembleError):
        parse_draws(text)


@pytest.mark.parametrize(
    "text",
    ['{"a": 1}\n{"a": NaN}\n', '{"a": 1}\n{"b": 1}\n', '{"a": "x"}\n', "[1, 2]\n", '{"a": 1\n', ""],
)
def test_ndjson_errors(text):
    with pytest.raises(EnsembleError):
        parse_draws(text, "ndjson")


def test_ndjson_error_line():
    with pytest.raises(InputFormatError) as exc:
        parse_draws('{"a": 1}\n{"a": 2,}\n', "ndjson")
    assert exc.value.line == 2


def test_read_draws_digest(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a\n1\n")
    m, digest = read_draws(path)
    assert m.S == 1 and digest.startswith("sha256:")
    assert read_draws(path)[1] == digest


class TestEstimates:
    def test_estimates_reordered(self):
        est = parse_estimates("unit_id,estimate\nb,2\na,-1\n", ["a", "b"], 0.0)
        assert est.unit_ids == ("a", "b")
        assert est.estimates.tolist() == [-1, 2]
        assert est.labels.tolist() == [False, True]

    def test_labels(self):
        est = parse_estimates("unit_id,label\na,above\nb,0\nc,TRUE\n", ["a", "b", "c"], 1.0)
        assert est.estimates is None
        assert est.labels.tolist() == [True, False, True]

    @pytest.mark.parametrize(
        "text",
        [
            "unit_id,estimate\na,1\n",
            "unit_id,estimate\na,1\nb,2\nc,3\n",
            "unit_id,estimate\na,1\na,2\n",
            "unit_id,label\na,maybe\nb,above\n",
            "id,value\na,1\nb,2\n",
            "unit_id,estimate\na,inf\nb,1\n",
        ],
    )
    def test_errors(self, text):
        with pytest.raises(EnsembleError):
            parse_estimates(text, ["a", "b"], 0.0)

    def test_round_trip(self):
        est = parse_estimates("unit_id,estimate\na,0.1\nb,-3\n", ["a", "b"], 0.0)
        again = parse_estimates(estimates_to_text(est), ["a", "b"], 0.0)
        assert np.array_equal(again.estimates, est.estimates)


def test_atomic_write_many_cleans_up(tmp_path):
    good = tmp_path / "one.txt"
    bad = tmp_path / "missing" / "two.txt"
    with pytest.raises(OSError):
        atomic_write_many({good: "x", bad: "y"})
    assert not good.exists()
    assert list(tmp_path.iterdir()) == []
