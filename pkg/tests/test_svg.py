import math

import pytest

from criticalcircuits import svg


def test_chart_is_deterministic():
    series = [("a", [0, 1, 2], [0.0, 1.0, 0.5]), ("b", [0, 1, 2], [1.0, 0.2, 0.7])]
    assert svg.line_chart(series) == svg.line_chart(series)


def test_chart_contains_polylines_and_labels():
    text = svg.line_chart([("curve", [0, 1], [0, 1])], title="T", xlabel="x", ylabel="y")
    assert text.startswith("<svg")
    assert "<polyline" in text
    assert ">curve<" in text and ">T<" in text


def test_nonfinite_points_break_the_line():
    text = svg.line_chart([("a", [0, 1, 2, 3, 4], [0.0, 1.0, math.nan, 2.0, 1.0])])
    assert text.count("<polyline") == 2


def test_empty_data_raises():
    with pytest.raises(ValueError):
        svg.line_chart([("a", [0.0], [math.nan])])


def test_write_chart(tmp_path):
    p = tmp_path / "c.svg"
    svg.write_chart(str(p), [("a", [0, 1], [0, 1])])
    assert p.read_text().startswith("<svg")
