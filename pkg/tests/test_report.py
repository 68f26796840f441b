import json

import pytest

from lottoscan.montecarlo import SimulationSummary
from lottoscan.report import (ecdf_rows, high_entropy_cluster_rows, format_k, read_table, round_thousands,
                              simulation_table_text, survival_counts, top_games, write_table)
from lottoscan.screen import ScreeningResult

from conftest import profile_from_counts


def test_survival_counts():
    assert survival_counts([1, 1, 2, 5]) == [
        {"x": 1, "count": 4}, {"x": 2, "count": 2}, {"x": 3, "count": 1},
        {"x": 4, "count": 1}, {"x": 5, "count": 1}]
    assert survival_counts([]) == []


@pytest.mark.parametrize("dollars,expected", [
    (-715_432.1, -715_000), (-715_500, -716_000), (499.99, 0), (500, 1000), (-500, -1000), (0, 0)])
def test_round_thousands(dollars, expected):
    assert round_thousands(dollars) == expected


def test_format_k():
    assert format_k(-715_432) == "-$715K" and format_k(96_123) == "$96K" and format_k(0) == "$0K"


def test_write_table_csv_and_json(tmp_path):
    rows = [{"a": 1, "b": 0.1, "c": True}, {"a": 2, "b": None, "c": False}]
    write_table(rows, ["a", "b", "c"], tmp_path / "t.csv", tmp_path / "t.json")
    assert (tmp_path / "t.csv").read_text() == "a,b,c\n1,0.1,true\n2,,false\n"
    assert read_table(tmp_path / "t.csv")[0] == {"a": "1", "b": "0.1", "c": "true"}
    assert json.loads((tmp_path / "t.json").read_text()) == rows


def test_top_games_and_ecdf_rows():
    profs = {"a": profile_from_counts("a", [3], lottery="X"), "b": profile_from_counts("b", [1], lottery="Y")}
    assert top_games(profs) == [{"lottery_name": "X", "wins": 3}, {"lottery_name": "Y", "wins": 1}]
    assert ecdf_rows([(0.0, 0.5), (1.0, 1.0)])[1] == {"entropy": 1.0, "fraction": 1.0}


def test_high_entropy_cluster_rows_filter_and_tags():
    res = [ScreeningResult(p, -1e5, [], e, 5.0, 10, 5, 0.0) for p, e in
           [("a", 3.0), ("b", 2.5), ("c", 2.49), ("d", 4.0)]]
    rows = high_entropy_cluster_rows(res, {"a": 1, "b": 2}, {1})
    assert [(r["player_id"], r["cluster_tag"]) for r in rows] == [
        ("a", "flag-cluster"), ("b", "other-cluster"), ("d", "none")]


def test_simulation_table_text():
    s = SimulationSummary("Winner 1", 60000, -715_400.0, -900_100.0, -500_000.0, 0.5, 99.5, 20,
                          win_count=277, total_reported_winnings=350_600.0)
    text = simulation_table_text([s])
    assert "Winner 1 | 277" in text and "-$715K" in text and "-$900K" in text and "$351K" in text
