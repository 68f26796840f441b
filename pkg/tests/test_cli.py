import csv
import gzip
import json
import math

import pytest

from lottoscan.cli import main
from lottoscan.ingest import FIELDS, PlayerProfile, write_profiles
from lottoscan.montecarlo import WinSimSpec, expected_outcome
from lottoscan.prizes import load_prize_tables

from conftest import claim


def write_claims_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(FIELDS)
        for r in rows:
            w.writerow(r)


def crow(winner, amount, lottery="Fixture", store="Mart", addr="1 Main", game_type="scratch_off"):
    return [winner, "Austin", "Travis", game_type, amount, lottery, "Austin", "2015-01-01", store, addr]


FIXTURE_TABLES = {"tables": [
    {"game_name": "Fixture", "game_type": "scratch_off", "ticket_cost": "5.00",
     "entries": [{"value": "10.00", "probability": 0.2}, {"value": "1000.00", "probability": 0.004}]},
    {"game_name": "Certain", "game_type": "scratch_off", "ticket_cost": "5.00",
     "entries": [{"value": "1000.00", "probability": 1.0}]},
]}


@pytest.fixture
def prizes(tmp_path):
    p = tmp_path / "prizes.json"
    p.write_text(json.dumps(FIXTURE_TABLES))
    return str(p)


def test_ingest_empty_file(tmp_path):
    claims = tmp_path / "c.csv"
    write_claims_csv(claims, [])
    assert main(["ingest", "--claims", str(claims), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "profiles.jsonl").read_text() == ""


def test_ingest_one_bad_row(tmp_path):
    claims = tmp_path / "c.csv"
    write_claims_csv(claims, [crow("A", "700"), crow("B", "500"), crow("C", "900")])
    out = tmp_path / "o"
    assert main(["ingest", "--claims", str(claims), "--out", str(out)]) == 2
    errors = list(csv.DictReader(open(out / "ingest_errors.csv")))
    assert len(errors) == 1 and errors[0]["row"] == "2"
    assert len((out / "profiles.jsonl").read_text().splitlines()) == 2
    prov = json.loads((out / "provenance" / "ingest.json").read_text())
    assert len(prov["inputs"]["claims"]["sha256"]) == 64 and prov["config"]["master_seed"] == 20200320


def test_fatal_schema_error(tmp_path, capsys):
    claims = tmp_path / "c.csv"
    claims.write_text("winner_id,prize_amount\nA,700\n")
    assert main(["ingest", "--claims", str(claims), "--out", str(tmp_path / "o")]) == 1
    assert "missing required column" in capsys.readouterr().err


def test_missing_stage_input_is_fatal(tmp_path):
    assert main(["screen", "--out", str(tmp_path / "nothing")]) == 1


def test_screen_worked_example(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    write_profiles({"A": PlayerProfile.from_wins("A", [claim("A", 600.0)])}, out / "profiles.jsonl")
    assert main(["screen", "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out / "screening.csv")))
    assert len(rows) == 1
    assert float(rows[0]["mean_net_gain"]) == pytest.approx(-4448.32, abs=0.005)
    assert (out / "flagged.txt").read_text() == ""
    for name in ("wins_survival", "stores_survival", "top_games", "entropy_ecdf",
                 "loss_entropy_scatter", "return_rates"):
        assert (out / "plots" / f"{name}.csv").exists()


def test_screen_explicit_box(tmp_path):
    claims = tmp_path / "c.csv"
    rows = [crow("Spread", "700", store=f"S{i}") for i in range(8)] + [crow("Loyal", "700")] * 8
    write_claims_csv(claims, rows)
    out = str(tmp_path / "o")
    main(["ingest", "--claims", str(claims), "--out", out])
    assert main(["screen", "--out", out, "--entropy-threshold", "1.7", "--loss-threshold", "3"]) == 0
    assert (tmp_path / "o" / "flagged.txt").read_text() == "Spread\n"
    summary = json.loads((tmp_path / "o" / "screen_summary.json").read_text())
    assert summary["big_players_B"] == 1 and summary["rule"]["calibrated"] is False


def _sim(tmp_path, prizes, lottery, reps, seed=1):
    claims = tmp_path / "c.csv"
    write_claims_csv(claims, [crow("A", "1000", lottery=lottery)])
    out = str(tmp_path / f"o{seed}")
    assert main(["ingest", "--claims", str(claims), "--out", out]) == 0
    assert main(["simulate", "--out", out, "--prizes", prizes, "--players", "all", "--mapping", "",
                 "--replicates", str(reps), "--seed", str(seed)]) == 0
    raw = list(csv.DictReader(open(tmp_path / f"o{seed}" / "simulation_raw.csv")))
    return raw, tmp_path / f"o{seed}"


def test_simulate_degenerate_table(tmp_path, prizes):
    (row,), _ = _sim(tmp_path, prizes, "Certain", 200)
    assert float(row["lower"]) == float(row["upper"]) == float(row["mean_net_gain"]) == 995.0
    assert row["B_used"] == "1"


def test_simulate_analytic_anchor_and_determinism(tmp_path, prizes):
    reps = 20000
    (row,), out = _sim(tmp_path, prizes, "Fixture", reps)
    table = load_prize_tables(prizes)["Fixture"]
    ex = expected_outcome(WinSimSpec(100000, table))
    se = math.sqrt(ex["net_var"] / reps)
    assert abs(float(row["mean_net_gain"]) - ex["net_mean"]) <= 4 * se
    first = (out / "simulation.csv").read_bytes()
    main(["simulate", "--out", str(out), "--prizes", prizes, "--players", "all", "--mapping", "",
          "--replicates", str(reps), "--seed", "1"])
    assert (out / "simulation.csv").read_bytes() == first
    rounded = list(csv.DictReader(open(out / "simulation.csv")))[0]
    assert int(rounded["mean_net_gain"]) % 1000 == 0


def test_simulate_dump_totals(tmp_path, prizes):
    _, out = _sim(tmp_path, prizes, "Fixture", 50)
    main(["simulate", "--out", str(out), "--prizes", prizes, "--players", "A", "--mapping", "",
          "--replicates", "50", "--dump-totals"])
    rows = list(csv.DictReader(open(out / "totals" / "A.csv")))
    assert len(rows) == 50 and rows[0]["replicate"] == "0"


def test_unknown_player_is_fatal(tmp_path, prizes):
    _, out = _sim(tmp_path, prizes, "Fixture", 10)
    assert main(["simulate", "--out", str(out), "--prizes", prizes, "--players", "nobody"]) == 1


def test_config_precedence(tmp_path):
    from lottoscan.config import RunConfig

    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"k": 7}))
    cfg = RunConfig.resolve({"k": 9, "restarts": 3}, str(cfg_file))
    assert cfg.k == 7 and cfg.restarts == 3 and cfg.replicates == 60000
    prov = tmp_path / "prov.json"
    prov.write_text(json.dumps({"stage": "x", "config": {"k": 11}}))
    assert RunConfig.resolve({}, str(prov)).k == 11
    cfg_file.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        RunConfig.resolve({}, str(cfg_file))


def test_synth_small(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"synth": {"n_honest": 50, "n_discounters": 2, "target_claims": None}}))
    out = tmp_path / "o"
    assert main(["synth", "--config", str(cfg), "--out", str(out)]) == 0
    with gzip.open(out / "synthetic_manifest.json.gz", "rt") as fh:
        assert json.load(fh)["n_players"] == 52


def _tree(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_pipeline_equals_stages_and_replays_from_provenance(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps({"synth": {"n_honest": 600, "n_discounters": 6, "target_claims": None,
                                         "habitual_share": 0.3, "n_stores": 400,
                                         "discounter_store_spread": [30, 40]}}))
    main(["synth", "--config", str(cfg), "--out", str(tmp_path / "s")])
    claims = str(tmp_path / "s" / "synthetic_claims.csv.gz")
    common = ["--claims", claims, "--replicates", "3000", "--k", "6", "--k-values", "4,6",
              "--restarts", "5", "--flag-top", "3"]
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["pipeline", "--out", str(a), *common]) == 0
    for stage in ("ingest", "screen", "cluster"):
        assert main([stage, "--out", str(b), *common]) == 0
    assert main(["simulate", "--out", str(b), *common]) == 0
    assert _tree(a) == _tree(b)
    assert main(["pipeline", "--out", str(c), "--config", str(a / "provenance" / "simulate.json")]) == 0
    assert _tree(a) == _tree(c)
    assert (a / "simulation_raw.csv").read_text().count("\n") == 1 + len(
        set((a / "flagged.txt").read_text().split()) | set((a / "expansion.txt").read_text().split()))
