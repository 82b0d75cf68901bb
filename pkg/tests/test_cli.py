import json
from pathlib import Path

import numpy as np
import pytest

from evtwin.cli import main, parse_seeds

SCENARIO = {
    "schema_version": 1,
    "nb_electrical": 40,
    "nb_gasoline": 10,
    "rng_seed": 3,
    "areas": [
        {"area_id": "C-Parking", "n_ports_11kw": 10, "n_ports_30kw": 2},
        {"area_id": "J-Parking", "n_ports_11kw": 6, "n_ports_30kw": 2},
    ],
    "energy": {"pv": {"nb_solar": 200}},
}


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(SCENARIO), encoding="utf-8")
    return p


class TestParseSeeds:
    def test_forms(self):
        assert parse_seeds("7") == [7]
        assert parse_seeds("1,2,9") == [1, 2, 9]
        assert parse_seeds("0:4") == [0, 1, 2, 3]


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["run", "--frobnicate"]) == 1

    def test_unknown_command_is_usage_error(self):
        assert main(["explode"]) == 1

    def test_runtime_failure_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}", encoding="utf-8")  # no areas -> validation error
        assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2

    def test_help_is_success(self):
        assert main(["--help"]) == 0


class TestRunCommand:
    def test_outputs_and_determinism(self, scenario_file, tmp_path, capsys):
        out1 = tmp_path / "r1"
        out2 = tmp_path / "r2"
        assert main(["run", "--config", str(scenario_file), "--seed", "7",
                     "--out", str(out1)]) == 0
        assert main(["run", "--config", str(scenario_file), "--seed", "7",
                     "--out", str(out2)]) == 0
        for name in ("day_reports.jsonl", "metrics.json", "events.jsonl"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        assert (out1 / "run_days.png").exists()
        assert (out1 / "run_days.png").read_bytes() == (out2 / "run_days.png").read_bytes()

    def test_seed_changes_results(self, scenario_file, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(scenario_file), "--seed", "1", "--out", str(out1)])
        main(["run", "--config", str(scenario_file), "--seed", "2", "--out", str(out2)])
        assert (out1 / "day_reports.jsonl").read_bytes() != (out2 / "day_reports.jsonl").read_bytes()

    def test_csv_format(self, scenario_file, tmp_path):
        out = tmp_path / "csv"
        assert main(["run", "--config", str(scenario_file), "--format", "csv",
                     "--out", str(out)]) == 0
        assert (out / "day_reports.csv").exists()


class TestBatchCommand:
    def test_replicates(self, scenario_file, tmp_path):
        out = tmp_path / "batch"
        assert main(["batch", "--config", str(scenario_file), "--seeds", "0:3",
                     "--out", str(out)]) == 0
        lines = (out / "batch_summary.jsonl").read_text().strip().splitlines()
        assert len(lines) == 3


class TestPolicySweepCommand:
    def test_small_sweep(self, scenario_file, tmp_path):
        out = tmp_path / "sweep"
        assert main([
            "policy-sweep", "--config", str(scenario_file),
            "--levels", "40", "--cases", "0,5", "--seeds", "0:2",
            "--out", str(out),
        ]) == 0
        summary = [json.loads(l) for l in (out / "policy_summary.jsonl").read_text().splitlines()]
        assert len(summary) == 2
        assert (out / "policy_sweep.png").exists()
        assert (out / "policy_wilcoxon.jsonl").exists()


class TestStatsCommands:
    def test_wilcoxon_files(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        rng = np.random.default_rng(0)
        x = rng.normal(size=12)
        np.savetxt(a, x)
        np.savetxt(b, x + rng.normal(0.4, 1.0, 12))
        assert main(["stats", "wilcoxon", "--a", str(a), "--b", str(b)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert 0 < out["p_value"] <= 1
        assert out["method"] == "exact"

    def test_sobol_ishigami(self, tmp_path, capsys):
        assert main(["stats", "sobol", "--ishigami", "--n-base", "256",
                     "--out", str(tmp_path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert len(out["st"]) == 3


class TestSiteCommand:
    def test_export(self, tmp_path):
        assert main(["site", "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "site.geojson").read_text())
        assert doc["type"] == "FeatureCollection"


class TestGridBestTable:
    def test_multi_level_best_table(self, tmp_path):
        # tiny space through the real CLI via monkeypatched registry
        import evtwin.cli as cli_mod
        from evtwin.optimize import Dimension, SearchSpace

        tiny = SearchSpace(
            (Dimension("n11_C", 4, 6, 2), Dimension("n30_C", 0, 2, 2),
             Dimension("solar", 50, 100, 50))
        )
        old = cli_mod.SPACES
        cli_mod.SPACES = {**old, "tiny": lambda: tiny}
        try:
            out = tmp_path / "g"
            assert main(["grid", "--space", "tiny", "--ev", "30,40", "--out", str(out)]) == 0
            table = (out / "grid_tiny_best.csv").read_text().splitlines()
            assert table[0] == ",30 EVs,40 EVs"
            assert any(row.startswith("No. Solar Panels") for row in table)
            assert any(row.startswith("Objective Function") for row in table)
            assert (out / "grid_tiny_ev30.jsonl").exists()
            assert (out / "grid_tiny_ev40.jsonl").exists()
        finally:
            cli_mod.SPACES = old
