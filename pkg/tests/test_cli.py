"""Command-line front end: config handling, subcommands, exit codes."""

import csv
import json

import pytest

from ratiopt.cli import (
    PRESETS,
    ConfigError,
    RunManifest,
    main,
    parse_config_file,
)
from ratiopt.expkit.realdata import smoke_dataset_path

SOLVE_ARGS = ["--family", "gaussian", "--m", "32", "--n", "96", "--s", "3",
              "--coherence", "0.8", "--gamma", "1e-3", "--beta", "0.05"]


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        rows = list(csv.reader(fh))
    return first, rows[0], rows[1:]


class TestConfigFile:
    def test_parse_and_coerce(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\ngamma = 1e-3\nm_list = 32,64\nsolver=admm\n")
        parsed = parse_config_file(str(cfg))
        assert parsed == {"gamma": 1e-3, "m_list": [32, 64], "solver": "admm"}

    def test_unknown_key_named(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("bogus = 1\n")
        with pytest.raises(ConfigError, match="bogus"):
            parse_config_file(str(cfg))

    def test_line_diagnostics(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("gamma = 1e-3\nnot a pair\n")
        with pytest.raises(ConfigError, match=":2:"):
            parse_config_file(str(cfg))

    def test_bad_value(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m = not-an-int\n")
        with pytest.raises(ConfigError, match="m"):
            parse_config_file(str(cfg))


class TestManifest:
    def test_hash_ignores_timestamps(self):
        a = RunManifest("solve", {"gamma": 1e-3}, 0, "0.1.0", "t1")
        b = RunManifest("solve", {"gamma": 1e-3}, 0, "0.1.0", "t2",
                        finished="t3")
        assert a.hash == b.hash

    def test_hash_covers_config(self):
        a = RunManifest("solve", {"gamma": 1e-3}, 0, "0.1.0", "t")
        b = RunManifest("solve", {"gamma": 1e-4}, 0, "0.1.0", "t")
        assert a.hash != b.hash


class TestPresets:
    def test_expected_presets_present(self):
        assert {"table1-gaussian", "table1-odct", "fig3-noisy",
                "sec5b-identify", "fig2-profiles"} <= set(PRESETS)

    def test_table1_regime(self):
        p = PRESETS["table1-gaussian"]
        assert (p["m"], p["n"], p["s"]) == (256, 2048, 12)
        assert p["gamma"] == 1e-4 and p["beta"] == 0.015


class TestSolveCommand:
    def test_small_instance_outputs(self, tmp_path):
        out = tmp_path / "out"
        code = main(["solve", *SOLVE_ARGS, "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["converged"] and report["nnz"] >= 1
        assert report["manifest"]["hash"]
        first, header, rows = read_csv(out / "series.csv")
        assert first.startswith("# manifest_hash=")
        assert header[0] == "iteration" and len(rows) >= 1

    def test_imax_zero_exit_2(self, tmp_path):
        code = main(["solve", *SOLVE_ARGS, "--solver", "admm",
                     "--imax", "0", "--out", str(tmp_path / "o")])
        assert code == 2
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["iterations"] == 0

    def test_malformed_config_exit_1(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("mystery = 3\n")
        code = main(["solve", "--config", str(cfg),
                     "--out", str(tmp_path / "o")])
        assert code == 1
        assert "mystery" in capsys.readouterr().err

    def test_missing_required_key_exit_1(self, tmp_path):
        assert main(["solve", "--out", str(tmp_path / "o")]) == 1

    def test_unknown_solver_exit_1(self, tmp_path):
        code = main(["solve", *SOLVE_ARGS, "--solver", "bogus",
                     "--out", str(tmp_path / "o")])
        assert code == 1

    def test_determinism(self, tmp_path):
        main(["solve", *SOLVE_ARGS, "--out", str(tmp_path / "a")])
        main(["solve", *SOLVE_ARGS, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "series.csv").read_text() == \
            (tmp_path / "b" / "series.csv").read_text()

    def test_seed_precedence(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 5\n")

        def seed_of(out):
            report = json.loads((out / "report.json").read_text())
            return report["manifest"]["seed"]

        main(["solve", *SOLVE_ARGS, "--config", str(cfg),
              "--out", str(tmp_path / "f")])
        assert seed_of(tmp_path / "f") == 5
        monkeypatch.setenv("RATIOPT_SEED", "7")
        main(["solve", *SOLVE_ARGS, "--config", str(cfg),
              "--out", str(tmp_path / "e")])
        assert seed_of(tmp_path / "e") == 7
        main(["solve", *SOLVE_ARGS, "--config", str(cfg), "--seed", "9",
              "--out", str(tmp_path / "s")])
        assert seed_of(tmp_path / "s") == 9


class TestIdentifyCommand:
    def test_tiny_grid(self, tmp_path):
        out = tmp_path / "out"
        code = main(["identify", "--m-list", "24", "--s-list", "2",
                     "--T-list", "5", "--seeds", "2", "--n", "96",
                     "--out", str(out)])
        assert code == 0
        _, header, rows = read_csv(out / "identify_heatmap.csv")
        assert header[:3] == ["m", "s", "T"] and len(rows) == 1
        assert 0.0 <= float(rows[0][5]) <= 1.0

    def test_empty_grid_exit_1(self, tmp_path):
        code = main(["identify", "--m-list", "", "--out", str(tmp_path / "o")])
        assert code == 1

    def test_single_seed_deterministic(self, tmp_path):
        args = ["identify", "--m-list", "24", "--s-list", "2", "--T-list",
                "5", "--seeds", "1", "--n", "64"]
        main([*args, "--out", str(tmp_path / "a")])
        main([*args, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "identify_heatmap.csv").read_text() == \
            (tmp_path / "b" / "identify_heatmap.csv").read_text()


class TestProfileCommand:
    ARGS = ["profile", "--m", "24", "--n", "96", "--s-list", "3",
            "--seeds", "1", "--gamma", "1e-3", "--beta", "0.05",
            "--imax", "20000"]

    def test_curve_csv_well_formed(self, tmp_path):
        out = tmp_path / "out"
        assert main([*self.ARGS, "--out", str(out)]) == 0
        _, header, rows = read_csv(out / "profile_curves.csv")
        assert header == ["tau", "solver", "pi"]
        by_solver = {}
        for tau, solver, pi in rows:
            by_solver.setdefault(solver, []).append(float(pi))
        for curve in by_solver.values():
            assert all(b >= a for a, b in zip(curve, curve[1:]))
            assert max(curve) <= 1.0

    def test_single_solver_flat(self, tmp_path):
        out = tmp_path / "out"
        assert main([*self.ARGS, "--solver", "admm", "--out", str(out)]) == 0
        _, _, rows = read_csv(out / "profile_curves.csv")
        assert all(float(pi) == 1.0 for _, _, pi in rows)


class TestRealdataCommand:
    def test_table_rows(self, tmp_path):
        out = tmp_path / "out"
        code = main(["realdata", "--data", str(smoke_dataset_path()),
                     "--gamma", "1e-3", "--out", str(out)])
        assert code == 0
        _, header, rows = read_csv(out / "realdata_table.csv")
        assert header[:2] == ["repetition", "solver"]
        assert [r[1] for r in rows] == ["admm", "admm-l1", "hafam"]
        assert all(float(r[3]) >= 0.0 for r in rows)

    def test_missing_data_exit_1(self, tmp_path):
        assert main(["realdata", "--out", str(tmp_path / "o")]) == 1

    def test_bad_split_ratio_exit_1(self, tmp_path):
        code = main(["realdata", "--data", str(smoke_dataset_path()),
                     "--split-ratio", "1.5", "--out", str(tmp_path / "o")])
        assert code == 1

    def test_missing_file_exit_1(self, tmp_path):
        code = main(["realdata", "--data", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "o")])
        assert code == 1
