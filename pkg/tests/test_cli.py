"""CLI tests: subcommands, CSV schemas, determinism, exit codes."""

import csv
import os
import subprocess
import sys

import pytest

from semdiff.cli import main


def run_cli(args, out_dir):
    env_backup = os.environ.get("SEMDIFF_OUT_DIR")
    os.environ["SEMDIFF_OUT_DIR"] = str(out_dir)
    try:
        return main(args)
    finally:
        if env_backup is None:
            os.environ.pop("SEMDIFF_OUT_DIR", None)
        else:
            os.environ["SEMDIFF_OUT_DIR"] = env_backup


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestSimulateCommand:
    def test_trace_schema_and_bytes_reproducible(self, tmp_path):
        assert run_cli(["simulate", "--n", "41", "--target-index", "0", "--seed", "7"], tmp_path) == 0
        first = (tmp_path / "trace.csv").read_bytes()
        assert run_cli(["simulate", "--n", "41", "--target-index", "0", "--seed", "7"], tmp_path) == 0
        assert (tmp_path / "trace.csv").read_bytes() == first

        rows = read_csv(tmp_path / "trace.csv")
        assert rows[0] == [
            "step", "a", "b", "x", "power", "direction", "dx", "snapped_x", "action",
            "tool_version", "seed",
        ]
        assert all(row[-1] == "7" for row in rows[1:])

    def test_erroneous_tolerant_run(self, tmp_path):
        code = run_cli(
            [
                "simulate", "--n", "41", "--target-index", "28", "--seed", "3",
                "--algorithm", "tolerant", "--policy", "erroneous", "--p-err", "0.2",
                "--out", "err.csv",
            ],
            tmp_path,
        )
        assert code == 0
        rows = read_csv(tmp_path / "err.csv")
        assert len(rows) > 1


class TestCompareCommand:
    def test_headline_line_and_schema(self, tmp_path, capsys):
        code = run_cli(["compare", "--n", "9", "--weights", "0.250,0.361,0.444"], tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "win_rate=0.444" in out
        assert "4/1/4" in out
        rows = read_csv(tmp_path / "comparison.csv")
        assert rows[0][:5] == ["n", "target_index", "t_fuzzy", "t_binary", "outcome"]
        assert len(rows) == 10
        outcomes = [r[4] for r in rows[1:]]
        assert outcomes.count("win") == 4
        assert outcomes.count("tie") == 1

    def test_default_conventions_flag(self, tmp_path, capsys):
        code = run_cli(
            ["compare", "--n", "9", "--weights", "0.250,0.361,0.444", "--conventions", "default"],
            tmp_path,
        )
        assert code == 0
        assert "binary=index_halving" in capsys.readouterr().out


class TestOptimizeCommand:
    def test_small_grid(self, tmp_path, capsys):
        code = run_cli(["optimize-weights", "--n", "5", "--resolution", "0.1"], tmp_path)
        assert code == 0
        rows = read_csv(tmp_path / "optimum.csv")
        assert rows[0][:8] == [
            "n", "w_slightly", "w_moderately", "w_significantly", "wins", "draws", "losses", "win_rate",
        ]
        assert len(rows) == 2


class TestReproduceCommand:
    def test_table4_final_row(self, tmp_path):
        assert run_cli(["reproduce-tables", "--table", "4"], tmp_path) == 0
        rows = read_csv(tmp_path / "table4.csv")
        assert rows[0][:9] == [
            "step", "a", "b", "x", "power", "direction", "dx", "snapped_x", "flag",
        ]
        final = rows[-1]
        assert final[0] == "5"
        assert float(final[7]) == pytest.approx(0.40)

    def test_table5_divergences_documented(self, tmp_path):
        assert run_cli(["reproduce-tables", "--table", "5"], tmp_path) == 0
        report = (tmp_path / "divergence_report.txt").read_text()
        assert "row 0" in report
        assert "row 7" in report
        assert "rows 5-6" in report
        rows = read_csv(tmp_path / "table5.csv")
        assert len(rows) == 10
        assert float(rows[-1][7]) == pytest.approx(-0.45)

    def test_all_tables(self, tmp_path):
        assert run_cli(["reproduce-tables", "--table", "all"], tmp_path) == 0
        for name in ("table1.csv", "table2.csv", "table3.csv", "table4.csv", "table5.csv"):
            assert (tmp_path / name).exists()

    def test_reproducible_bytes(self, tmp_path):
        run_cli(["reproduce-tables", "--table", "4"], tmp_path)
        first = (tmp_path / "table4.csv").read_bytes()
        run_cli(["reproduce-tables", "--table", "4"], tmp_path)
        assert (tmp_path / "table4.csv").read_bytes() == first


class TestCalibrateCommand:
    def test_report_written(self, tmp_path, capsys):
        assert run_cli(["calibrate-binary"], tmp_path) == 0
        out = capsys.readouterr().out
        assert "protocol_halving_confirm" in out
        rows = read_csv(tmp_path / "calibration.csv")
        header = rows[0]
        assert header[:2] == ["fuzzy_stop", "binary_convention"]
        assert any(r[5] == "True" for r in rows[1:])  # one pair reproduces the headline


class TestUsageErrors:
    def test_bad_flags_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "semdiff.cli", "compare", "--n"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2

    def test_bad_weights_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "semdiff.cli", "compare", "--n", "9", "--weights", "1,2"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
