"""Command-line harness: flags, CSV schema, presets, verify groups."""

import csv
import math
import subprocess
import sys
from fractions import Fraction

import pytest

from parelm import marching
from parelm.cli import main
from parelm.presets import PRESET_NAMES, load_preset


def read_csv(path):
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


class TestSolveCommand:
    def test_single_run_record(self, tmp_path):
        out = tmp_path / "run.csv"
        rc = main([
            "solve", "--problem", "c", "--scheme", "BE", "--neurons", "40",
            "--dt", "0.1", "--seed", "1000", "--out", str(out),
        ])
        assert rc == 0
        header, rows = read_csv(out)
        assert header == ["scheme", "N", "dt", "Nt", "linf_error", "walltime_s", "seed", "observed_order"]
        assert len(rows) == 1
        assert rows[0][0] == "BE"
        assert rows[0][3] == "10"
        assert float(rows[0][4]) < 1e-6

    def test_unknown_scheme_is_a_hard_error(self, capsys):
        rc = main([
            "solve", "--problem", "a", "--gamma", "3", "--scheme", "BDF7",
            "--neurons", "40", "--dt", "0.1",
        ])
        assert rc == 2
        assert "k must be in [1, 6]" in capsys.readouterr().err

    def test_unknown_problem_is_a_hard_error(self, capsys):
        rc = main(["solve", "--problem", "z", "--scheme", "BE", "--neurons", "40", "--dt", "0.1"])
        assert rc == 2
        assert "unknown problem" in capsys.readouterr().err

    def test_unknown_flag_is_a_hard_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["solve", "--problem", "c", "--scheme", "BE", "--neurons", "40",
                  "--dt", "0.1", "--frobnicate", "1"])
        assert exc.value.code == 2

    def test_trapezoidal_on_discontinuous_problem_completes(self, tmp_path):
        out = tmp_path / "b.csv"
        rc = main([
            "solve", "--problem", "b", "--scheme", "TR", "--neurons", "40",
            "--dt", "0.01", "--seed", "1000", "--out", str(out),
        ])
        assert rc == 0
        _, rows = read_csv(out)
        assert rows[0][4] != ""  # error field present

    def test_non_divisible_horizon_rejected(self, capsys):
        rc = main(["solve", "--problem", "c", "--scheme", "BE", "--neurons", "40", "--dt", "0.3"])
        assert rc == 2
        assert "integer multiple" in capsys.readouterr().err

    def test_series_terms_flag(self, tmp_path):
        out = tmp_path / "b.csv"
        rc = main(["solve", "--problem", "b", "--terms", "30", "--scheme", "BE",
                   "--neurons", "40", "--dt", "0.1", "--out", str(out)])
        assert rc == 0

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "run.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "parelm.cli", "solve", "--problem", "c", "--scheme", "BE",
             "--neurons", "40", "--dt", "0.1", "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.exists()


class TestStudyCommand:
    def test_explicit_sweep_rows_and_orders(self, tmp_path):
        rc = main([
            "study", "--problem", "a", "--gamma", "3", "--scheme", "BDF2",
            "--dt-list", "0.1,0.05,0.025", "--neurons", "40",
            "--out-dir", str(tmp_path), "--no-timestamp",
        ])
        assert rc == 0
        header, rows = read_csv(tmp_path / "custom_custom.csv")
        assert len(rows) == 3
        errs = [float(r[4]) for r in rows]
        orders = [r[7] for r in rows]
        assert orders[0] == ""
        # the order column must be the dyadic log-ratio of the run's own errors
        for i in (1, 2):
            assert float(orders[i]) == pytest.approx(math.log2(errs[i - 1] / errs[i]), abs=1e-3)
        assert 1.6 <= float(orders[2]) <= 2.4

    def test_preset_fig2_emits_both_panels_with_all_schemes(self, tmp_path):
        rc = main(["study", "--preset", "fig2", "--out-dir", str(tmp_path), "--no-timestamp"])
        assert rc == 0
        for panel in ("gamma3", "gamma5"):
            header, rows = read_csv(tmp_path / f"fig2_{panel}.csv")
            schemes = {r[0] for r in rows}
            assert schemes == {"BE", "TR", "BDF2", "BDF3", "BDF4"}
            assert len(rows) == 25  # 5 schemes x 5 step sizes

    def test_preset_fig3_emits_two_neuron_budgets(self, tmp_path):
        rc = main(["study", "--preset", "fig3", "--out-dir", str(tmp_path), "--no-timestamp"])
        assert rc == 0
        _, rows40 = read_csv(tmp_path / "fig3_N40.csv")
        _, rows50 = read_csv(tmp_path / "fig3_N50.csv")
        assert {r[1] for r in rows40} == {"40"}
        assert {r[1] for r in rows50} == {"50"}

    def test_byte_identical_output_without_timestamp(self, tmp_path):
        argv = ["study", "--problem", "c", "--scheme", "BE", "--dt-list", "0.1,0.05",
                "--neurons", "40", "--no-timestamp"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(argv + ["--out-dir", str(a)]) == 0
        assert main(argv + ["--out-dir", str(b)]) == 0
        assert (a / "custom_custom.csv").read_bytes() == (b / "custom_custom.csv").read_bytes()

    def test_plot_is_a_pure_function_of_the_csv(self, tmp_path):
        argv = ["study", "--problem", "c", "--scheme", "BE", "--scheme", "TR",
                "--dt-list", "0.1,0.05", "--neurons", "40", "--no-timestamp", "--plot"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(argv + ["--out-dir", str(a)]) == 0
        assert main(argv + ["--out-dir", str(b)]) == 0
        svg_a = (a / "custom_custom.svg").read_bytes()
        svg_b = (b / "custom_custom.svg").read_bytes()
        assert svg_a == svg_b
        assert svg_a.startswith(b"<?xml")

    def test_parallel_jobs_accepted(self, tmp_path):
        rc = main(["study", "--problem", "c", "--scheme", "BE", "--dt-list", "0.1,0.05",
                   "--neurons", "40", "--jobs", "2", "--out-dir", str(tmp_path), "--no-timestamp"])
        assert rc == 0

    def test_empty_sweep_rejected(self, capsys):
        rc = main(["study", "--problem", "c", "--scheme", "BE", "--dt-list", "", "--neurons", "40"])
        assert rc == 2

    def test_study_requires_preset_or_sweep(self, capsys):
        assert main(["study"]) == 2


class TestPresets:
    def test_all_presets_load(self):
        for name in PRESET_NAMES:
            preset = load_preset(name)
            assert preset.name == name
            assert preset.panels

    def test_preset_configurations(self):
        fig1 = load_preset("fig1")
        assert [p.panel for p in fig1.panels] == ["BE", "BDF2", "BDF3"]
        assert all(p.n_list == tuple(range(10, 51, 5)) for p in fig1.panels)
        fig4 = load_preset("fig4")
        assert [p.problem for p in fig4.panels] == ["b", "c"]

    def test_unknown_preset_rejected(self):
        with pytest.raises(ValueError):
            load_preset("fig9")


class TestVerifyCommand:
    def test_fresh_checkout_passes(self, capsys):
        assert main(["verify"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 4
        assert "[FAIL]" not in out

    def test_group_filter(self, capsys):
        assert main(["verify", "--group", "least-squares"]) == 0
        out = capsys.readouterr().out
        assert out.count("[PASS]") == 1
        assert "least-squares" in out

    def test_corrupted_coefficient_table_is_caught(self, capsys, monkeypatch):
        a, b, angle = marching._BDF_EXACT[2]
        bad = ((a[0] + Fraction(1, 100),) + a[1:], b, angle)
        monkeypatch.setitem(marching._BDF_EXACT, 2, bad)
        rc = main(["verify", "--group", "bdf-order-conditions"])
        captured = capsys.readouterr()
        assert rc != 0
        assert "bdf-order-conditions" in captured.out + captured.err
