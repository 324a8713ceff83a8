import json

import numpy as np
import pytest

from trendflag import RunConfig, read_report, run_scan, simulate_trend_series
from trendflag.cli import main
from trendflag.io import format_float
from trendflag.plotting import build_figure, held_out_point_count, write_plot


@pytest.fixture
def panel_csv(tmp_path):
    rows = ["year,alpha,beta"]
    series = [
        simulate_trend_series(40, order=2, q=0.08, r=1.0, seed=31 + i, start_epoch=1980)[0]
        for i in range(2)
    ]
    for i, year in enumerate(range(1980, 2020)):
        rows.append(f"{year},{format_float(series[0].values[i])},{format_float(series[1].values[i])}")
    path = tmp_path / "panel.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


def scan_args(panel_csv, tmp_path, *extra):
    return [
        "scan",
        "--panel", str(panel_csv),
        "--train-end", "2016",
        "--horizon", "3",
        "--mc-draws", "300",
        "--mc-reps", "10",
        "--report", str(tmp_path / "report.json"),
        "--summary", str(tmp_path / "summary.csv"),
        *extra,
    ]


class TestScanCommand:
    def test_writes_report_and_summary(self, panel_csv, tmp_path, capsys):
        assert main(scan_args(panel_csv, tmp_path)) == 0
        out = capsys.readouterr().out
        assert "scanned 2 series" in out
        payload = read_report(tmp_path / "report.json")
        assert set(payload["series"]) == {"alpha", "beta"}
        assert (tmp_path / "summary.csv").read_text().startswith("series,year")

    def test_two_runs_are_byte_identical(self, panel_csv, tmp_path):
        assert main(scan_args(panel_csv, tmp_path)) == 0
        first = (tmp_path / "report.json").read_bytes()
        first_csv = (tmp_path / "summary.csv").read_bytes()
        assert main(scan_args(panel_csv, tmp_path)) == 0
        assert (tmp_path / "report.json").read_bytes() == first
        assert (tmp_path / "summary.csv").read_bytes() == first_csv

    def test_missing_train_end_is_a_config_error(self, panel_csv, tmp_path, capsys):
        code = main(["scan", "--panel", str(panel_csv)])
        assert code == 1
        assert "train-end" in capsys.readouterr().err

    def test_malformed_panel_is_a_parse_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("time,a\n2000,1\n", encoding="utf-8")
        assert main(scan_args(bad, tmp_path)) == 1

    def test_unwritable_output_is_an_io_error(self, panel_csv, tmp_path):
        args = scan_args(panel_csv, tmp_path)
        args[args.index("--report") + 1] = str(tmp_path / "missing-dir" / "report.json")
        assert main(args) == 2

    def test_missing_panel_file_is_an_io_error(self, tmp_path):
        assert main(scan_args(tmp_path / "absent.csv", tmp_path)) == 2

    def test_config_file_supplies_defaults_and_flags_win(self, panel_csv, tmp_path):
        config = {
            "panel": str(panel_csv),
            "trainEnd": 2016,
            "horizon": 3,
            "mcDraws": 300,
            "mcReps": 10,
            "seed": 7,
            "report": str(tmp_path / "from_config.json"),
            "summary": str(tmp_path / "from_config.csv"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        assert main(["scan", "--config", str(cfg_path)]) == 0
        payload = read_report(tmp_path / "from_config.json")
        assert payload["meta"]["config"]["seed"] == 7
        # a flag overrides the config value
        assert main(["scan", "--config", str(cfg_path), "--seed", "9"]) == 0
        payload = read_report(tmp_path / "from_config.json")
        assert payload["meta"]["config"]["seed"] == 9

    def test_env_var_selects_default_config(self, panel_csv, tmp_path, monkeypatch):
        config = {
            "panel": str(panel_csv),
            "trainEnd": 2016,
            "mcDraws": 200,
            "mcReps": 5,
            "report": str(tmp_path / "env.json"),
            "summary": str(tmp_path / "env.csv"),
        }
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        monkeypatch.setenv("TRENDFLAG_CONFIG", str(cfg_path))
        assert main(["scan"]) == 0
        assert (tmp_path / "env.json").exists()

    def test_unknown_flag_is_a_config_error(self, panel_csv, tmp_path):
        assert main(["scan", "--bogus", "1"]) == 1

    def test_grid_and_bands_flags(self, panel_csv, tmp_path):
        args = scan_args(panel_csv, tmp_path, "--grid", "0.1:0.3:0.1",
                         "--bands", "99%:2.58,90%:1.64")
        assert main(args) == 0
        payload = read_report(tmp_path / "report.json")
        assert payload["meta"]["config"]["qGrid"] == {"min": 0.1, "max": 0.3, "step": 0.1}
        assert payload["meta"]["config"]["bands"] == [["99%", 2.58], ["90%", 1.64]]
        forecast = payload["series"]["alpha"]["forecast"][0]
        assert list(forecast["bands"]) == ["99%", "90%"]

    def test_malformed_grid_flag(self, panel_csv, tmp_path):
        assert main(scan_args(panel_csv, tmp_path, "--grid", "0.1-0.3")) == 1


class TestFitCommand:
    def test_prints_one_row_per_series(self, panel_csv, capsys):
        assert main(["fit", "--panel", str(panel_csv), "--train-end", "2016"]) == 0
        out = capsys.readouterr().out
        assert "qRatio" in out
        assert "alpha" in out and "beta" in out

    def test_selection(self, panel_csv, capsys):
        assert main(["fit", "--panel", str(panel_csv), "--series", "alpha"]) == 0
        out = capsys.readouterr().out
        assert "alpha" in out and "beta" not in out


class TestAnomalyCommand:
    def test_stdout_csv(self, panel_csv, capsys):
        assert main(["anomaly", "--panel", str(panel_csv)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "year,alpha,beta"
        assert len(lines) == 41
        values = np.array([float(line.split(",")[1]) for line in lines[1:]])
        assert abs(values.sum()) < 1e-9

    def test_window_flag(self, panel_csv, tmp_path):
        out = tmp_path / "anom.csv"
        code = main([
            "anomaly", "--panel", str(panel_csv), "--window", "1980:2016",
            "--out", str(out),
        ])
        assert code == 0
        assert out.read_text().splitlines()[0] == "year,alpha,beta"

    def test_bad_window(self, panel_csv):
        assert main(["anomaly", "--panel", str(panel_csv), "--window", "x"]) == 1


class TestPlotCommand:
    def test_plots_from_report(self, panel_csv, tmp_path):
        assert main(scan_args(panel_csv, tmp_path)) == 0
        out_dir = tmp_path / "figs"
        code = main([
            "plot", "--report", str(tmp_path / "report.json"), "--out-dir", str(out_dir),
        ])
        assert code == 0
        files = sorted(p.name for p in out_dir.iterdir())
        assert files == ["alpha.svg", "beta.svg"]
        assert (out_dir / "alpha.svg").read_bytes().startswith(b"<?xml")


class TestPlotFunctions:
    def test_figure_marks_exactly_horizon_held_out_points(self):
        series, _ = simulate_trend_series(40, order=2, q=0.08, r=1.0, seed=2, start_epoch=1980, name="s")
        config = RunConfig(train_end=2016, horizon=3, mc_draws=200, mc_reps=5)
        (rep,) = run_scan([series], config)
        fig = build_figure(rep)
        assert held_out_point_count(fig) == 3
        import matplotlib.pyplot as plt

        plt.close(fig)

    def test_write_plot_svg(self, tmp_path):
        series, _ = simulate_trend_series(40, order=2, q=0.08, r=1.0, seed=2, start_epoch=1980, name="s")
        config = RunConfig(train_end=2016, horizon=3, mc_draws=200, mc_reps=5)
        (rep,) = run_scan([series], config)
        path = tmp_path / "s.svg"
        write_plot(rep, path)
        assert path.read_bytes().startswith(b"<?xml")

    def test_skipped_series_cannot_be_plotted(self):
        series, _ = simulate_trend_series(20, seed=2, start_epoch=1980, name="s")
        config = RunConfig(train_end=2016, horizon=30, mc_draws=200, mc_reps=5)
        (rep,) = run_scan([series], config)
        assert rep.skipped is not None
        with pytest.raises(ValueError):
            build_figure(rep)
