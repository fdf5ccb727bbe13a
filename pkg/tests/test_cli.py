import csv
import json
import subprocess
import sys

import pytest

from aggrlim.cli import EXIT_ABORT, EXIT_CONFIG, EXIT_OK, PANEL_COLUMNS, main


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(line for line in fh if not line.startswith("#")))


def _code(argv):
    """Exit status whether main returns it or argparse raises SystemExit."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


@pytest.fixture
def small_config(tmp_path):
    cfg = {"sweep": {"N": 20, "n": 30, "n_sizes": [8, 16], "N_sizes": [8, 16],
                     "slope_sizes": [100, 1000], "slope_trials": 5, "replicates": 20,
                     "blocks": 10}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestSimulatePanel:
    def test_smoke(self, tmp_path):
        out = tmp_path / "o"
        assert main(["simulate-panel", "--N", "1", "--n", "4", "--replicates", "2",
                     "--grid", "1/2,1", "--out", str(out)]) == EXIT_OK
        rows = _rows(out / "panel.csv")
        assert tuple(rows[0]) == PANEL_COLUMNS
        assert len(rows) - 1 == 2 * 2

    def test_byte_identical(self, tmp_path):
        args = ["simulate-panel", "--N", "5", "--n", "20", "--replicates", "3", "--seed", "9"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b"), "--threads", "1"])
        assert (tmp_path / "a" / "panel.csv").read_bytes() == \
            (tmp_path / "b" / "panel.csv").read_bytes()

    def test_header_records_config(self, tmp_path):
        main(["simulate-panel", "--N", "2", "--n", "4", "--replicates", "1",
              "--out", str(tmp_path)])
        first = (tmp_path / "panel.csv").read_text().splitlines()[0]
        meta = json.loads(first[1:])
        assert meta["seed"] == 0 and meta["command"] == "simulate-panel"
        assert len(meta["config_hash"]) == 16

    @pytest.mark.parametrize("args", [["--N", "0"], ["--n", "-1"], ["--grid", "1,1/2"],
                                      ["--beta", "-1"], ["--seed", "-3"], ["--lambda", "0"]])
    def test_config_errors(self, tmp_path, args):
        assert _code(["simulate-panel", "--out", str(tmp_path)] + args) == EXIT_CONFIG

    def test_unknown_config_field(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"copies": 3}))
        assert main(["simulate-panel", "--config", str(path), "--out", str(tmp_path)]) == \
            EXIT_CONFIG

    def test_flags_override_config(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"N": 3, "n": 4, "replicates": 5}))
        main(["simulate-panel", "--config", str(path), "--replicates", "1",
              "--out", str(tmp_path)])
        assert len(_rows(tmp_path / "panel.csv")) - 1 == 2

    def test_path_abort(self, tmp_path):
        # beta = -0.9 puts about 6% of copies above a stationary mean of 1e12
        code = main(["simulate-panel", "--N", "200", "--n", "2", "--replicates", "1",
                     "--beta", "-0.9", "--out", str(tmp_path)])
        assert code == EXIT_ABORT


class TestVerify:
    def test_exact_suite(self, tmp_path):
        assert main(["verify", "--suite", "exact", "--out", str(tmp_path)]) == EXIT_OK
        summary = json.loads((tmp_path / "verify_exact.json").read_text())
        assert all(c["pass"] for c in summary["criteria"])
        assert {c["id"] for c in summary["criteria"]} == {"1", "2", "3", "4", "5"}

    def test_unknown_suite(self, tmp_path):
        assert main(["verify", "--suite", "bogus", "--out", str(tmp_path)]) == EXIT_CONFIG


class TestSweepAndReport:
    def test_sweep_then_report(self, tmp_path, small_config, capsys):
        out = str(tmp_path / "s")
        assert main(["sweep", "--config", small_config, "--out", out]) == EXIT_OK
        for name in ("sweep_N_first.csv", "sweep_n_first.csv", "sweep_slope.csv"):
            assert len(_rows(tmp_path / "s" / name)) > 1
        assert main(["report", out]) == EXIT_OK
        first = {p.name: p.read_bytes() for p in (tmp_path / "s").iterdir()}
        assert any(name.endswith(".png") for name in first)
        assert "plot_data.csv" in first
        assert main(["report", out]) == EXIT_OK
        second = {p.name: p.read_bytes() for p in (tmp_path / "s").iterdir()}
        assert first == second
        assert "N_first" in capsys.readouterr().out

    def test_sweep_deterministic(self, tmp_path, small_config):
        for d in ("a", "b"):
            main(["sweep", "--config", small_config, "--regime", "slope",
                  "--out", str(tmp_path / d)])
        assert (tmp_path / "a" / "sweep_slope.csv").read_bytes() == \
            (tmp_path / "b" / "sweep_slope.csv").read_bytes()

    def test_bad_regime(self, tmp_path):
        assert main(["sweep", "--regime", "both", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_report_empty_dir(self, tmp_path):
        assert main(["report", str(tmp_path)]) == EXIT_CONFIG

    def test_report_missing_dir(self, tmp_path):
        assert main(["report", str(tmp_path / "nope")]) == EXIT_CONFIG


class TestEntryPoint:
    def test_help_documents_columns(self):
        res = subprocess.run([sys.executable, "-m", "aggrlim.cli", "report", "--help"],
                             capture_output=True, text=True)
        assert res.returncode == 0
        assert "series, t, empirical, reference" in res.stdout

    def test_no_command(self):
        res = subprocess.run([sys.executable, "-m", "aggrlim.cli"], capture_output=True,
                             text=True)
        assert res.returncode == EXIT_CONFIG

    def test_bad_flag_exit_code(self):
        res = subprocess.run([sys.executable, "-m", "aggrlim.cli", "verify", "--frobnicate"],
                             capture_output=True, text=True)
        assert res.returncode == EXIT_CONFIG
