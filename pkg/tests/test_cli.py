import json

import pytest

from hallmhd.cli import main

CFG = """
grid.n = 16
grid.box_length = 8.0
time.t_end = 0.2
time.sample_interval = 0.05
time.dt_max = 0.025
init.amplitude = 0.05
init.seed = 77
analysis.energy_tolerance = 0.5
"""


@pytest.fixture()
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(CFG)
    return p


class TestRunCommand:
    def test_run_success_exit_zero(self, cfg_file, tmp_path, capsys):
        rc = main(["run", str(cfg_file), "--output", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "run finished" in out
        assert (tmp_path / "out" / "series.txt").exists()

    def test_failed_audit_exit_one(self, cfg_file, tmp_path):
        text = cfg_file.read_text().replace(
            "analysis.energy_tolerance = 0.5", "analysis.energy_tolerance = 1e-12"
        )
        cfg_file.write_text(text)
        rc = main(["run", str(cfg_file), "--output", str(tmp_path / "out")])
        assert rc == 1

    def test_bad_config_exit_two(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("grid.n = 7\ntime.t_end = 1\n")
        with pytest.raises(SystemExit) as exc:
            main(["run", str(p)])
        assert exc.value.code == 2

    def test_missing_config_exit_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "/nonexistent/path.cfg"])
        assert exc.value.code == 2


class TestVerifyCommand:
    def test_verify_config(self, cfg_file, capsys):
        rc = main(["verify", str(cfg_file)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "hall_energy_neutrality: PASS" in out
        assert "linear_oracle_equivalence: PASS" in out
        assert "fourier_amplitude_bound: PASS" in out

    def test_verify_checkpoint(self, cfg_file, tmp_path, capsys):
        main(["run", str(cfg_file), "--output", str(tmp_path / "out")])
        rc = main(["verify", str(tmp_path / "out" / "final.hmhd")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "state_divergence_u: PASS" in out


class TestAnalyzeCommand:
    def test_analyze_round_trip(self, cfg_file, tmp_path, capsys):
        main(["run", str(cfg_file), "--output", str(tmp_path / "out")])
        report = tmp_path / "fit.json"
        rc = main(
            [
                "analyze",
                str(tmp_path / "out" / "series.txt"),
                "--m", "0",
                "--min-samples", "3",
                "--min-span", "1.01",
                "--tolerance", "5.0",
                "--report", str(report),
            ]
        )
        assert rc == 0
        data = json.loads(report.read_text())
        assert "fit" in data and "verdict" in data

    def test_analyze_bad_window_exit_two(self, cfg_file, tmp_path):
        main(["run", str(cfg_file), "--output", str(tmp_path / "out")])
        rc = main(
            ["analyze", str(tmp_path / "out" / "series.txt"), "--window", "10", "20"]
        )
        assert rc == 2


class TestOracleCommand:
    def test_oracle_value(self, capsys):
        rc = main(["oracle", "--m", "0", "--t", "1000", "--table"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "slope" in out


class TestSweepCommand:
    def test_sweep_two_values(self, cfg_file, tmp_path, capsys):
        rc = main(
            [
                "sweep", str(cfg_file),
                "--param", "physics.hall_coefficient=0.0,1.0",
                "--output", str(tmp_path / "sweep"),
            ]
        )
        out = capsys.readouterr().out
        assert rc == 0
        assert (tmp_path / "sweep" / "sweep_000_0.0" / "series.txt").exists()
        assert (tmp_path / "sweep" / "sweep_001_1.0" / "series.txt").exists()
        assert "physics.hall_coefficient=0.0: PASS" in out

    def test_sweep_bad_param(self, cfg_file):
        rc = main(["sweep", str(cfg_file), "--param", "nonsense"])
        assert rc == 2
