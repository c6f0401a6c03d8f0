import json

import pytest

from scatcalc.cli import ConfigError, emit_report, load_config, main, run_experiment


def write_config(tmp_path, body, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(body))
    return str(p)


class TestLoadConfig:
    def test_minimal_with_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path, {"lambda": 2.0}), "radial")
        assert cfg.values["lambda"] == 2.0
        assert cfg.values["resolution"] == 8  # default filled
        assert cfg.seed == 0

    def test_unknown_key_suggestion(self, tmp_path):
        with pytest.raises(ConfigError, match="did you mean 'lambda'"):
            load_config(write_config(tmp_path, {"lamda": 1.0}), "radial")

    def test_all_violations_reported(self, tmp_path):
        body = {"lamda": 1.0, "resolution": -3, "dim": "two"}
        with pytest.raises(ConfigError) as err:
            load_config(write_config(tmp_path, body), "radial")
        msg = str(err.value)
        assert "lamda" in msg and "resolution" in msg and "dim" in msg

    def test_range_checks(self, tmp_path):
        with pytest.raises(ConfigError, match="range check"):
            load_config(write_config(tmp_path, {"N": 127}), "quantize-check")

    def test_parse_error(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(str(p), "radial")

    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown experiment"):
            load_config(write_config(tmp_path, {}), "nonsense")


class TestRunAndEmit:
    def test_scatter_free_report(self, tmp_path):
        cfg = load_config(
            write_config(tmp_path, {"potential": "free", "lambdas": [0.5, 1.0]}), "scatter1d"
        )
        report = run_experiment(cfg)
        assert report.passed
        assert report.metrics["max_unitarity_defect"] < 1e-12
        paths = emit_report(report, tmp_path / "out", formats=("json", "csv"))
        assert (tmp_path / "out" / "scatter1d-report.json").exists()
        assert (tmp_path / "out" / "scatter1d-coefficients.csv").exists()
        body = json.loads((tmp_path / "out" / "scatter1d-report.json").read_text())
        assert body["passed"] is True

    def test_byte_stable_reports(self, tmp_path):
        cfg = load_config(
            write_config(tmp_path, {"potential": "square_barrier", "lambdas": [1.0, 2.0]}),
            "scatter1d",
        )
        emit_report(run_experiment(cfg), tmp_path / "a")
        emit_report(run_experiment(cfg), tmp_path / "b")
        a = (tmp_path / "a" / "scatter1d-report.json").read_bytes()
        b = (tmp_path / "b" / "scatter1d-report.json").read_bytes()
        assert a == b

    def test_seed_echoed_in_parameters(self, tmp_path):
        cfg = load_config(write_config(tmp_path, {"seed": 7, "lambda": 1.0}), "radial")
        report = run_experiment(cfg)
        assert report.parameters["seed"] == 7


class TestMainExitCodes:
    def test_pass_is_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"potential": "free", "lambdas": [1.0]})
        code = main(["scatter1d", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 0
        assert "[PASS]" in capsys.readouterr().out

    def test_config_error_is_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"potental": "free"})
        assert main(["scatter1d", "--config", cfg]) == 2

    def test_missing_config_is_two(self, tmp_path):
        assert main(["scatter1d", "--config", str(tmp_path / "nope.json")]) == 2

    def test_io_error_is_three(self, tmp_path):
        cfg = write_config(tmp_path, {"potential": "free", "lambdas": [1.0]})
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        assert main(["scatter1d", "--config", cfg, "--out", str(blocker / "sub")]) == 3

    def test_quantize_check_passes(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"N": 96, "L": 18.0})
        code = main(["quantize-check", "--config", cfg, "--out", str(tmp_path / "q")])
        assert code == 0

    def test_var_order_passes(self, tmp_path):
        cfg = write_config(tmp_path, {"N": 64, "L": 10.0})
        code = main(["var-order", "--config", cfg, "--out", str(tmp_path / "v")])
        assert code == 0

    def test_criterion_failure_is_one(self, tmp_path, capsys):
        # a reversed radius ladder makes the gap-decreasing criterion fail
        cfg = write_config(tmp_path, {"radii": [400.0, 100.0]})
        code = main(["pairing", "--config", cfg, "--out", str(tmp_path / "p")])
        assert code == 1
        assert "[FAIL]" in capsys.readouterr().out

    def test_radial_wave_degeneracy_gate(self, tmp_path):
        cfg = write_config(tmp_path, {"model": "wave", "resolution": 4})
        code = main(["radial", "--config", cfg, "--out", str(tmp_path / "w")])
        assert code == 0
        body = json.loads((tmp_path / "w" / "radial-report.json").read_text())
        assert body["criteria"]["degenerate_gate"] is True
