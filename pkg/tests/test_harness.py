import json
from pathlib import Path

import numpy as np
import pytest

from sparseinterp.cli import main as cli_main
from sparseinterp.errors import InvalidInputError
from sparseinterp.harness import (CSV_COLUMNS, ExperimentConfig,
                                  config_from_json, config_to_json,
                                  generate_instance, run_experiment,
                                  scaling_sweep, write_reports)

TINY = dict(k=1, F=200.0, T=1.0, trials=2, seed=7,
            noise_kind="none", noise_level=0.0,
            pipeline=dict(B=8, alpha_g=0.2, delta_g=0.2, delta_freq=1.0,
                          sigma_range="claim", R_votes=8, s_first=4,
                          rho=0.5, d_degree=2))


def test_config_roundtrip():
    cfg = ExperimentConfig(**TINY)
    assert config_from_json(config_to_json(cfg)) == cfg


def test_instance_separation():
    cfg = ExperimentConfig(k=4, F=1000.0, T=1.0, sep_mult=8.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = generate_instance(cfg, rng, min_gap=100.0)
        fs = x.freq_array()
        gaps = np.abs(np.subtract.outer(fs, fs))[np.triu_indices(4, 1)]
        assert np.min(gaps) >= 100.0
        assert np.all(np.abs(fs) <= 1000.0)


def test_amplitude_law():
    cfg = ExperimentConfig(k=8, F=100.0, T=1.0, amplitude_law="loguniform",
                           amp_lo=0.5, amp_hi=2.0)
    x = generate_instance(cfg, np.random.default_rng(1), min_gap=0.0)
    mags = np.abs(x.coeff_array())
    assert np.all((mags >= 0.5) & (mags <= 2.0))


def test_zero_trials_valid_empty_report(tmp_path):
    cfg = ExperimentConfig(**{**TINY, "trials": 0, "out_dir": str(tmp_path)})
    records = run_experiment(cfg)
    assert records == []
    body = json.loads((tmp_path / "report.json").read_text())
    assert body["records"] == []
    assert body["schema_version"] >= 1


def test_fixed_seed_byte_identical_report(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cfg1 = ExperimentConfig(**{**TINY, "out_dir": str(out1)})
    cfg2 = ExperimentConfig(**{**TINY, "out_dir": str(out2)})
    run_experiment(cfg1)
    run_experiment(cfg2)
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "trials.csv").read_bytes() == (out2 / "trials.csv").read_bytes()


def test_csv_columns(tmp_path):
    cfg = ExperimentConfig(**{**TINY, "out_dir": str(tmp_path)})
    run_experiment(cfg)
    header = (tmp_path / "trials.csv").read_text().splitlines()[0]
    assert header.split(",") == CSV_COLUMNS


def test_unwritable_out_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = ExperimentConfig(**{**TINY, "out_dir": str(blocker / "sub")})
    with pytest.raises(InvalidInputError):
        write_reports(cfg, [], Path(cfg.out_dir))


def test_scaling_sweep_monotone():
    cfg = ExperimentConfig(**{**TINY, "trials": 2})
    table = scaling_sweep(cfg, [1, 2])
    qs = [r["median_freq_queries"] for r in table["rows"]]
    assert qs[0] <= qs[1]
    assert "freq_query_slope" in table


class TestCli:
    def test_missing_config_is_config_error(self):
        assert cli_main(["--config", "/nonexistent.json"]) == 2

    def test_malformed_config(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text("{not json")
        assert cli_main(["--config", str(p)]) == 2

    def test_unknown_field_is_config_error(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(json.dumps({"k": 1, "F": 10.0, "T": 1.0, "bogus": 1}))
        assert cli_main(["--config", str(p)]) == 2

    def test_full_run_writes_outputs(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(config_to_json(ExperimentConfig(**TINY)))
        out = tmp_path / "out"
        assert cli_main(["--config", str(p), "--out", str(out),
                         "--trials", "1"]) == 0
        assert (out / "report.json").exists()
        assert (out / "trials.csv").exists()
        assert (out / "timings.json").exists()

    def test_bad_sweep_arg(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text(config_to_json(ExperimentConfig(**TINY)))
        assert cli_main(["--config", str(p), "--sweep", "2,4"]) == 2

    def test_sweep_writes_table_and_plots(self, tmp_path):
        p = tmp_path / "cfg.json"
        cfg = ExperimentConfig(**{**TINY, "trials": 1})
        p.write_text(config_to_json(cfg))
        out = tmp_path / "out"
        assert cli_main(["--config", str(p), "--out", str(out),
                         "--sweep", "k=1,2", "--emit-plots"]) == 0
        table = json.loads((out / "sweep.json").read_text())
        assert len(table["rows"]) == 2
        assert (out / "query_scaling.png").exists()

    def test_freq_stage(self, tmp_path, capsys):
        p = tmp_path / "cfg.json"
        p.write_text(config_to_json(ExperimentConfig(**{**TINY, "trials": 1})))
        assert cli_main(["--config", str(p), "--stage", "freq"]) == 0
        out = capsys.readouterr().out
        assert "queries" in out

    def test_numeric_failure_exit_code(self, tmp_path, monkeypatch):
        from sparseinterp.errors import NumericFailureError
        import sparseinterp.cli as cli_mod

        def boom(cfg):
            raise NumericFailureError("synthetic")

        monkeypatch.setattr(cli_mod, "run_experiment", boom)
        p = tmp_path / "cfg.json"
        p.write_text(config_to_json(ExperimentConfig(**TINY)))
        assert cli_main(["--config", str(p)]) == 3
