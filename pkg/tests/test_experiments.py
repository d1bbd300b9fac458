import json
import os

import numpy as np
import pytest

import ve2d.diagnostics as dg
from ve2d.dynamics import StepperConfig
from ve2d.experiments import (ConfigError, RunConfig, audit,
                              convergence_study, run_simulation,
                              state_l2_distance, sweep_viscosity,
                              worker_count, write_csv)
from ve2d.state import InitialDataParams

SMALL = dict(n=64, box_len=32.0, t_final=2.0, sample_interval=0.5, k_max=1,
             initial=InitialDataParams(amplitude=0.01, support_radius=6.0))


@pytest.fixture(scope="module")
def small_run():
    return run_simulation(RunConfig(**SMALL), mu=0.0, write=False)


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.n == 256
        assert cfg.box_len == 64.0
        assert cfg.t_final == 16.0

    def test_horizon_bounded_by_box(self):
        with pytest.raises(ConfigError):
            RunConfig(box_len=32.0, t_final=16.0)

    def test_viscosity_range(self):
        with pytest.raises(ConfigError):
            RunConfig(mu_list=(0.0, 2.0))

    def test_sample_interval_positive(self):
        with pytest.raises(ConfigError):
            RunConfig(sample_interval=0.0)


class TestIniParsing:
    def test_full_config(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(
            "[grid]\n"
            "n = 64          # grid points per side\n"
            "box_len = 32.0\n"
            "[initial]\n"
            "amplitude = 0.02\n"
            "profile = ring\n"
            "seed = 7\n"
            "[run]\n"
            "mu = 0 0.01 0.1\n"
            "t_final = 4.0\n"
            "sample_interval = 0.5\n"
            "k_max = 1\n"
            "[stepper]\n"
            "cfl_factor = 0.2\n"
            "dealias = yes\n",
            encoding="utf-8")
        cfg = RunConfig.from_ini(path)
        assert cfg.n == 64
        assert cfg.initial.profile == "ring"
        assert cfg.initial.seed == 7
        assert cfg.mu_list == (0.0, 0.01, 0.1)
        assert cfg.stepper.cfl_factor == 0.2
        assert cfg.stepper.dealias is True

    def test_defaults_from_empty_sections(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[run]\nt_final = 8.0\n", encoding="utf-8")
        cfg = RunConfig.from_ini(path)
        assert cfg.n == 256
        assert cfg.t_final == 8.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.from_ini(tmp_path / "absent.ini")

    def test_bad_value(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[grid]\nn = many\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.from_ini(path)

    def test_bad_boolean(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[stepper]\ndealias = maybe\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.from_ini(path)


class TestWorkerCount:
    def test_default_is_serial(self, monkeypatch):
        monkeypatch.delenv("VE2D_THREADS", raising=False)
        assert worker_count() == 1

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("VE2D_THREADS", "4")
        assert worker_count() == 4


class TestRunSimulation:
    def test_sampling_cadence(self, small_run):
        assert [rec.t for rec in small_run.records] == pytest.approx(
            [0.0, 0.5, 1.0, 1.5, 2.0])
        assert small_run.blowup_t is None
        assert small_run.final_state.t == pytest.approx(2.0)

    def test_series_accessor(self, small_run):
        ts, e1 = small_run.series("E1")
        assert len(ts) == len(e1) == 5
        assert np.all(e1 > 0)

    def test_artifacts_written(self, tmp_path):
        cfg = RunConfig(**SMALL, output_dir=str(tmp_path / "out"))
        run_simulation(cfg, mu=0.0)
        out = tmp_path / "out"
        assert (out / "run_mu0.csv").exists()
        assert (out / "final_mu0.snap").exists()
        assert (out / "summary_mu0.json").exists()
        assert (out / "energy_mu0.svg").exists()
        header = (out / "run_mu0.csv").read_text().splitlines()[0]
        assert header == dg.CSV_HEADER

    def test_deterministic_rerun(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            cfg = RunConfig(**SMALL, output_dir=str(tmp_path / name))
            run_simulation(cfg, mu=0.01)
            outs.append((tmp_path / name / "run_mu0.01.csv").read_bytes())
        assert outs[0] == outs[1]


class TestSweep:
    def test_two_member_sweep(self):
        cfg = RunConfig(**{**SMALL, "mu_list": (0.0, 0.1)})
        report = sweep_viscosity(cfg)
        assert set(report["per_mu"]) == {0.0, 0.1}
        assert report["max_E1_ratio"] >= 1.0
        for entry in report["per_mu"].values():
            assert entry["max_E1_ratio"] > 0

    def test_empty_sweep_rejected(self):
        cfg = RunConfig(**{**SMALL, "mu_list": ()})
        with pytest.raises(ConfigError):
            sweep_viscosity(cfg)


class TestConvergence:
    def test_needs_inviscid_baseline(self):
        cfg = RunConfig(**{**SMALL, "mu_list": (0.1, 0.01, 0.001)})
        with pytest.raises(ConfigError):
            convergence_study(cfg)

    def test_distance_metric(self, small_run):
        st = small_run.final_state
        assert state_l2_distance(st, st) == 0.0

    def test_distance_requires_shared_grid(self, small_run, evolved_state):
        with pytest.raises(ValueError):
            state_l2_distance(small_run.final_state, evolved_state)


class TestAudit:
    def test_report_structure(self, tmp_path):
        cfg = RunConfig(**SMALL, output_dir=str(tmp_path))
        report = audit(cfg, n_random=3)
        assert report["identity_residuals"]["null_split"] < 1e-11
        assert report["identity_residuals"]["f2_split"] < 1e-11
        assert report["identity_residuals"]["grad_split"] < 1e-7
        assert len(report["commutator_residuals"]) == len(
            list(report["commutator_residuals"]))
        assert (tmp_path / "audit.json").exists()
        on_disk = json.loads((tmp_path / "audit.json").read_text())
        assert set(on_disk) == {"identity_residuals",
                                "commutator_residuals",
                                "inequality_ratios"}


class TestCsvWriter:
    def test_round_trip(self, small_run, tmp_path):
        path = tmp_path / "series.csv"
        write_csv(path, small_run.records)
        lines = path.read_text().splitlines()
        assert lines[0] == dg.CSV_HEADER
        assert len(lines) == 1 + len(small_run.records)
        first = dict(zip(dg.CSV_HEADER.split(","),
                         map(float, lines[1].split(","))))
        assert first["t"] == 0.0
        assert first["constraint_Linf"] == 0.0
