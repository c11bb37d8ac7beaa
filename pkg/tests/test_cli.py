"""Run-config handling, experiment drivers, and CLI entry point."""

import json
import math
import warnings

import numpy as np
import pytest

from vacuumprobe import cli
from vacuumprobe.cli import (RunConfig, main, optimal_T_search, replacement_run,
                             run_adiabatic_study, run_sweep_fig3)
from vacuumprobe.errors import ConfigError


def write_cfg(tmp_path, name="cfg.json", **kw):
    path = tmp_path / name
    path.write_text(json.dumps(kw))
    return str(path)


class TestRunConfig:
    def test_roundtrip_identity(self):
        cfg = RunConfig(experiment="measure", alpha=0.7, T=25.0, mode="ideal")
        assert RunConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            RunConfig.from_dict({"experiment": "measure", "alhpa": 1.0})

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            RunConfig(experiment="teleport")

    def test_bad_mode_and_ranges(self):
        with pytest.raises(ConfigError):
            RunConfig(experiment="measure", mode="exact")
        with pytest.raises(ConfigError):
            RunConfig(experiment="measure", T_min=10.0, T_max=5.0)
        with pytest.raises(ConfigError):
            RunConfig(experiment="measure", kappa=-0.1)

    def test_from_file(self, tmp_path):
        path = write_cfg(tmp_path, experiment="measure", alpha=0.5)
        cfg = RunConfig.from_file(path)
        assert cfg.alpha == 0.5

    def test_from_file_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            RunConfig.from_file(str(path))


class TestOptimalTSearch:
    def test_lossless_hits_edge_with_warning(self):
        cfg = RunConfig(experiment="wigner-fig4", kappa=0.0, Gamma_e=0.0,
                        T_min=5.0, T_max=40.0, T_grid=4)
        with pytest.warns(UserWarning, match="edge"):
            T_opt, fid = optimal_T_search(1.0, 0.0, cfg)
        assert T_opt == 40.0

    def test_more_loss_lowers_fidelity(self):
        cfg = RunConfig(experiment="wigner-fig4", Gamma_e=0.01,
                        T_min=5.0, T_max=60.0, T_grid=6)
        _, f1 = optimal_T_search(1.0, 0.005, cfg)
        _, f2 = optimal_T_search(1.0, 0.01, cfg)
        assert f2 < f1


class TestDrivers:
    def test_sweep_fig3_tiny(self, tmp_path):
        cfg = RunConfig(experiment="sweep-fig3", alpha_list=(1.0,),
                        kappa_list=(0.005,), Gamma_e=0.01,
                        T_min=8.0, T_max=40.0, T_grid=5)
        path = run_sweep_fig3(cfg, tmp_path)
        lines = path.read_text().splitlines()
        assert lines[0] == "# units: rates in g, times in 1/g"
        assert lines[1] == "alpha,kappa,T_opt,fidelity,p_success,p_vacuum,p_sink"
        assert len(lines) == 3
        row = dict(zip(lines[1].split(","), map(float, lines[2].split(","))))
        assert row["alpha"] == 1.0 and row["kappa"] == 0.005
        assert 0.9 < row["fidelity"] < 1.0
        assert abs(row["T_opt"] - 16.6) < 1.0
        # consistency with a direct run at the same point
        _, fid = replacement_run(cfg, 1.0, 0.005, row["T_opt"])
        assert abs(fid - row["fidelity"]) < 1e-3

    def test_sweep_rows_byte_identical(self, tmp_path):
        cfg = RunConfig(experiment="sweep-fig3", alpha_list=(0.5,),
                        kappa_list=(0.01,), T_min=8.0, T_max=30.0, T_grid=4)
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        pa = run_sweep_fig3(cfg, tmp_path / "a")
        pb = run_sweep_fig3(cfg, tmp_path / "b")
        assert pa.read_bytes() == pb.read_bytes()

    def test_adiabatic_study(self, tmp_path):
        cfg = RunConfig(experiment="adiabatic-study", Delta=0.5, n_list=(1,))
        path = run_adiabatic_study(cfg, tmp_path)
        lines = path.read_text().splitlines()
        assert lines[1] == ("n,T,nu0,p_diabatic,phi_pred,phi_num,"
                            "kappa_b_residual,kappa_e_residual,slope")
        assert len(lines) == 2 + len(cfg.T_list)
        slope = float(lines[2].split(",")[-1])
        assert abs(slope + 4.0) < 0.5


class TestMain:
    def test_measure_ideal(self, tmp_path, capsys):
        cfgp = write_cfg(tmp_path, experiment="measure", mode="ideal", alpha=1.0)
        rc = main(["measure", "--config", cfgp, "--out", str(tmp_path)])
        assert rc == 0
        doc = json.loads((tmp_path / "result.json").read_text())
        assert doc["record"] == "measurement"
        assert abs(doc["p_vacuum"] - math.exp(-1)) < 1e-10

    def test_scissors_and_counting(self, tmp_path):
        cfgp = write_cfg(tmp_path, experiment="scissors", mode="ideal", n_cut=2)
        assert main(["scissors", "--config", cfgp, "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "result.json").read_text())
        assert doc["n_cut"] == 2 and len(doc["rounds"]) == 2

        cfgp = write_cfg(tmp_path, "c2.json", experiment="number-resolve",
                         mode="ideal")
        assert main(["number-resolve", "--config", cfgp, "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "result.json").read_text())
        dist = doc["count_distribution"]
        assert abs(dist[0] - math.exp(-1)) < 1e-9

    def test_joint_vacuum_ideal(self, tmp_path):
        cfgp = write_cfg(tmp_path, experiment="joint-vacuum", mode="ideal",
                         joint_alphas=[1.0, 1.0])
        assert main(["joint-vacuum", "--config", cfgp, "--out", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / "result.json").read_text())
        assert abs(doc["p_vacuum"] - math.exp(-2)) < 1e-6

    def test_experiment_mismatch_exit2(self, tmp_path, capsys):
        cfgp = write_cfg(tmp_path, experiment="measure")
        assert main(["scissors", "--config", cfgp, "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_exit2(self, tmp_path, capsys):
        cfgp = write_cfg(tmp_path, experiment="measure", bogus=1)
        assert main(["measure", "--config", cfgp, "--out", str(tmp_path)]) == 2

    def test_missing_config_exit2(self, tmp_path):
        assert main(["measure", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == 2

    def test_numerical_failure_exit3(self, tmp_path, capsys):
        # the simulated multimode sweep requires a lossless configuration
        cfgp = write_cfg(tmp_path, experiment="joint-vacuum", mode="simulated",
                         kappa=0.01, T=20.0)
        rc = main(["joint-vacuum", "--config", cfgp, "--out", str(tmp_path)])
        assert rc == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_project_nonvacuum_reruns_identical(self, tmp_path):
        cfgp = write_cfg(tmp_path, experiment="project-nonvacuum", mode="ideal")
        for sub in ("a", "b"):
            (tmp_path / sub).mkdir()
            assert main(["project-nonvacuum", "--config", cfgp,
                         "--out", str(tmp_path / sub)]) == 0
        assert ((tmp_path / "a" / "result.json").read_bytes()
                == (tmp_path / "b" / "result.json").read_bytes())
