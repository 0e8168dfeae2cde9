"""
Tests for the experiment runner, its artifacts and the command line.
"""
import json
import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from sparls.app import (
    ExperimentRunner,
    TrialPayload,
    algorithm_variants,
    make_filter,
    quick_run,
    run_trial,
    spline_frame,
    static_instance,
)
from sparls.cli import main
from sparls.config import Algorithm, build_config
from sparls.core.errors import ConfigError, SparlsError


def _runner():
    runner = ExperimentRunner()
    runner.plotter = None
    return runner


def _jakes(tmp_path, **overrides):
    values = dict(
        scenario="jakes", M=10, k_sparse=2, n=60, trials=2, steady_window=10,
        lam=0.95, xi2_safety=0.5, plots=False, output_dir=tmp_path,
    )
    values.update(overrides)
    return build_config(values)


def _mts(tmp_path, **overrides):
    values = dict(
        scenario="mts", n=60, trials=2, mts_v=5, steady_window=10, pred_window_start=10,
        xi2_safety=0.5, plots=False, output_dir=tmp_path,
    )
    values.update(overrides)
    return build_config(values)


class TestTables:
    """Tests for the prox and penalty tables."""

    def test_prox_table(self, tmp_path):
        """Test the tabulated prox for the three regimes."""
        path = tmp_path / "prox.csv"
        table = _runner().prox_table([0.5, 1.0, 2.0], 1.0, np.linspace(-3, 3, 13), path)
        assert list(table.columns) == ["beta", "alpha", "regime", "r", "prox"]
        assert len(table) == 39
        assert set(table["regime"]) == {"firm", "boundary", "hard"}
        firm = table[table["beta"] == 0.5].set_index("r")["prox"]
        assert firm[0.5] == pytest.approx(0.0)
        assert firm[1.0] == pytest.approx(1.0)
        assert firm[-3.0] == pytest.approx(-3.0)
        hard = table[table["beta"] == 2.0].set_index("r")["prox"]
        assert hard[1.0] == 0.0
        assert hard[1.5] == pytest.approx(1.5)
        written = pd.read_csv(path)
        assert_allclose(written["prox"], table["prox"])

    def test_prox_table_scalar_beta(self):
        table = _runner().prox_table(0.5, 1.0)
        assert len(table) == 601
        assert (table["regime"] == "firm").all()

    def test_mcp_table(self, tmp_path):
        table = _runner().mcp_table(1.0, np.array([-2.0, -0.5, 0.0, 0.5, 2.0]), tmp_path / "m.csv")
        assert_allclose(table["mcp"], [0.5, 0.375, 0.0, 0.375, 0.5])
        assert_allclose(table["moreau_env"], [1.5, 0.125, 0.0, 0.125, 1.5])
        assert_allclose(table["l1"], table["mcp"] + table["moreau_env"])
        assert (tmp_path / "m.csv").exists()


class TestTrials:
    """Tests for single trials and filter construction."""

    def test_variants(self, tmp_path):
        config = _jakes(tmp_path, compare_k1=True)
        labels = [label for label, _, _ in algorithm_variants(config)]
        assert labels == ["RLS", "SPARLS_L1", "SPARLS_MCP", "SPARLS_L1_K1", "SPARLS_MCP_K1"]

    def test_group_filter_needs_layout(self, tmp_path):
        config = _mts(tmp_path)
        with pytest.raises(ConfigError):
            make_filter(Algorithm.GROUP_MCP, 80, config, 1e-3, 0.04, 5)

    def test_trial_outputs(self, tmp_path):
        config = _jakes(tmp_path)
        result = run_trial(TrialPayload(config, 0))
        assert set(result.traces) == {"RLS", "SPARLS_L1", "SPARLS_MCP"}
        assert len(result.traces["RLS"]) == 60
        assert result.xi2 > 0 and result.sigma2 > 0
        assert not result.pred_errors

    def test_noise_free_stream_needs_override(self, tmp_path):
        config = _jakes(tmp_path, snr_db=math.inf, algorithms=["SPARLS_MCP"])
        with pytest.raises(ConfigError):
            run_trial(TrialPayload(config, 0))
        config = _jakes(tmp_path, snr_db=math.inf, algorithms=["SPARLS_MCP"], sigma2_override=1e-3)
        assert "SPARLS_MCP" in run_trial(TrialPayload(config, 0)).traces

    def test_forecast_trial(self, tmp_path):
        config = _mts(tmp_path)
        result = run_trial(TrialPayload(config, 0, record_trajectory=True))
        assert set(result.pred_errors) == {"GROUP_LASSO", "GROUP_MCP"}
        assert result.trajectories["GROUP_MCP"].shape == (60, 80)
        assert not result.traces

    def test_quick_run(self):
        outcome = quick_run(
            "jakes", M=10, k_sparse=2, n=60, trials=2, steady_window=10, lam=0.95,
            xi2_safety=0.5, algorithms=["RLS", "SPARLS_MCP"],
        )
        assert outcome.labels == ["RLS", "SPARLS_MCP"]
        gap_before, gap_end = outcome.gap_db("SPARLS_MCP", "RLS")
        assert math.isfinite(gap_before) and math.isfinite(gap_end)

    def test_quick_run_rejects_static_diag(self):
        with pytest.raises(SparlsError):
            quick_run("static_diag")

    def test_volterra_filters_stay_finite(self):
        """Test that heavy-tailed cubic features do not blow up the EM filters."""
        outcome = quick_run("volterra", snr_db=30.0, n=400, trials=4, steady_window=50)
        for result in outcome.results:
            for label, trace in result.traces.items():
                assert np.all(np.isfinite(trace.err_power)), label
        for label in outcome.labels:
            assert math.isfinite(outcome.steady[label].end_db), label


class TestArtifacts:
    """Tests for the artifact bundles."""

    def test_tracking_bundle(self, tmp_path):
        """Test the files and columns of a tracking run."""
        artifacts = _runner().run_experiment(_jakes(tmp_path))
        for name in ("nmse_RLS", "nmse_SPARLS_L1", "nmse_SPARLS_MCP", "nmse_all",
                     "summary", "summary_json", "manifest"):
            assert artifacts[name].exists()
        curve = pd.read_csv(tmp_path / "nmse_SPARLS_MCP.csv")
        assert list(curve.columns) == ["t", "nmse_linear", "nmse_db"]
        assert curve["t"].tolist() == list(range(1, 61))
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert "gain_end_vs_RLS_db" in summary.columns
        assert summary.loc[summary["algorithm"] == "RLS", "gain_end_vs_RLS_db"].item() == 0.0
        data = json.loads((tmp_path / "summary.json").read_text())
        assert set(data["gains_db"]) == {"SPARLS_MCP_vs_SPARLS_L1", "SPARLS_MCP_vs_RLS",
                                         "SPARLS_L1_vs_RLS"}
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["seeds"] == [[0, 0], [0, 1]]
        assert manifest["command"] == "run"
        assert len(manifest["xi2"]) == 2

    def test_runs_are_reproducible(self, tmp_path):
        """Test that two runs with one seed write identical CSV bytes."""
        first, second = tmp_path / "a", tmp_path / "b"
        _runner().run_experiment(_jakes(first))
        _runner().run_experiment(_jakes(second))
        for name in ("nmse_all.csv", "summary.csv", "summary.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_parallel_matches_sequential(self, tmp_path):
        seq, par = tmp_path / "seq", tmp_path / "par"
        _runner().run_experiment(_jakes(seq))
        _runner().run_experiment(_jakes(par, parallel=True, workers=2))
        assert (seq / "nmse_all.csv").read_bytes() == (par / "nmse_all.csv").read_bytes()

    def test_forecast_bundle(self, tmp_path):
        artifacts = _runner().run_experiment(_mts(tmp_path))
        errors = pd.read_csv(artifacts["pred_errors"])
        assert list(errors.columns) == ["trial", "t", "GROUP_LASSO", "GROUP_MCP"]
        assert len(errors) == 120
        stats = json.loads(artifacts["pred_error_stats"].read_text())
        assert stats["GROUP_MCP"]["window_start"] == 10
        assert stats["GROUP_MCP"]["pooled"]["count"] == 2 * 51
        assert len(stats["GROUP_MCP"]["per_trial"]) == 2
        coefficients = pd.read_csv(artifacts["spline_coefficients_GROUP_MCP"])
        assert coefficients.shape == (60, 81)
        assert "g12_b4" in coefficients.columns

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(ConfigError):
            _runner().run_experiment(_jakes(blocker / "out"))

    def test_gamma_sweep(self, tmp_path):
        table = _runner().gamma_sweep(_jakes(tmp_path), [1.0, 10.0], "gamma", trials=1)
        assert len(table) == 4
        assert set(table["algorithm"]) == {"SPARLS_L1", "SPARLS_MCP"}
        assert (tmp_path / "gamma_sweep.csv").exists()

    def test_alpha_sweep_keeps_rls(self, tmp_path):
        table = _runner().gamma_sweep(_jakes(tmp_path), [0.5], "alpha", trials=1)
        assert set(table["algorithm"]) == {"RLS", "SPARLS_L1", "SPARLS_MCP"}

    def test_sweep_rejects_unknown_param(self, tmp_path):
        with pytest.raises(ConfigError):
            _runner().gamma_sweep(_jakes(tmp_path), [1.0], "lam")


class TestStaticDiagnostic:
    """Tests for the static error-bound diagnostic."""

    def test_instance_is_seeded(self):
        problem, w, eps = static_instance(10, 2, 40.0, seed=3)
        again, w_again, _ = static_instance(10, 2, 40.0, seed=3)
        assert problem.n == 100
        assert np.count_nonzero(w) == 2
        assert np.all((np.abs(w[w != 0]) >= 1.0) & (np.abs(w[w != 0]) <= 2.0))
        assert_allclose(problem.d - problem.X @ w, eps, atol=1e-12)
        assert_allclose(again.X, problem.X)
        assert_allclose(w_again, w)

    def test_instance_rejects_bad_sparsity(self):
        with pytest.raises(ConfigError):
            static_instance(5, 6, 40.0, seed=0)

    def test_diag_report(self, tmp_path):
        """Test the report on a high-SNR instance with a feasible window."""
        config = build_config(dict(scenario="static_diag", diag_M=10, diag_sparsity=2,
                                   snr_db=100.0, output_dir=tmp_path, plots=False))
        report = _runner().diag(config)
        assert report.gamma_feasible
        assert report.measured_error <= report.relax_bound
        assert report.contraction is not None and report.contraction.passed
        assert report.hard_contraction is not None
        saved = json.loads((tmp_path / "error_bound_report.json").read_text())
        assert saved["s"] == 2
        assert (tmp_path / "manifest.json").exists()

    def test_spline_frame(self):
        frame = spline_frame(np.arange(12.0).reshape(2, 6), v=3)
        assert list(frame.columns) == ["t", "g0_b0", "g0_b1", "g0_b2", "g1_b0", "g1_b1", "g1_b2"]
        assert frame["g1_b0"].tolist() == [3.0, 9.0]


class TestCli:
    """Tests for the command-line entry point."""

    def test_prox_table(self, tmp_path, capsys):
        out = tmp_path / "prox.csv"
        code = main(["prox-table", "--beta", "0.5", "--points", "11", "--output", str(out),
                     "--no-plots"])
        assert code == 0
        assert len(pd.read_csv(out)) == 11
        assert "prox_table" in capsys.readouterr().out

    def test_mcp_table(self, tmp_path):
        out = tmp_path / "mcp.csv"
        assert main(["mcp-table", "--alpha", "2", "--output", str(out), "--no-plots"]) == 0
        assert list(pd.read_csv(out).columns) == ["w", "mcp", "moreau_env", "l1"]

    def test_run(self, tmp_path):
        code = main([
            "run", "--scenario", "jakes", "--M", "10", "--k-sparse", "2", "--n", "60",
            "--trials", "1", "--steady-window", "10", "--lambda", "0.95",
            "--xi2-safety", "0.5", "--no-plots", "--output-dir", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "summary.csv").exists()

    def test_run_from_config_file(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text(
            '[experiment]\nscenario = "jakes"\ntrials = 1\nalgorithms = ["RLS"]\n'
            "[scenario]\nM = 8\nk_sparse = 2\nn = 40\n"
            "[output]\nsteady_window = 10\nplots = false\n"
        )
        out = tmp_path / "out"
        assert main(["run", "--config", str(path), "--output-dir", str(out)]) == 0
        assert (out / "nmse_RLS.csv").exists()

    def test_diag(self, tmp_path, capsys):
        code = main(["diag", "--diag-M", "10", "--diag-sparsity", "2", "--snr-db", "100",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["s"] == 2

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        code = main(["run", "--lambda", "1.5", "--output-dir", str(tmp_path)])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "0.1.0" in capsys.readouterr().out

    def test_presets_listing(self, capsys):
        assert main(["presets", "--category", "tracking", "--search", "fading"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [line.split(":")[0] for line in lines] == ["jakes_20db", "jakes_30db"]
        assert "gamma=30.0" in lines[1]
        assert "K=5" in lines[0]
