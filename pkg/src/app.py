"""
Application layer that runs experiments by combining the core estimators with
scenario adapters, the trial queue and the plotter.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from dataclasses_json import dataclass_json

from . import __version__
from .adapters.jakes_source import JakesConfig, JakesSource
from .adapters.mts_source import DRIVING_LAGS, MTSConfig, MTSSource, group_index
from .adapters.volterra_source import VolterraConfig, VolterraSource
from .config import Algorithm, ExperimentConfig, Scenario, build_config
from .core.diagnostics import ErrorBoundReport, error_bound_report, rsc_alpha1, theorem2_bound
from .core.errors import ConfigError, PlotError, SparlsError
from .core.estimators import (
    AdaptiveFilter,
    BatchProblem,
    PenaltyKind,
    RLSFilter,
    SparlsFilter,
    calibrate_xi2,
    select_xi2,
)
from .core.metrics import (
    NMSETrace,
    PredErrorStats,
    SteadyState,
    TraceSummary,
    mc_aggregate,
    pred_error_stats,
    steady_state,
)
from .core.penalty import (
    GroupLayout,
    PenaltyConfig,
    mcp_value,
    moreau_env,
    prox_regime,
    prox_scalar,
)
from .pipeline.trial_queue import QueueMode, TrialQueue
from .ports.plotter import Plotter
from .ports.stream_source import StreamSource, complex_normal, sigma2_from_snr, trial_seed

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
SWEEP_SEED_OFFSET = 10_000
DIAG_AUDIT_ITERS = 20


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


@dataclass
class TrialPayload:
    """Everything a worker needs to run one trial."""

    config: ExperimentConfig
    trial: int
    record_trajectory: bool = False


@dataclass
class TrialResult:
    """Per-algorithm outputs of one trial, keyed by variant label."""

    trial: int
    xi2: float
    sigma2: float
    traces: Dict[str, NMSETrace] = field(default_factory=dict)
    pred_errors: Dict[str, np.ndarray] = field(default_factory=dict)
    trajectories: Dict[str, np.ndarray] = field(default_factory=dict)


def make_source(config: ExperimentConfig) -> StreamSource:
    """Scenario adapter for ``config``."""
    if config.scenario is Scenario.JAKES:
        return JakesSource(
            JakesConfig(
                M=config.M,
                k_sparse=config.k_sparse,
                n=config.n,
                f_d=config.f_d,
                n_paths=config.jakes_paths,
                switch_time=config.switch_time,
                snr_db=config.snr_db,
                seed=config.seed,
            )
        )
    if config.scenario is Scenario.VOLTERRA:
        return VolterraSource(
            VolterraConfig(
                n=config.n,
                switch_time=config.switch_time,
                snr_db=config.snr_db,
                seed=config.seed,
            )
        )
    if config.scenario is Scenario.MTS:
        return MTSSource(
            MTSConfig(
                lag=config.mts_lag,
                n=config.n,
                v=config.mts_v,
                knot_range=tuple(config.knot_range),
                seed=config.seed,
            )
        )
    raise ConfigError(f"Scenario {config.scenario.value} has no stream source")


def algorithm_variants(config: ExperimentConfig) -> List[Tuple[str, Algorithm, int]]:
    """``(label, algorithm, K)`` for every filter run in a trial."""
    variants = [(alg.value, alg, config.K) for alg in config.algorithms]
    if config.compare_k1 and config.K != 1:
        variants += [
            (f"{alg.value}_K1", alg, 1) for alg in config.algorithms if alg is not Algorithm.RLS
        ]
    return variants


def make_filter(
    algorithm: Algorithm,
    dim: int,
    config: ExperimentConfig,
    xi2: float,
    sigma2: float,
    K: int,
    layout: Optional[GroupLayout] = None,
) -> AdaptiveFilter:
    """Streaming filter for one algorithm."""
    if algorithm is Algorithm.RLS:
        return RLSFilter(dim, config.lam, config.rls_delta)
    if algorithm.is_group and layout is None:
        raise ConfigError(f"{algorithm.value} needs a grouped scenario")
    gamma, alpha = config.penalty_for(algorithm)
    penalty = PenaltyConfig(alpha=alpha, gamma=gamma, xi2=xi2, sigma2=sigma2)
    kind = PenaltyKind.MCP if algorithm.is_mcp else PenaltyKind.L1
    return SparlsFilter(
        dim,
        penalty,
        lam=config.lam,
        K=K,
        kind=kind,
        layout=layout if algorithm.is_group else None,
    )


def run_trial(payload: TrialPayload) -> TrialResult:
    """
    Run every configured filter over one generated stream.

    Module-level so that process pools can pickle it.
    """
    config = payload.config
    stream = make_source(config).generate_trial(config.seed, payload.trial)
    sigma2 = config.sigma2_override if config.sigma2_override is not None else stream.sigma2
    if not sigma2 > 0:
        raise ConfigError(
            "The stream is noise-free; set sigma2_override to run the EM filters",
            {"snr_db": config.snr_db},
        )
    xi2 = calibrate_xi2(stream.X[: 2 * stream.dim], config.lam, sigma2, config.xi2_safety)

    variants = algorithm_variants(config)
    filters = {
        label: make_filter(alg, stream.dim, config, xi2, sigma2, K, stream.layout)
        for label, alg, K in variants
    }
    n = stream.n
    truth = stream.has_ground_truth
    err = {label: np.zeros(n) for label in filters}
    power = {label: np.zeros(n) for label in filters}
    pred = {label: np.zeros(n) for label in filters}
    traj = (
        {label: np.zeros((n, stream.dim)) for label in filters}
        if payload.record_trajectory
        else {}
    )

    for t in range(n):
        x = stream.X[t]
        d = stream.d[t]
        for label, filt in filters.items():
            pred[label][t] = (d - filt.predict(x)).real
            w_hat = filt.update(x, d)
            if truth:
                w = stream.w_true[t]
                err[label][t] = float(np.sum(np.abs(w_hat - w) ** 2))
                power[label][t] = float(np.sum(np.abs(w) ** 2))
            if traj:
                traj[label][t] = w_hat.real

    result = TrialResult(trial=payload.trial, xi2=xi2, sigma2=sigma2, trajectories=traj)
    if truth:
        result.traces = {label: NMSETrace(err[label], power[label]) for label in filters}
    else:
        result.pred_errors = pred
    for label, filt in filters.items():
        final = getattr(filt, "penalty", None)
        if final is not None and final.xi2 < xi2:
            logger.info("Trial %d: %s ended with xi2=%.4g", payload.trial, label, final.xi2)
    logger.debug("Trial %d done (xi2=%.4g)", payload.trial, xi2)
    return result


def run_trials(config: ExperimentConfig, record_trajectory: bool = False) -> List[TrialResult]:
    """Run all trials of ``config``; results are ordered by trial index."""
    queue = TrialQueue()
    for trial in range(config.trials):
        queue.add_job(
            run_trial,
            TrialPayload(config, trial, record_trajectory and trial == 0),
            index=trial,
            metadata={"seed": config.seed, "trial": trial},
        )
    mode = QueueMode.PARALLEL_PROCESS if config.parallel else QueueMode.SEQUENTIAL
    try:
        return queue.run(mode, config.workers)
    finally:
        stats = queue.get_stats()
        logger.info(
            "Trials: %d completed, %d failed, mean duration %s s",
            stats["completed"], stats["failed"],
            "-" if stats["avg_duration"] is None else f"{stats['avg_duration']:.3f}",
        )


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


@dataclass
class ExperimentOutcome:
    """In-memory results of an experiment, before anything is written."""

    labels: List[str]
    summaries: Dict[str, TraceSummary] = field(default_factory=dict)
    steady: Dict[str, SteadyState] = field(default_factory=dict)
    pred_stats: Dict[str, PredErrorStats] = field(default_factory=dict)
    pred_stats_per_trial: Dict[str, List[PredErrorStats]] = field(default_factory=dict)
    results: List[TrialResult] = field(default_factory=list)

    def gap_db(self, label: str, reference: str) -> Tuple[float, float]:
        """Steady-state improvement of ``label`` over ``reference`` (positive is better)."""
        a, b = self.steady[label], self.steady[reference]
        return b.before_switch_db - a.before_switch_db, b.end_db - a.end_db


def aggregate(config: ExperimentConfig, results: List[TrialResult]) -> ExperimentOutcome:
    labels = [label for label, _, _ in algorithm_variants(config)]
    outcome = ExperimentOutcome(labels=labels, results=results)
    if results and results[0].traces:
        for label in labels:
            summary = mc_aggregate([r.traces[label] for r in results])
            outcome.summaries[label] = summary
            outcome.steady[label] = steady_state(
                summary, config.switch_time, config.steady_window
            )
    else:
        for label in labels:
            per_trial = [
                pred_error_stats(r.pred_errors[label], config.pred_window_start)
                for r in results
            ]
            pooled = np.concatenate(
                [r.pred_errors[label][max(config.pred_window_start, 1) - 1 :] for r in results]
            )
            outcome.pred_stats_per_trial[label] = per_trial
            outcome.pred_stats[label] = pred_error_stats(pooled)
    return outcome


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------


@dataclass_json
@dataclass
class RunManifest:
    """Provenance of an artifact bundle; ``created_at`` is the only time-dependent field."""

    library_version: str
    command: str
    config: Dict[str, Any]
    seeds: List[List[int]]
    artifacts: List[str]
    xi2: List[float] = field(default_factory=list)
    created_at: str = ""


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("Wrote %s", path)
    return path


def write_json(payload: Any, path: Path) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.info("Wrote %s", path)
    return path


def _prepare_output(output_dir: Union[str, Path]) -> Path:
    path = Path(output_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        marker = path / ".write_test"
        marker.write_text("")
        marker.unlink()
    except OSError as exc:
        raise ConfigError(f"Output directory {path} is not writable: {exc}") from exc
    return path


class ExperimentRunner:
    """
    High-level interface for the simulation studies.

    Writes CSV artifacts (the contract), optional SVG figures and a manifest.
    """

    def __init__(self, plotter: Optional[Plotter] = None):
        self.plotter = plotter or self._auto_detect_plotter()

    def run_experiment(self, config: ExperimentConfig) -> Dict[str, Path]:
        """
        Run all trials of ``config`` and write the artifact bundle.

        Returns:
            Artifact name to path.

        Raises:
            ConfigError: If the output directory cannot be written.
            TrialError: If a trial failed.
        """
        if config.scenario is Scenario.STATIC_DIAG:
            self.diag(config)
            out = Path(config.output_dir)
            return {"error_bound_report": out / "error_bound_report.json",
                    "manifest": out / "manifest.json"}

        out = _prepare_output(config.output_dir)
        logger.info(
            "Running %s at %.1f dB: %s, %d trials",
            config.scenario.value,
            config.snr_db,
            ", ".join(a.value for a in config.algorithms),
            config.trials,
        )
        results = run_trials(config, record_trajectory=config.scenario is Scenario.MTS)
        outcome = aggregate(config, results)

        artifacts: Dict[str, Path] = {}
        if outcome.summaries:
            artifacts.update(self._write_tracking(config, outcome, out))
        else:
            artifacts.update(self._write_forecast(config, outcome, out))
        if config.plots:
            artifacts.update(self._plot_run(config, outcome, artifacts, out))

        artifacts["manifest"] = self._write_manifest(
            config, "run", sorted(p.name for p in artifacts.values()),
            [r.xi2 for r in results], out,
        )
        logger.info("Experiment finished; artifacts in %s", out)
        return artifacts

    def _write_tracking(
        self, config: ExperimentConfig, outcome: ExperimentOutcome, out: Path
    ) -> Dict[str, Path]:
        artifacts: Dict[str, Path] = {}
        t = np.arange(1, config.n + 1)
        combined = {"t": t}
        for label in outcome.labels:
            summary = outcome.summaries[label]
            frame = pd.DataFrame(
                {"t": t, "nmse_linear": summary.nmse_linear, "nmse_db": summary.nmse_db}
            )
            artifacts[f"nmse_{label}"] = write_csv(frame, out / f"nmse_{label}.csv")
            combined[label] = summary.nmse_db
        artifacts["nmse_all"] = write_csv(pd.DataFrame(combined), out / "nmse_all.csv")

        reference = "RLS" if "RLS" in outcome.labels else outcome.labels[0]
        rows = []
        for label in outcome.labels:
            state = outcome.steady[label]
            gap_before, gap_end = outcome.gap_db(label, reference)
            rows.append(
                {
                    "algorithm": label,
                    "before_switch_db": state.before_switch_db,
                    "end_db": state.end_db,
                    f"gain_before_vs_{reference}_db": gap_before,
                    f"gain_end_vs_{reference}_db": gap_end,
                }
            )
        artifacts["summary"] = write_csv(pd.DataFrame(rows), out / "summary.csv")

        summary_json: Dict[str, Any] = {
            "scenario": config.scenario.value,
            "snr_db": config.snr_db,
            "trials": config.trials,
            "reference": reference,
            "steady_state": {label: outcome.steady[label].to_dict() for label in outcome.labels},
        }
        pairs = [("SPARLS_MCP", "SPARLS_L1"), ("SPARLS_MCP", "RLS"), ("SPARLS_L1", "RLS")]
        summary_json["gains_db"] = {
            f"{a}_vs_{b}": dict(zip(("before_switch", "end"), outcome.gap_db(a, b)))
            for a, b in pairs
            if a in outcome.steady and b in outcome.steady
        }
        artifacts["summary_json"] = write_json(summary_json, out / "summary.json")
        return artifacts

    def _write_forecast(
        self, config: ExperimentConfig, outcome: ExperimentOutcome, out: Path
    ) -> Dict[str, Path]:
        artifacts: Dict[str, Path] = {}
        frames = []
        for result in outcome.results:
            data = {"trial": result.trial, "t": np.arange(1, config.n + 1)}
            data.update({label: result.pred_errors[label] for label in outcome.labels})
            frames.append(pd.DataFrame(data))
        artifacts["pred_errors"] = write_csv(
            pd.concat(frames, ignore_index=True), out / "pred_errors.csv"
        )

        stats_json = {
            label: {
                "pooled": outcome.pred_stats[label].to_dict(),
                "per_trial": [s.to_dict() for s in outcome.pred_stats_per_trial[label]],
                "window_start": config.pred_window_start,
            }
            for label in outcome.labels
        }
        artifacts["pred_error_stats"] = write_json(stats_json, out / "pred_error_stats.json")

        rows = [
            {"algorithm": label, **outcome.pred_stats[label].to_dict()}
            for label in outcome.labels
        ]
        artifacts["summary"] = write_csv(pd.DataFrame(rows), out / "summary.csv")
        artifacts["summary_json"] = write_json(
            {"scenario": config.scenario.value, "trials": config.trials, "pred_error_stats": rows},
            out / "summary.json",
        )

        first = outcome.results[0]
        for label, trajectory in first.trajectories.items():
            artifacts[f"spline_coefficients_{label}"] = write_csv(
                spline_frame(trajectory, config.mts_v),
                out / f"spline_coefficients_{label}.csv",
            )
        return artifacts

    def _plot_run(
        self,
        config: ExperimentConfig,
        outcome: ExperimentOutcome,
        artifacts: Dict[str, Path],
        out: Path,
    ) -> Dict[str, Path]:
        if self.plotter is None:
            logger.warning("No plot backend available; skipping figures")
            return {}
        plots: Dict[str, Path] = {}
        try:
            if "nmse_all" in artifacts:
                curves = pd.read_csv(artifacts["nmse_all"])
                plots["nmse_plot"] = self.plotter.plot_nmse(
                    curves,
                    out / "nmse.svg",
                    title=f"{config.scenario.value} {config.snr_db:g} dB",
                    switch_time=config.switch_time,
                )
            for label in outcome.labels:
                key = f"spline_coefficients_{label}"
                if key in artifacts:
                    plots[f"{key}_plot"] = self.plotter.plot_spline_trajectories(
                        pd.read_csv(artifacts[key]),
                        out / f"{key}.svg",
                        highlight_groups=[group_index(lag, 1) for lag in DRIVING_LAGS],
                        title=label,
                    )
        except PlotError as exc:
            logger.warning("Plotting failed: %s", exc)
        return plots

    def _write_manifest(
        self,
        config: ExperimentConfig,
        command: str,
        artifacts: List[str],
        xi2: List[float],
        out: Path,
    ) -> Path:
        manifest = RunManifest(
            library_version=__version__,
            command=command,
            config=config.model_dump(mode="json"),
            seeds=[[config.seed, trial] for trial in range(config.trials)],
            artifacts=artifacts,
            xi2=xi2,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        return write_json(manifest.to_dict(), out / "manifest.json")

    # -- tables -------------------------------------------------------------

    def prox_table(
        self,
        beta: Union[float, Sequence[float]],
        alpha: float,
        r_grid: Optional[Sequence[float]] = None,
        output_path: Optional[Path] = None,
    ) -> pd.DataFrame:
        """
        Tabulate the scalar MCP prox over ``r_grid`` for one or several ``beta``.

        Columns: ``beta``, ``alpha``, ``regime``, ``r``, ``prox``.
        """
        betas = [float(beta)] if np.isscalar(beta) else [float(b) for b in beta]
        grid = np.linspace(-3.0, 3.0, 601) if r_grid is None else np.asarray(r_grid, float)
        rows = []
        for b in betas:
            regime = prox_regime(b, alpha).value
            for r in grid:
                rows.append(
                    {"beta": b, "alpha": alpha, "regime": regime, "r": float(r),
                     "prox": float(prox_scalar(float(r), b, alpha))}
                )
        table = pd.DataFrame(rows, columns=["beta", "alpha", "regime", "r", "prox"])
        if output_path is not None:
            output_path = Path(output_path)
            _prepare_output(output_path.parent)
            write_csv(table, output_path)
            self._maybe_plot(self.plotter and self.plotter.plot_prox_table, table, output_path)
        return table

    def mcp_table(
        self,
        alpha: float,
        w_grid: Optional[Sequence[float]] = None,
        output_path: Optional[Path] = None,
    ) -> pd.DataFrame:
        """Penalty shapes: columns ``w``, ``mcp``, ``moreau_env``, ``l1``."""
        grid = np.linspace(-3.0, 3.0, 601) if w_grid is None else np.asarray(w_grid, float)
        mag = np.abs(grid)
        table = pd.DataFrame(
            {"w": grid, "mcp": mcp_value(mag, alpha), "moreau_env": moreau_env(mag, alpha),
             "l1": mag}
        )
        if output_path is not None:
            output_path = Path(output_path)
            _prepare_output(output_path.parent)
            write_csv(table, output_path)
            self._maybe_plot(self.plotter and self.plotter.plot_mcp_table, table, output_path)
        return table

    def _maybe_plot(self, method, table: pd.DataFrame, csv_path: Path) -> None:
        if not method:
            return
        try:
            method(table, csv_path.with_suffix(".svg"))
        except PlotError as exc:
            logger.warning("Plotting failed: %s", exc)

    # -- parameter search ---------------------------------------------------

    def gamma_sweep(
        self,
        config: ExperimentConfig,
        values: Sequence[float],
        param: str = "gamma",
        trials: Optional[int] = None,
    ) -> pd.DataFrame:
        """
        Steady-state performance over a grid of ``gamma`` (or ``alpha``).

        Runs on a training seed disjoint from ``config.seed`` and writes
        ``<param>_sweep.csv`` to the output directory.
        """
        if param not in ("gamma", "alpha"):
            raise ConfigError(f"Cannot sweep {param!r}; choose gamma or alpha")
        if config.scenario is Scenario.STATIC_DIAG:
            raise ConfigError("The static diagnostic has no sweep")
        out = _prepare_output(config.output_dir)
        base = config.model_dump()
        base.update(
            seed=config.seed + SWEEP_SEED_OFFSET,
            plots=False,
            compare_k1=False,
            mts_gamma_mcp=None,
            mts_gamma_lasso=None,
            mts_alpha=None,
        )
        if trials is not None:
            base["trials"] = trials
        if param == "gamma":
            base["algorithms"] = [a for a in config.algorithms if a is not Algorithm.RLS]

        rows = []
        for value in values:
            cfg = build_config({**base, param: float(value)})
            outcome = aggregate(cfg, run_trials(cfg))
            for label in outcome.labels:
                row: Dict[str, Any] = {"param": param, "value": float(value), "algorithm": label}
                if outcome.steady:
                    row.update(
                        before_switch_db=outcome.steady[label].before_switch_db,
                        end_db=outcome.steady[label].end_db,
                    )
                else:
                    stats = outcome.pred_stats[label]
                    row.update(pred_mean=stats.mean, pred_std=stats.std)
                rows.append(row)
            logger.info("Sweep %s=%g done", param, value)
        table = pd.DataFrame(rows)
        write_csv(table, out / f"{param}_sweep.csv")
        return table

    # -- static diagnostics -------------------------------------------------

    def diag(self, config: ExperimentConfig) -> ErrorBoundReport:
        """
        Error-bound report on a seeded static instance.

        Unset ``alpha`` becomes half the RSC curvature and unset ``gamma`` the
        geometric mean of the admissible window (its lower edge when empty).
        """
        out = _prepare_output(config.output_dir)
        problem, w_true, eps = static_instance(
            config.diag_M, config.diag_sparsity, config.snr_db, config.seed, config.lam
        )
        alpha = config.alpha if config.alpha is not None else 0.5 * rsc_alpha1(problem.X, problem.lam)
        window = theorem2_bound(
            problem.X, problem.lam, eps, w_true, alpha, sigma2=problem.sigma2
        )
        if config.gamma is not None:
            gamma = config.gamma
        elif window.gamma_feasible:
            gamma = math.sqrt(window.gamma_low * window.gamma_high)
        else:
            logger.warning("Empty gamma window; using its lower edge %.4g", window.gamma_low)
            gamma = window.gamma_low
        xi2 = select_xi2(problem.X, problem.lam, problem.sigma2, config.xi2_safety)
        penalty = PenaltyConfig(alpha=alpha, gamma=gamma, xi2=xi2, sigma2=problem.sigma2)
        report = error_bound_report(
            problem, w_true, eps, penalty, K=DIAG_AUDIT_ITERS, hard_gamma=2.0 * alpha / xi2
        )
        (out / "error_bound_report.json").write_text(report.to_json(indent=2) + "\n")
        logger.info("Wrote %s", out / "error_bound_report.json")
        self._write_manifest(
            config, "diag", ["error_bound_report.json"], [xi2], out
        )
        return report

    def _auto_detect_plotter(self) -> Optional[Plotter]:
        """Auto-detect and return an available plotter."""
        try:
            from .adapters.matplotlib_plotter import MatplotlibPlotter
            return MatplotlibPlotter()
        except ImportError:
            return None


def spline_frame(trajectory: np.ndarray, v: int) -> pd.DataFrame:
    """Coefficient trajectories as columns ``t``, ``g{group}_b{basis}``."""
    n, dim = trajectory.shape
    data: Dict[str, np.ndarray] = {"t": np.arange(1, n + 1)}
    for j in range(dim):
        data[f"g{j // v}_b{j % v}"] = trajectory[:, j]
    return pd.DataFrame(data)


def static_instance(
    M: int, sparsity: int, snr_db: float, seed: int, lam: float = 1.0
) -> Tuple[BatchProblem, np.ndarray, np.ndarray]:
    """
    Seeded static problem with ``n = 10 M`` complex Gaussian rows.

    The true weights have ``sparsity`` nonzeros of magnitude in [1, 2] and random
    phase; the noise variance realizes ``snr_db`` relative to ``||w||^2``.

    Returns:
        The batch problem, the true weights and the noise ``d - X w``.
    """
    if not (1 <= sparsity <= M):
        raise ConfigError("diag_sparsity must lie in [1, diag_M]", {"sparsity": sparsity})
    rng = np.random.default_rng(trial_seed(seed, 0))
    n = 10 * M
    X = complex_normal(rng, (n, M))
    support = np.sort(rng.choice(M, size=sparsity, replace=False))
    w_true = np.zeros(M, dtype=complex)
    w_true[support] = rng.uniform(1.0, 2.0, sparsity) * np.exp(
        1j * rng.uniform(-math.pi, math.pi, sparsity)
    )
    sigma2 = sigma2_from_snr(snr_db, float(np.sum(np.abs(w_true) ** 2)))
    if not sigma2 > 0:
        raise ConfigError("The static diagnostic needs a finite SNR")
    eps = complex_normal(rng, n, sigma2)
    problem = BatchProblem(X, X @ w_true + eps, lam, sigma2)
    return problem, w_true, eps


def quick_run(scenario: str = "jakes", **overrides: Any) -> ExperimentOutcome:
    """Run an experiment in memory without writing artifacts."""
    config = build_config({"scenario": scenario, **overrides})
    if config.scenario is Scenario.STATIC_DIAG:
        raise SparlsError("Use ExperimentRunner.diag for the static diagnostic")
    return aggregate(config, run_trials(config))
