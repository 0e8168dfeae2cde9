"""
Tracking metrics: NMSE curves, Monte Carlo aggregation and prediction-error statistics.

Monte Carlo NMSE is a ratio of means: numerators ``||w_hat - w||^2`` and
denominators ``||w||^2`` are averaged over trials separately before dividing.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from .errors import DimensionError, MetricsError
from .types import CVec, as_cvec

logger = logging.getLogger(__name__)


def to_db(linear):
    """``10 log10(linear)``; zero maps to ``-inf``."""
    with np.errstate(divide="ignore"):
        value = 10.0 * np.log10(np.asarray(linear, dtype=float))
    return float(value) if value.ndim == 0 else value


def from_db(db):
    value = 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return float(value) if value.ndim == 0 else value


def nmse_parts(w_hat: CVec, w_true: CVec) -> Tuple[float, float]:
    """Squared error and true-weight power."""
    w_hat = as_cvec(w_hat, "w_hat")
    w_true = as_cvec(w_true, "w_true")
    if w_hat.shape != w_true.shape:
        raise DimensionError(
            "Estimate and truth differ in length",
            {"w_hat": w_hat.shape[0], "w_true": w_true.shape[0]},
        )
    return (
        float(np.sum(np.abs(w_hat - w_true) ** 2)),
        float(np.sum(np.abs(w_true) ** 2)),
    )


def nmse(w_hat: CVec, w_true: CVec) -> float:
    """
    Normalized squared estimation error ``||w_hat - w||^2 / ||w||^2``.

    Raises:
        MetricsError: If ``w_true`` is zero.
    """
    err, power = nmse_parts(w_hat, w_true)
    if power == 0:
        raise MetricsError("NMSE is undefined for a zero true weight vector")
    return err / power


@dataclass
class NMSETrace:
    """Per-timestep numerator and denominator of one trial."""

    err_power: np.ndarray
    true_power: np.ndarray

    def __post_init__(self) -> None:
        self.err_power = np.asarray(self.err_power, dtype=float)
        self.true_power = np.asarray(self.true_power, dtype=float)
        if self.err_power.shape != self.true_power.shape:
            raise MetricsError("Numerator and denominator traces differ in length")

    def __len__(self) -> int:
        return self.err_power.shape[0]

    @property
    def nmse(self) -> np.ndarray:
        return self.err_power / self.true_power


@dataclass
class TraceSummary:
    """Monte Carlo NMSE curve of one algorithm."""

    nmse_linear: np.ndarray
    err_mean: np.ndarray
    true_mean: np.ndarray
    trial_std: np.ndarray
    trials: int

    @property
    def nmse_db(self) -> np.ndarray:
        return to_db(self.nmse_linear)

    def __len__(self) -> int:
        return self.nmse_linear.shape[0]


def mc_aggregate(traces: Sequence[NMSETrace]) -> TraceSummary:
    """
    Ratio-of-means NMSE over trials.

    Raises:
        MetricsError: With no traces, unequal lengths or zero mean true power.
    """
    if not traces:
        raise MetricsError("mc_aggregate needs at least one trial")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise MetricsError("Trial traces differ in length", {"lengths": sorted(lengths)})
    num = np.stack([t.err_power for t in traces])
    den = np.stack([t.true_power for t in traces])
    err_mean = num.mean(axis=0)
    true_mean = den.mean(axis=0)
    if np.any(true_mean == 0):
        raise MetricsError("Mean true-weight power vanishes at some time step")
    per_trial = num / np.where(den == 0, np.nan, den)
    return TraceSummary(
        nmse_linear=err_mean / true_mean,
        err_mean=err_mean,
        true_mean=true_mean,
        trial_std=np.nanstd(per_trial, axis=0),
        trials=len(traces),
    )


def mean_of_ratios(traces: Sequence[NMSETrace]) -> np.ndarray:
    """Average of per-trial NMSE curves (differs from :func:`mc_aggregate`)."""
    if not traces:
        raise MetricsError("mean_of_ratios needs at least one trial")
    return np.mean(np.stack([t.nmse for t in traces]), axis=0)


@dataclass_json
@dataclass
class SteadyState:
    """Steady-state NMSE in dB before the switch and at the end of the stream."""

    before_switch_db: float
    end_db: float
    window: int


def steady_state(summary: TraceSummary, switch_time: int, window: int = 100) -> SteadyState:
    """
    Window means of the linear NMSE converted to dB.

    ``switch_time`` is the 1-based time index at which the channel changes; the
    pre-switch window covers the ``window`` samples just before it.
    """
    curve = summary.nmse_linear
    n = curve.shape[0]
    if window < 1 or window > n:
        raise MetricsError(f"Invalid steady-state window {window} for length {n}")
    pre_end = min(max(switch_time - 1, 0), n)
    pre_start = max(pre_end - window, 0)
    if pre_end == pre_start:
        raise MetricsError("Empty pre-switch window", {"switch_time": switch_time})
    return SteadyState(
        before_switch_db=to_db(float(np.mean(curve[pre_start:pre_end]))),
        end_db=to_db(float(np.mean(curve[n - window :]))),
        window=window,
    )


@dataclass_json
@dataclass
class PredErrorStats:
    """Summary statistics of signed one-step prediction errors."""

    mean: float
    std: float
    quantile_2_5: float
    quantile_97_5: float
    count: int = 0


def pred_error_stats(errors: Sequence[float], window_start: int = 1) -> PredErrorStats:
    """
    Statistics of ``errors`` over time indices ``t >= window_start``.

    ``errors[0]`` belongs to ``t = 1``. The standard deviation is the population
    one and quantiles interpolate linearly between order statistics.

    Raises:
        MetricsError: If the window is empty.
    """
    values = np.asarray(errors, dtype=float).reshape(-1)
    window = values[max(window_start, 1) - 1 :]
    if window.size == 0:
        raise MetricsError(
            "Prediction-error window is empty",
            {"length": values.size, "window_start": window_start},
        )
    low, high = np.quantile(window, [0.025, 0.975])
    return PredErrorStats(
        mean=float(np.mean(window)),
        std=float(np.std(window)),
        quantile_2_5=float(low),
        quantile_97_5=float(high),
        count=int(window.size),
    )

