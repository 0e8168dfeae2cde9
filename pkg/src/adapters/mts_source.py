"""
Bivariate nonlinear time series forecast with an additive quadratic-spline model.

The response ``X2`` depends on two lags of ``X1`` only; the design row expands
every lag ``1..8`` of both series in a quadratic B-spline basis, giving
``2 * 8 * v`` features in ``16`` groups of ``v``. The model has no ground-truth
weight vector.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.interpolate import BSpline

from ..core.errors import StreamError
from ..core.penalty import GroupLayout
from ..ports.stream_source import Stream, StreamSource

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, None]

SPLINE_DEGREE = 2
DRIVING_LAGS = (2, 7)


class QuadSplineBasis:
    """
    Clamped quadratic B-spline basis with ``v`` functions on ``knot_range``.

    The ``v - 1`` breakpoints are equally spaced and include both ends of the
    range. Inputs outside the range are clamped to it.
    """

    def __init__(self, v: int = 10, knot_range: Tuple[float, float] = (-3.0, 3.0)):
        if v < 3:
            raise StreamError(f"Quadratic splines need v >= 3, got {v}", {"v": v})
        low, high = float(knot_range[0]), float(knot_range[1])
        if not low < high:
            raise StreamError("knot_range must be increasing", {"knot_range": knot_range})
        self.v = v
        self.knot_range = (low, high)
        self.breakpoints = np.linspace(low, high, v - 1)
        self.knots = np.concatenate(
            [[low] * SPLINE_DEGREE, self.breakpoints, [high] * SPLINE_DEGREE]
        )
        self._spline = BSpline(self.knots, np.eye(v), SPLINE_DEGREE, extrapolate=True)

    def __call__(self, x) -> np.ndarray:
        """Basis values, shape ``(len(x), v)`` (or ``(v,)`` for a scalar)."""
        arr = np.asarray(x, dtype=float)
        clipped = np.clip(arr.reshape(-1), *self.knot_range)
        values = self._spline(clipped)
        return values[0] if arr.ndim == 0 else values

    def derivative(self) -> BSpline:
        return self._spline.derivative()


def quad_spline_basis(
    x: float, v: int = 10, knot_range: Tuple[float, float] = (-3.0, 3.0)
) -> np.ndarray:
    """Values of the ``v`` quadratic B-spline basis functions at ``x``."""
    return QuadSplineBasis(v, knot_range)(x)


def mts_series(x1: np.ndarray, eps2: np.ndarray, noise_scale: float = 0.2) -> np.ndarray:
    """
    ``X2[t] = 0.4 X1[t-2]^2 - 0.8 X1[t-7] + noise_scale * eps2[t]``.

    Entries before the longest driving lag carry the noise term only.
    """
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    eps2 = np.asarray(eps2, dtype=float).reshape(-1)
    if x1.shape != eps2.shape:
        raise StreamError("X1 and its noise must have equal length")
    x2 = noise_scale * eps2
    first = max(DRIVING_LAGS)
    lag_a, lag_b = DRIVING_LAGS
    x2[first:] += (
        0.4 * x1[first - lag_a : x1.shape[0] - lag_a] ** 2
        - 0.8 * x1[first - lag_b : x1.shape[0] - lag_b]
    )
    return x2


@dataclass(frozen=True)
class MTSConfig:
    """Parameters of the spline forecasting scenario."""

    lag: int = 8
    n: int = 1000
    v: int = 10
    knot_range: Tuple[float, float] = (-3.0, 3.0)
    noise_scale: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lag < max(DRIVING_LAGS):
            raise StreamError(
                f"lag must cover the driving lags {DRIVING_LAGS}", {"lag": self.lag}
            )
        if self.n < 1 or self.v < 3:
            raise StreamError("n must be positive and v >= 3", {"n": self.n, "v": self.v})

    @property
    def dim(self) -> int:
        return 2 * self.lag * self.v

    @property
    def layout(self) -> GroupLayout:
        return GroupLayout.uniform(2 * self.lag, self.v)

    @property
    def sigma2(self) -> float:
        return self.noise_scale**2


def group_index(lag: int, series: int) -> int:
    """Group of ``(lag, series)``; lags start at 1, series are 1 (X1) or 2 (X2)."""
    return 2 * (lag - 1) + (series - 1)


class MTSSource(StreamSource):
    """Spline design rows and ``d = X2[t]``; weights are unknown."""

    name = "mts"

    def __init__(self, config: Optional[MTSConfig] = None):
        self.config = config or MTSConfig()
        self.basis = QuadSplineBasis(self.config.v, self.config.knot_range)

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def layout(self) -> GroupLayout:
        return self.config.layout

    def design(self, x1: np.ndarray, x2: np.ndarray, start: int) -> np.ndarray:
        """Rows for times ``start..len-1`` from lags ``1..lag`` of both series."""
        cfg = self.config
        stop = x1.shape[0]
        blocks = []
        for i in range(1, cfg.lag + 1):
            blocks.append(self.basis(x1[start - i : stop - i]))
            blocks.append(self.basis(x2[start - i : stop - i]))
        return np.concatenate(blocks, axis=1)

    def generate(self, seed: SeedLike = None) -> Stream:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed if seed is None else seed)
        # Burn-in so every lagged X2 already depends on valid X1 lags.
        burn = cfg.lag + max(DRIVING_LAGS) + 1
        total = cfg.n + burn
        x1 = rng.standard_normal(total)
        eps2 = rng.standard_normal(total)
        x2 = mts_series(x1, eps2, cfg.noise_scale)

        X = self.design(x1, x2, burn)
        d = x2[burn:]
        logger.debug("MTS stream: %d rows of %d spline features", X.shape[0], X.shape[1])
        return Stream(
            X=X,
            d=d,
            w_true=None,
            noise=cfg.noise_scale * eps2[burn:],
            sigma2=cfg.sigma2,
            layout=self.layout,
            name=self.name,
            meta={
                "active_groups": [group_index(lag, 1) for lag in DRIVING_LAGS],
                "n_groups": self.layout.n_groups,
                "v": cfg.v,
                "knot_range": list(cfg.knot_range),
            },
        )


def mts_stream(cfg: MTSConfig, seed: SeedLike = None) -> Stream:
    """Generate one spline-forecasting stream for ``cfg``."""
    return MTSSource(cfg).generate(seed)
