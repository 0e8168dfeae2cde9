"""
Scaled minimax concave penalty (MCP) and its proximal operators.

The penalty is ``rho_alpha(w) = |w| - env_alpha(|w|)`` where ``env_alpha`` is the
Moreau envelope of the absolute value. Its proximal map

    prox(r) = argmin_w (1/2 beta) |r - w|^2 + rho_alpha(|w|)

is firm thresholding when ``beta < alpha`` and hard thresholding at
``sqrt(alpha * beta)`` when ``beta > alpha``. Complex inputs are thresholded on
the modulus and keep their phase.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Tuple, Union

import numpy as np

from .errors import DimensionError, PenaltyDomainError
from .types import CVec, as_cvec

logger = logging.getLogger(__name__)

Number = Union[float, complex]


class TiePolicy(Enum):
    """How measure-zero prox ties are resolved."""

    ZERO = "zero"
    KEEP = "keep"


class ThresholdRegime(Enum):
    """Shape of the MCP proximal map for a given (beta, alpha)."""

    FIRM = "firm"
    BOUNDARY = "boundary"
    HARD = "hard"


def _check_positive(value: float, name: str) -> None:
    if not (value > 0) or not math.isfinite(value):
        raise PenaltyDomainError(
            f"{name} must be a positive finite number, got {value}",
            {name: value},
        )


def prox_regime(beta: float, alpha: float) -> ThresholdRegime:
    """Classify ``(beta, alpha)`` into the firm, boundary or hard regime."""
    _check_positive(beta, "beta")
    _check_positive(alpha, "alpha")
    if beta < alpha:
        return ThresholdRegime.FIRM
    if beta == alpha:
        return ThresholdRegime.BOUNDARY
    return ThresholdRegime.HARD


@dataclass(frozen=True)
class PenaltyConfig:
    """
    All MCP parameters used by the estimators.

    Attributes:
        alpha: Moreau envelope height.
        gamma: Penalization level.
        xi2: Latent-noise scale of the EM decomposition.
        sigma2: Observation-noise variance.
        tie_policy: Resolution of prox ties.
    """

    alpha: float
    gamma: float
    xi2: float
    sigma2: float
    tie_policy: TiePolicy = TiePolicy.ZERO

    def __post_init__(self) -> None:
        _check_positive(self.alpha, "alpha")
        _check_positive(self.xi2, "xi2")
        _check_positive(self.sigma2, "sigma2")
        if not (self.gamma >= 0) or not math.isfinite(self.gamma):
            raise PenaltyDomainError(
                f"gamma must be a nonnegative finite number, got {self.gamma}",
                {"gamma": self.gamma},
            )

    @property
    def beta(self) -> float:
        """Effective prox scale used by the M-step."""
        return self.xi2 * self.gamma

    @property
    def ratio(self) -> float:
        """The E-step gain xi2 / sigma2."""
        return self.xi2 / self.sigma2

    @property
    def regime(self) -> ThresholdRegime:
        if self.beta == 0:
            return ThresholdRegime.FIRM
        return prox_regime(self.beta, self.alpha)

    def with_xi2(self, xi2: float) -> "PenaltyConfig":
        return replace(self, xi2=xi2)

    def with_gamma(self, gamma: float) -> "PenaltyConfig":
        return replace(self, gamma=gamma)


@dataclass(frozen=True)
class GroupLayout:
    """Partition of weight indices into contiguous groups."""

    group_sizes: Tuple[int, ...]
    _offsets: Tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.group_sizes)
        if not sizes:
            raise DimensionError("GroupLayout needs at least one group")
        if any(s <= 0 for s in sizes):
            raise DimensionError(
                "Group sizes must be positive integers", {"group_sizes": sizes}
            )
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "_offsets", tuple(np.cumsum((0,) + sizes[:-1])))

    @classmethod
    def uniform(cls, n_groups: int, size: int) -> "GroupLayout":
        return cls(tuple([size] * n_groups))

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def dim(self) -> int:
        return int(sum(self.group_sizes))

    @property
    def offsets(self) -> Tuple[int, ...]:
        return self._offsets

    def slices(self) -> List[slice]:
        return [
            slice(start, start + size)
            for start, size in zip(self._offsets, self.group_sizes)
        ]

    def validate(self, w: np.ndarray) -> None:
        if w.shape[0] != self.dim:
            raise DimensionError(
                f"Vector of length {w.shape[0]} does not match layout of "
                f"dimension {self.dim}",
                {"length": w.shape[0], "layout_dim": self.dim},
            )

    def group_norms(self, w: np.ndarray) -> np.ndarray:
        """Euclidean (Hermitian) norm of every group."""
        w = as_cvec(w, "w")
        self.validate(w)
        power = np.add.reduceat(np.abs(w) ** 2, np.asarray(self._offsets))
        return np.sqrt(power)

    def expand(self, per_group: np.ndarray) -> np.ndarray:
        """Repeat one value per group onto every index of the group."""
        return np.repeat(per_group, self.group_sizes)


# ---------------------------------------------------------------------------
# Penalty values
# ---------------------------------------------------------------------------


def _check_magnitude(w_abs: np.ndarray) -> None:
    if np.any(w_abs < 0) or np.any(np.isnan(w_abs)):
        raise PenaltyDomainError("Magnitude argument must be nonnegative")


def mcp_value(w_abs, alpha: float):
    """
    Scaled MCP evaluated at a magnitude.

    Args:
        w_abs: Nonnegative magnitude (scalar or array).
        alpha: Envelope height.

    Returns:
        ``w - w^2/(2 alpha)`` below ``alpha`` and ``alpha/2`` above.

    Raises:
        PenaltyDomainError: On negative magnitudes or nonpositive alpha.
    """
    _check_positive(alpha, "alpha")
    w = np.asarray(w_abs, dtype=float)
    _check_magnitude(w)
    value = np.where(w <= alpha, w - w * w / (2.0 * alpha), alpha / 2.0)
    return float(value) if value.ndim == 0 else value


def moreau_env(w_abs, alpha: float):
    """Moreau envelope of ``|.|``: ``w^2/(2 alpha)`` below ``alpha``, ``w - alpha/2`` above."""
    _check_positive(alpha, "alpha")
    w = np.asarray(w_abs, dtype=float)
    _check_magnitude(w)
    value = np.where(w <= alpha, w * w / (2.0 * alpha), w - alpha / 2.0)
    return float(value) if value.ndim == 0 else value


def mcp_penalty(w, alpha: float) -> float:
    """Elementwise MCP summed over a vector."""
    return float(np.sum(mcp_value(np.abs(as_cvec(w, "w")), alpha)))


def group_mcp_penalty(w, layout: GroupLayout, alpha: float) -> float:
    """MCP applied to every group norm, summed over groups."""
    return float(np.sum(mcp_value(layout.group_norms(w), alpha)))


# ---------------------------------------------------------------------------
# Proximal operators
# ---------------------------------------------------------------------------


def _mcp_gain(
    mag: np.ndarray, beta: float, alpha: float, tie_policy: TiePolicy
) -> np.ndarray:
    """Real gain g(|r|) such that prox(r) = g(|r|) * r."""
    regime = prox_regime(beta, alpha)
    gain = np.zeros_like(mag, dtype=float)

    if regime is ThresholdRegime.FIRM:
        ramp = (mag > beta) & (mag <= alpha)
        safe = np.where(ramp, mag, 1.0)
        gain = np.where(ramp, alpha / (alpha - beta) * (1.0 - beta / safe), gain)
        return np.where(mag > alpha, 1.0, gain)

    threshold = alpha if regime is ThresholdRegime.BOUNDARY else math.sqrt(alpha * beta)
    gain = np.where(mag > threshold, 1.0, gain)
    if tie_policy is TiePolicy.KEEP:
        gain = np.where(mag == threshold, 1.0, gain)
    return gain


def prox_scalar(
    r: Number,
    beta: float,
    alpha: float,
    tie_policy: TiePolicy = TiePolicy.ZERO,
) -> Number:
    """
    Proximal map of the scaled MCP for one complex (or real) scalar.

    Args:
        r: Input point.
        beta: Prox scale.
        alpha: Envelope height.
        tie_policy: Resolution of exact ties at the hard threshold.

    Returns:
        The minimizer, with the phase of ``r`` and the type of ``r``.

    Raises:
        PenaltyDomainError: If beta or alpha is not positive.
    """
    gain = _mcp_gain(np.asarray([abs(r)], dtype=float), beta, alpha, tie_policy)
    return float(gain[0]) * r


def prox_vector(
    r,
    beta: float,
    alpha: float,
    tie_policy: TiePolicy = TiePolicy.ZERO,
) -> CVec:
    """Elementwise :func:`prox_scalar`."""
    r = as_cvec(r, "r")
    return _mcp_gain(np.abs(r), beta, alpha, tie_policy) * r


def prox_group(r, layout: GroupLayout, beta: float, alpha: float) -> CVec:
    """
    Group MCP proximal map (firm regime only).

    Each group ``r_l`` is zeroed when ``||r_l|| <= beta``, scaled by
    ``alpha/(alpha-beta) * (1 - beta/||r_l||)`` up to ``alpha``, and passed
    through unchanged above ``alpha``.

    Raises:
        PenaltyDomainError: If ``beta >= alpha`` or either is nonpositive.
        DimensionError: If ``layout`` does not match ``r``.
    """
    r = as_cvec(r, "r")
    if prox_regime(beta, alpha) is not ThresholdRegime.FIRM:
        raise PenaltyDomainError(
            "Group MCP prox is defined for the firm regime only (beta < alpha)",
            {"beta": beta, "alpha": alpha},
        )
    norms = layout.group_norms(r)
    gains = _mcp_gain(norms, beta, alpha, TiePolicy.ZERO)
    return layout.expand(gains) * r


def _soft_gain(mag: np.ndarray, threshold: float) -> np.ndarray:
    if not (threshold >= 0) or not math.isfinite(threshold):
        raise PenaltyDomainError(
            f"threshold must be nonnegative, got {threshold}",
            {"threshold": threshold},
        )
    safe = np.where(mag > threshold, mag, 1.0)
    return np.where(mag > threshold, 1.0 - threshold / safe, 0.0)


def prox_soft(r: Number, threshold: float) -> Number:
    """Soft thresholding ``max(|r| - t, 0) * phase(r)``."""
    gain = _soft_gain(np.asarray([abs(r)], dtype=float), threshold)
    return float(gain[0]) * r


def prox_soft_vector(r, threshold: float) -> CVec:
    r = as_cvec(r, "r")
    return _soft_gain(np.abs(r), threshold) * r


def prox_group_soft(r, layout: GroupLayout, threshold: float) -> CVec:
    """Block soft thresholding ``(1 - t/||r_l||)_+ r_l`` (group Lasso prox)."""
    r = as_cvec(r, "r")
    gains = _soft_gain(layout.group_norms(r), threshold)
    return layout.expand(gains) * r
