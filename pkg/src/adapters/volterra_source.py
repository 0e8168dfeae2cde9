"""
Sparse third-order Volterra channel with memory 7.

Feature layout (72 entries): first-order terms ``x(i-k)`` for ``k = 0..7``,
then third-order terms ``x(i-m)^2 conj(x(i-n))`` in row-major ``(m, n)`` order,
so that slot ``(m, n)`` sits at index ``8 + 8 m + n``.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import StreamError
from ..ports.stream_source import Stream, StreamSource, complex_normal, sigma2_from_snr

logger = logging.getLogger(__name__)

MEMORY = 7
TAPS = MEMORY + 1
FEATURE_DIM = TAPS + TAPS * TAPS

# Active terms before and after the switch: ("lin", k) or ("cubic", m, n).
PRE_SWITCH_TERMS: Tuple[Tuple[int, ...], ...] = ((3,), (5,), (1, 4), (5, 1))
POST_SWITCH_TERMS: Tuple[Tuple[int, ...], ...] = ((3,), (7,), (1, 4), (6, 1))

SeedLike = Union[int, np.random.SeedSequence, None]


def linear_index(k: int) -> int:
    return k


def cubic_index(m: int, n: int) -> int:
    return TAPS + TAPS * m + n


def term_index(term: Sequence[int]) -> int:
    return linear_index(term[0]) if len(term) == 1 else cubic_index(term[0], term[1])


def term_power(term: Sequence[int]) -> float:
    """``E|feature|^2`` for unit-variance circular Gaussian inputs."""
    if len(term) == 1:
        return 1.0
    return 6.0 if term[0] == term[1] else 2.0


@dataclass(frozen=True)
class VolterraConfig:
    """Volterra scenario parameters; the feature dimension is fixed at 72."""

    memory: int = MEMORY
    n: int = 1000
    switch_time: int = 501
    snr_db: float = 20.0
    seed: int = 0
    calibration: int = 2 * FEATURE_DIM

    def __post_init__(self) -> None:
        if self.memory != MEMORY:
            raise StreamError(
                f"Only memory {MEMORY} is supported", {"memory": self.memory}
            )
        if self.n < 1 or not (1 <= self.switch_time <= self.n):
            raise StreamError(
                "switch_time must lie in [1, n]",
                {"switch_time": self.switch_time, "n": self.n},
            )
        if self.calibration < 1:
            raise StreamError("calibration prefix must be positive")

    @property
    def dim(self) -> int:
        return FEATURE_DIM


def volterra_features(history: Sequence[complex]) -> np.ndarray:
    """
    Feature vector from ``history[k] = x(i-k)``, ``k = 0..7``.

    Raises:
        StreamError: If the history does not hold exactly 8 samples.
    """
    h = np.asarray(history, dtype=complex).reshape(-1)
    if h.shape[0] != TAPS:
        raise StreamError(
            f"Volterra history must hold {TAPS} samples, got {h.shape[0]}",
            {"length": h.shape[0]},
        )
    cubic = np.outer(h * h, h.conj()).reshape(-1)
    return np.concatenate([h, cubic])


def volterra_design(x: np.ndarray) -> np.ndarray:
    """
    Feature rows for every time of a zero-padded input sequence.

    Row ``i`` uses ``x[i], x[i-1], ..., x[i-7]`` with zeros before the start.
    """
    x = np.asarray(x, dtype=complex).reshape(-1)
    padded = np.concatenate([np.zeros(MEMORY, dtype=complex), x])
    histories = np.stack(
        [padded[MEMORY - k : MEMORY - k + x.shape[0]] for k in range(TAPS)], axis=1
    )
    cubic = (histories**2)[:, :, None] * histories.conj()[:, None, :]
    return np.concatenate([histories, cubic.reshape(x.shape[0], -1)], axis=1)


class VolterraSource(StreamSource):
    """
    Sparse Volterra scenario.

    Exactly four coefficients are active at any time; three of the four slots
    change at the switch and all coefficients are redrawn from CN(0, 1). The
    features are scaled by one global factor so that their empirical aggregate
    power over the calibration prefix is 1; weights are expressed in the scaled
    feature space, so ``d = w^H x + eps`` holds exactly.
    """

    name = "volterra"

    def __init__(self, config: Optional[VolterraConfig] = None):
        self.config = config or VolterraConfig()

    @property
    def dim(self) -> int:
        return FEATURE_DIM

    @staticmethod
    def support(terms: Sequence[Sequence[int]]) -> List[int]:
        return sorted(term_index(t) for t in terms)

    def expected_signal_power(self) -> float:
        """Received power of the clean output (independent of the feature scale)."""
        return float(sum(term_power(t) for t in PRE_SWITCH_TERMS))

    def generate(self, seed: SeedLike = None) -> Stream:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed if seed is None else seed)

        x = complex_normal(rng, cfg.n)
        raw = volterra_design(x)
        prefix = raw[: min(cfg.calibration, cfg.n)]
        scale = 1.0 / np.sqrt(np.mean(np.sum(np.abs(prefix) ** 2, axis=1)))
        features = scale * raw

        coeff_pre = complex_normal(rng, len(PRE_SWITCH_TERMS))
        coeff_post = complex_normal(rng, len(POST_SWITCH_TERMS))

        # d = sum_j c_j f_j = w^H (scale f) with w_j = conj(c_j) / scale.
        w_true = np.zeros((cfg.n, FEATURE_DIM), dtype=complex)
        pre = cfg.switch_time - 1
        for term, c in zip(PRE_SWITCH_TERMS, coeff_pre):
            w_true[:pre, term_index(term)] = np.conj(c) / scale
        for term, c in zip(POST_SWITCH_TERMS, coeff_post):
            w_true[pre:, term_index(term)] = np.conj(c) / scale

        sigma2 = sigma2_from_snr(cfg.snr_db, self.expected_signal_power())
        noise = complex_normal(rng, cfg.n, sigma2) if sigma2 > 0 else np.zeros(cfg.n, complex)
        d = np.einsum("tm,tm->t", w_true.conj(), features) + noise

        meta: Dict[str, object] = {
            "support_before": self.support(PRE_SWITCH_TERMS),
            "support_after": self.support(POST_SWITCH_TERMS),
            "feature_scale": float(scale),
            "switch_time": cfg.switch_time,
            "snr_db": cfg.snr_db,
        }
        logger.debug("Volterra stream: scale=%.4g sigma2=%.3g", scale, sigma2)
        return Stream(
            X=features,
            d=d,
            w_true=w_true,
            noise=noise,
            sigma2=sigma2,
            name=self.name,
            meta=meta,
        )


def volterra_stream(cfg: VolterraConfig, seed: SeedLike = None) -> Stream:
    """Generate one Volterra stream for ``cfg``."""
    return VolterraSource(cfg).generate(seed)
