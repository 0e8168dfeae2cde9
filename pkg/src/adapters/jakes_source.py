"""
Sparse time-varying channel whose active taps fade according to the Jakes model.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..core.errors import StreamError
from ..ports.stream_source import Stream, StreamSource, complex_normal, sigma2_from_snr

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, None]


@dataclass(frozen=True)
class JakesConfig:
    """
    Jakes scenario parameters.

    Attributes:
        M: Tap-weight length.
        k_sparse: Number of active taps.
        n: Stream length.
        f_d: Normalized Doppler shift.
        n_paths: Sinusoids summed per tap.
        switch_time: 1-based time at which one tap is muted and another activated.
        snr_db: Channel energy over noise variance, in dB.
        seed: Default seed used by :meth:`JakesSource.generate` when none is given.
    """

    M: int = 100
    k_sparse: int = 5
    n: int = 1000
    f_d: float = 1e-4
    n_paths: int = 64
    switch_time: int = 501
    snr_db: float = 20.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.M < 1 or self.n < 1 or self.n_paths < 1:
            raise StreamError("M, n and n_paths must be positive", {"config": self})
        if not (1 <= self.k_sparse < self.M):
            raise StreamError(
                "k_sparse must lie in [1, M)", {"k_sparse": self.k_sparse, "M": self.M}
            )
        if not (1 <= self.switch_time <= self.n):
            raise StreamError(
                "switch_time must lie in [1, n]",
                {"switch_time": self.switch_time, "n": self.n},
            )
        if self.f_d < 0:
            raise StreamError("Doppler shift must be nonnegative", {"f_d": self.f_d})


def jakes_quadratures(
    f_d: float,
    n: int,
    n_paths: int,
    rng: Optional[np.random.Generator] = None,
    *,
    angles: Optional[np.ndarray] = None,
    phases: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    In-phase and quadrature fading components ``g_c``, ``g_s`` at times 1..n.

    Arrival angles and phases are drawn uniformly on (-pi, pi) once per path
    unless given explicitly.
    """
    if n_paths < 1:
        raise StreamError("n_paths must be positive", {"n_paths": n_paths})
    rng = rng if rng is not None else np.random.default_rng()
    if angles is None:
        angles = rng.uniform(-math.pi, math.pi, n_paths)
    if phases is None:
        phases = rng.uniform(-math.pi, math.pi, n_paths)
    angles = np.asarray(angles, dtype=float).reshape(1, -1)
    phases = np.asarray(phases, dtype=float).reshape(1, -1)

    times = np.arange(1, n + 1, dtype=float).reshape(-1, 1)
    arg = 2.0 * math.pi * f_d * times * np.cos(angles) + phases
    scale = math.sqrt(2.0 / angles.shape[1])
    return scale * np.cos(arg).sum(axis=1), scale * np.sin(arg).sum(axis=1)


def jakes_gain_series(
    f_d: float, n: int, n_paths: int = 64, seed: SeedLike = None
) -> np.ndarray:
    """Fading envelope ``sqrt(g_c^2 + g_s^2)`` of one tap over n samples."""
    g_c, g_s = jakes_quadratures(f_d, n, n_paths, np.random.default_rng(seed))
    return np.hypot(g_c, g_s)


def jakes_envelope_samples(n_samples: int, n_paths: int = 64, seed: SeedLike = None) -> np.ndarray:
    """
    Independent envelope samples, one fresh set of paths per sample.

    Used to check the Rayleigh marginal (``E[w^2] = 2``).
    """
    rng = np.random.default_rng(seed)
    phases = rng.uniform(-math.pi, math.pi, (n_samples, n_paths))
    scale = math.sqrt(2.0 / n_paths)
    return scale * np.hypot(np.cos(phases).sum(axis=1), np.sin(phases).sum(axis=1))


class JakesSource(StreamSource):
    """
    Jakes fading scenario.

    ``k_sparse`` taps are active, each with an independent fading envelope. At
    ``switch_time`` one active tap is muted and one inactive tap activated. Inputs
    are i.i.d. circular complex Gaussian with per-element variance ``1/M``.
    The noise variance is set from ``snr_db`` relative to the channel energy
    ``E||w||^2 = 2 k_sparse``.
    """

    name = "jakes"

    def __init__(self, config: Optional[JakesConfig] = None):
        self.config = config or JakesConfig()

    @property
    def dim(self) -> int:
        return self.config.M

    def expected_signal_power(self) -> float:
        # Each envelope has E[w^2] = 2.
        return 2.0 * self.config.k_sparse

    def generate(self, seed: SeedLike = None) -> Stream:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed if seed is None else seed)

        support = np.sort(rng.choice(cfg.M, size=cfg.k_sparse, replace=False))
        inactive = np.setdiff1d(np.arange(cfg.M), support)
        muted = int(rng.choice(support))
        activated = int(rng.choice(inactive))
        support_after = np.sort(np.append(support[support != muted], activated))

        w_true = np.zeros((cfg.n, cfg.M), dtype=complex)
        pre = cfg.switch_time - 1
        for tap in np.union1d(support, [activated]):
            g_c, g_s = jakes_quadratures(cfg.f_d, cfg.n, cfg.n_paths, rng)
            envelope = np.hypot(g_c, g_s)
            if tap == muted:
                w_true[:pre, tap] = envelope[:pre]
            elif tap == activated:
                w_true[pre:, tap] = envelope[pre:]
            else:
                w_true[:, tap] = envelope

        X = complex_normal(rng, (cfg.n, cfg.M), 1.0 / cfg.M)
        sigma2 = sigma2_from_snr(cfg.snr_db, self.expected_signal_power())
        noise = complex_normal(rng, cfg.n, sigma2) if sigma2 > 0 else np.zeros(cfg.n, complex)
        d = np.einsum("tm,tm->t", w_true.conj(), X) + noise

        logger.debug(
            "Jakes stream: support=%s muted=%d activated=%d sigma2=%.3g",
            support.tolist(),
            muted,
            activated,
            sigma2,
        )
        return Stream(
            X=X,
            d=d,
            w_true=w_true,
            noise=noise,
            sigma2=sigma2,
            name=self.name,
            meta={
                "support_before": support.tolist(),
                "support_after": support_after.tolist(),
                "muted": muted,
                "activated": activated,
                "switch_time": cfg.switch_time,
                "snr_db": cfg.snr_db,
            },
        )


def jakes_stream(cfg: JakesConfig, seed: SeedLike = None) -> Stream:
    """Generate one Jakes stream for ``cfg``."""
    return JakesSource(cfg).generate(seed)
