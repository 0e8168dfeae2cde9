"""
Stream source port: the data contract between scenario generators and the runner.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core.errors import StreamError
from ..core.estimators import BatchProblem
from ..core.penalty import GroupLayout
from ..core.types import CMat, CVec

logger = logging.getLogger(__name__)


def sigma2_from_snr(snr_db: float, expected_w_power: float) -> float:
    """
    Noise variance that realizes ``snr_db`` for a given expected signal power.

    ``sigma2 = expected_w_power / 10**(snr_db / 10)``; an infinite SNR gives zero.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    if math.isnan(snr_db):
        raise StreamError("snr_db must not be NaN")
    return expected_w_power / 10.0 ** (snr_db / 10.0)


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Seed of one Monte Carlo trial: ``SeedSequence([seed, trial])``."""
    return np.random.SeedSequence([int(seed), int(trial)])


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(seed, trial))


def complex_normal(
    rng: np.random.Generator, shape: Union[int, Tuple[int, ...]], variance: float = 1.0
) -> np.ndarray:
    """Circular complex Gaussian samples with ``E|z|^2 = variance``."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass
class Stream:
    """
    A finite stream of ``(x(t), d(t), w_true(t))`` records.

    Attributes:
        X: n x M inputs, one row per time step (not conjugated).
        d: Responses ``d(t) = w(t)^H x(t) + eps(t)``.
        w_true: n x M true weights, or None when there is no ground truth.
        noise: Realized noise, when known.
        sigma2: Noise variance used to generate the stream.
        layout: Group layout of the weight vector, when grouped.
        meta: Free-form generator metadata.
    """

    X: CMat
    d: CVec
    w_true: Optional[CMat] = None
    noise: Optional[CVec] = None
    sigma2: float = 0.0
    layout: Optional[GroupLayout] = None
    name: str = "stream"
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=complex)
        self.d = np.asarray(self.d, dtype=complex).reshape(-1)
        if self.X.ndim != 2 or self.X.shape[0] != self.d.shape[0]:
            raise StreamError(
                "Stream inputs and responses do not line up",
                {"X": self.X.shape, "d": self.d.shape},
            )
        if self.w_true is not None:
            self.w_true = np.asarray(self.w_true, dtype=complex)
            if self.w_true.shape != self.X.shape:
                raise StreamError(
                    "True weights must have one row per time step",
                    {"w_true": self.w_true.shape, "X": self.X.shape},
                )
        if self.noise is not None:
            self.noise = np.asarray(self.noise, dtype=complex).reshape(-1)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def has_ground_truth(self) -> bool:
        return self.w_true is not None

    def __len__(self) -> int:
        return self.n

    def records(self) -> Iterator[Tuple[CVec, complex, Optional[CVec]]]:
        for t in range(self.n):
            w = None if self.w_true is None else self.w_true[t]
            yield self.X[t], complex(self.d[t]), w

    def to_batch(self, lam: float, sigma2: float, upto: Optional[int] = None) -> BatchProblem:
        """Stack the first ``upto`` samples as a batch problem."""
        stop = self.n if upto is None else upto
        return BatchProblem.from_samples(self.X[:stop], self.d[:stop], lam, sigma2)

    def to_frame(self) -> pd.DataFrame:
        """Fixture table with columns t, x{j}_re/_im, d_re, d_im, w{j}_re/_im."""
        columns: Dict[str, np.ndarray] = {"t": np.arange(1, self.n + 1)}
        for j in range(self.dim):
            columns[f"x{j}_re"] = self.X[:, j].real
            columns[f"x{j}_im"] = self.X[:, j].imag
        columns["d_re"] = self.d.real
        columns["d_im"] = self.d.imag
        if self.w_true is not None:
            for j in range(self.dim):
                columns[f"w{j}_re"] = self.w_true[:, j].real
                columns[f"w{j}_im"] = self.w_true[:, j].imag
        return pd.DataFrame(columns)

    def to_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path: Path, name: Optional[str] = None) -> "Stream":
        """
        Read a stream fixture written by :meth:`to_csv`.

        Raises:
            StreamError: If required columns are missing or misnumbered.
        """
        path = Path(path)
        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except (OSError, pd.errors.ParserError) as exc:
            raise StreamError(f"Cannot read stream fixture {path}: {exc}") from exc

        dim = sum(1 for col in frame.columns if col.startswith("x") and col.endswith("_re"))
        required = ["t", "d_re", "d_im"] + [
            f"x{j}_{part}" for j in range(dim) for part in ("re", "im")
        ]
        missing = [col for col in required if col not in frame.columns]
        if dim == 0 or missing:
            raise StreamError(
                f"Stream fixture {path} is malformed", {"missing": missing, "dim": dim}
            )
        X = np.column_stack(
            [frame[f"x{j}_re"].to_numpy() + 1j * frame[f"x{j}_im"].to_numpy() for j in range(dim)]
        )
        d = frame["d_re"].to_numpy() + 1j * frame["d_im"].to_numpy()
        w_true = None
        if "w0_re" in frame.columns:
            try:
                w_true = np.column_stack(
                    [
                        frame[f"w{j}_re"].to_numpy() + 1j * frame[f"w{j}_im"].to_numpy()
                        for j in range(dim)
                    ]
                )
            except KeyError as exc:
                raise StreamError(f"Incomplete weight block in {path}: {exc}") from exc
        return cls(X=X, d=d, w_true=w_true, name=name or path.stem)


class StreamSource(ABC):
    """
    Abstract scenario generator.

    Implementations are pure functions of their configuration and a seed, so
    trials can be generated concurrently.
    """

    name: str = "source"

    @abstractmethod
    def generate(self, seed: Union[int, np.random.SeedSequence]) -> Stream:
        """Generate one stream."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Weight dimension of the generated streams."""

    @property
    def layout(self) -> Optional[GroupLayout]:
        """Group layout of the weights, if the scenario is grouped."""
        return None

    def generate_trial(self, seed: int, trial: int) -> Stream:
        """Generate the stream of one Monte Carlo trial."""
        stream = self.generate(trial_seed(seed, trial))
        stream.meta.setdefault("seed", int(seed))
        stream.meta.setdefault("trial", int(trial))
        logger.debug("Generated %s stream for trial %d", self.name, trial)
        return stream
