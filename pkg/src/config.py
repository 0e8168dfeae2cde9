"""
Experiment configuration: a validated model loaded from TOML files and CLI flags.
"""
import logging
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .core.errors import ConfigError
from .core.estimators import DEFAULT_EM_ITERS
from .templates.presets import default_library

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

CONFIG_SECTIONS = ("experiment", "penalty", "filter", "scenario", "output")
KEY_ALIASES = {"lambda": "lam"}


class Scenario(str, Enum):
    JAKES = "jakes"
    VOLTERRA = "volterra"
    MTS = "mts"
    STATIC_DIAG = "static_diag"


class Algorithm(str, Enum):
    RLS = "RLS"
    SPARLS_L1 = "SPARLS_L1"
    SPARLS_MCP = "SPARLS_MCP"
    GROUP_LASSO = "GROUP_LASSO"
    GROUP_MCP = "GROUP_MCP"

    @property
    def is_group(self) -> bool:
        return self in (Algorithm.GROUP_LASSO, Algorithm.GROUP_MCP)

    @property
    def is_mcp(self) -> bool:
        return self in (Algorithm.SPARLS_MCP, Algorithm.GROUP_MCP)


DEFAULT_ALGORITHMS = {
    Scenario.JAKES: [Algorithm.RLS, Algorithm.SPARLS_L1, Algorithm.SPARLS_MCP],
    Scenario.VOLTERRA: [Algorithm.RLS, Algorithm.SPARLS_L1, Algorithm.SPARLS_MCP],
    Scenario.MTS: [Algorithm.GROUP_LASSO, Algorithm.GROUP_MCP],
    Scenario.STATIC_DIAG: [Algorithm.SPARLS_MCP],
}


class ExperimentConfig(BaseModel):
    """
    Everything needed to reproduce one experiment.

    Unset ``gamma``, ``alpha``, ``lam`` and ``K`` are filled from the preset of the
    scenario at the closest SNR. The static diagnostic leaves ``gamma`` and
    ``alpha`` unset when no value is given and derives them from the instance.
    """

    model_config = ConfigDict(extra="forbid")

    # [experiment]
    scenario: Scenario = Scenario.JAKES
    algorithms: Optional[List[Algorithm]] = None
    trials: int = 20
    seed: int = 0
    workers: Optional[int] = None
    parallel: bool = False

    # [penalty]
    gamma: Optional[float] = None
    alpha: Optional[float] = None
    mts_gamma_mcp: Optional[float] = None
    mts_gamma_lasso: Optional[float] = None
    mts_alpha: Optional[float] = None
    xi2_safety: float = 0.9
    sigma2_override: Optional[float] = None

    # [filter]
    lam: Optional[float] = None
    K: Optional[int] = None
    rls_delta: float = 1e-2
    compare_k1: bool = False

    # [scenario]
    snr_db: float = 20.0
    n: int = 1000
    switch_time: Optional[int] = None
    M: int = 100
    k_sparse: int = 5
    f_d: float = 1e-4
    jakes_paths: int = 64
    mts_lag: int = 8
    mts_v: int = 10
    knot_range: Tuple[float, float] = (-3.0, 3.0)
    diag_M: int = 20
    diag_sparsity: int = 3

    # [output]
    output_dir: Path = Path("results")
    plots: bool = True
    steady_window: int = 100
    pred_window_start: int = 400

    @field_validator("lam")
    @classmethod
    def _check_lam(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not (0 < value <= 1):
            raise ValueError(f"lambda must lie in (0, 1], got {value}")
        return value

    @field_validator("alpha", "mts_alpha", "sigma2_override", "rls_delta")
    @classmethod
    def _check_positive(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not (value > 0):
            raise ValueError(f"must be positive, got {value}")
        return value

    @field_validator("gamma", "mts_gamma_mcp", "mts_gamma_lasso")
    @classmethod
    def _check_gamma(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not (value >= 0):
            raise ValueError(f"gamma must be nonnegative, got {value}")
        return value

    @field_validator("K", "trials", "n", "M", "k_sparse", "jakes_paths", "steady_window")
    @classmethod
    def _check_count(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator("xi2_safety")
    @classmethod
    def _check_safety(cls, value: float) -> float:
        if not (0 < value <= 1):
            raise ValueError(f"xi2_safety must lie in (0, 1], got {value}")
        return value

    @field_validator("knot_range")
    @classmethod
    def _check_knots(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not value[0] < value[1]:
            raise ValueError("knot_range must be increasing")
        return value

    @model_validator(mode="after")
    def _resolve(self) -> "ExperimentConfig":
        if self.algorithms is None:
            self.algorithms = list(DEFAULT_ALGORITHMS[self.scenario])
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("algorithms must not repeat")
        if self.scenario is not Scenario.MTS and any(a.is_group for a in self.algorithms):
            raise ValueError("GROUP_LASSO and GROUP_MCP require the mts scenario")
        if self.scenario is Scenario.STATIC_DIAG and self.algorithms != [Algorithm.SPARLS_MCP]:
            raise ValueError("the static_diag scenario runs SPARLS_MCP only")
        if self.switch_time is None:
            self.switch_time = self.n // 2 + 1
        if not (1 <= self.switch_time <= self.n):
            raise ValueError(f"switch_time must lie in [1, {self.n}]")
        if self.steady_window > self.n:
            raise ValueError("steady_window exceeds the stream length")
        if self.k_sparse >= self.M:
            raise ValueError("k_sparse must be smaller than M")

        preset = default_library().lookup(self.scenario.value, self.snr_db)
        if preset is not None:
            if self.gamma is None:
                self.gamma = preset.gamma
            if self.alpha is None:
                self.alpha = preset.alpha
            if self.lam is None:
                self.lam = preset.lam
            if self.K is None:
                self.K = preset.K
        if self.lam is None:
            self.lam = 0.99
        if self.K is None:
            self.K = DEFAULT_EM_ITERS
        return self

    def penalty_for(self, algorithm: Algorithm) -> Tuple[float, float]:
        """``(gamma, alpha)`` used by ``algorithm``."""
        gamma, alpha = self.gamma, self.alpha
        if algorithm is Algorithm.GROUP_MCP and self.mts_gamma_mcp is not None:
            gamma = self.mts_gamma_mcp
        if algorithm is Algorithm.GROUP_LASSO and self.mts_gamma_lasso is not None:
            gamma = self.mts_gamma_lasso
        if algorithm.is_group and self.mts_alpha is not None:
            alpha = self.mts_alpha
        if gamma is None or alpha is None:
            raise ConfigError(
                f"No gamma/alpha for {algorithm.value} in scenario {self.scenario.value}",
                {"gamma": gamma, "alpha": alpha},
            )
        return float(gamma), float(alpha)


def _flatten(data: Mapping[str, Any], source: str) -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        if isinstance(value, Mapping):
            if key not in CONFIG_SECTIONS:
                raise ConfigError(
                    f"Unknown section [{key}] in {source}",
                    {"sections": list(CONFIG_SECTIONS)},
                )
            for inner, inner_value in value.items():
                flat[KEY_ALIASES.get(inner, inner)] = inner_value
        else:
            flat[KEY_ALIASES.get(key, key)] = value
    return flat


def read_config_file(path: Path) -> Dict[str, Any]:
    """
    Read a TOML experiment file into a flat field mapping.

    Raises:
        ConfigError: If the file cannot be read or parsed.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"Config file not found: {path}") from exc
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    return _flatten(data, str(path))


def build_config(values: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a flat mapping, wrapping pydantic errors in :class:`ConfigError`."""
    try:
        return ExperimentConfig(**dict(values))
    except ValidationError as exc:
        problems = [
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in exc.errors()
        ]
        raise ConfigError("Invalid experiment configuration: " + "; ".join(problems),
                          {"errors": problems}) from exc


def load_config(
    path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """
    Load a config file (optional) and apply overrides; ``None`` overrides are ignored.
    """
    values: Dict[str, Any] = read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[KEY_ALIASES.get(key, key)] = value
    config = build_config(values)
    logger.debug("Loaded config: %s", config.model_dump(mode="json"))
    return config
