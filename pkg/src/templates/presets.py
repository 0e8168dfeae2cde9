"""
Parameter presets for the simulation studies.

Each preset fixes the forgetting factor, the penalization level and the MCP
envelope height for one scenario at one SNR, so an experiment only needs to
name its scenario and SNR.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Preset:
    """
    One parameter preset.

    ``gamma`` and ``alpha`` may be None when the scenario derives them from the
    data (the static diagnostic picks them from its eigen-structure).
    """

    name: str
    scenario: str
    snr_db: Optional[float]
    gamma: Optional[float]
    alpha: Optional[float]
    lam: float = 0.99
    K: int = 5
    description: str = ""
    tags: Tuple[str, ...] = field(default_factory=tuple)


class PresetLibrary:
    """Collection of presets with lookup by scenario and SNR."""

    def __init__(self):
        self._presets: Dict[str, Preset] = {}
        self._categories: Dict[str, List[str]] = {}  # category -> preset names

    def add_preset(self, preset: Preset, category: str = "general") -> None:
        """Add a preset to the library."""
        self._presets[preset.name] = preset
        if category not in self._categories:
            self._categories[category] = []
        if preset.name not in self._categories[category]:
            self._categories[category].append(preset.name)

    def get_preset(self, name: str) -> Optional[Preset]:
        return self._presets.get(name)

    def list_presets(self, category: Optional[str] = None) -> List[str]:
        """List all presets, optionally filtered by category."""
        if category is None:
            return list(self._presets.keys())
        return self._categories.get(category, [])

    def search_presets(self, query: str) -> List[str]:
        """Search presets by name, tags or description."""
        query_lower = query.lower()
        matches = []
        for name, preset in self._presets.items():
            if (
                query_lower in name.lower()
                or any(query_lower in tag.lower() for tag in preset.tags)
                or query_lower in preset.description.lower()
            ):
                matches.append(name)
        return matches

    def lookup(self, scenario: str, snr_db: Optional[float] = None) -> Optional[Preset]:
        """
        Preset of ``scenario`` whose SNR is closest to ``snr_db``.

        Returns None when the scenario has no preset.
        """
        candidates = [p for p in self._presets.values() if p.scenario == scenario]
        if not candidates:
            return None
        with_snr = [p for p in candidates if p.snr_db is not None]
        if snr_db is None or not with_snr:
            return candidates[0]
        best = min(with_snr, key=lambda p: (abs(p.snr_db - snr_db), p.snr_db))
        if best.snr_db != snr_db:
            logger.warning(
                "No %s preset at %.1f dB; using %s (%.1f dB)",
                scenario,
                snr_db,
                best.name,
                best.snr_db,
            )
        return best


def default_library() -> PresetLibrary:
    """Presets of the three simulation studies and the static diagnostic."""
    library = PresetLibrary()
    library.add_preset(
        Preset("jakes_20db", "jakes", 20.0, gamma=10.0, alpha=0.5,
               description="Sparse Rayleigh-fading channel at 20 dB",
               tags=("channel", "fading")),
        category="tracking",
    )
    library.add_preset(
        Preset("jakes_30db", "jakes", 30.0, gamma=30.0, alpha=0.5,
               description="Sparse Rayleigh-fading channel at 30 dB",
               tags=("channel", "fading")),
        category="tracking",
    )
    library.add_preset(
        Preset("volterra_20db", "volterra", 20.0, gamma=1.0, alpha=0.5,
               description="Sparse third-order Volterra system at 20 dB",
               tags=("nonlinear",)),
        category="tracking",
    )
    library.add_preset(
        Preset("volterra_30db", "volterra", 30.0, gamma=5.0, alpha=0.5,
               description="Sparse third-order Volterra system at 30 dB",
               tags=("nonlinear",)),
        category="tracking",
    )
    # Group MCP and group Lasso share gamma.
    library.add_preset(
        Preset("mts", "mts", None, gamma=100.0, alpha=1.0,
               description="Additive spline forecast of a bivariate series",
               tags=("spline", "group", "forecast")),
        category="forecast",
    )
    library.add_preset(
        Preset("static_diag", "static_diag", None, gamma=None, alpha=None, lam=1.0,
               description="Seeded static instance for the error-bound diagnostics",
               tags=("diagnostics",)),
        category="diagnostics",
    )
    return library
