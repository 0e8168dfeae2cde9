"""
Matplotlib adapter that implements the Plotter port.
"""
import logging
import re
from pathlib import Path
from typing import Sequence

import pandas as pd

from ..ports.plotter import Plotter, PlotError

logger = logging.getLogger(__name__)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # Stable element ids so repeated runs write identical SVG bytes.
    matplotlib.rcParams["svg.hashsalt"] = "sparls"
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    matplotlib = None
    plt = None
    MATPLOTLIB_AVAILABLE = False

_COEF_COLUMN = re.compile(r"^g(\d+)_b(\d+)$")


class MatplotlibPlotter(Plotter):
    """
    Static SVG figures through matplotlib's Agg backend.

    Figures are written without a creation date so their bytes depend only on
    the plotted tables.
    """

    def __init__(self, figsize=(8.0, 4.5)):
        """Initialize the plotter."""
        if not MATPLOTLIB_AVAILABLE:
            raise ImportError(
                "matplotlib is required for MatplotlibPlotter. "
                "Install it with: pip install sparls[plots]"
            )
        self.figsize = figsize

    def is_available(self) -> bool:
        return MATPLOTLIB_AVAILABLE

    def plot_nmse(self, curves, output_path, title="", switch_time=None) -> Path:
        if "t" not in curves.columns:
            raise PlotError("NMSE table needs a 't' column", {"columns": list(curves.columns)})
        fig, ax = plt.subplots(figsize=self.figsize)
        try:
            for column in curves.columns:
                if column == "t":
                    continue
                ax.plot(curves["t"], curves[column], label=str(column), linewidth=1.0)
            if switch_time is not None:
                ax.axvline(switch_time, color="grey", linestyle=":", linewidth=0.8)
            ax.set_xlabel("time index")
            ax.set_ylabel("NMSE (dB)")
            ax.set_title(title)
            ax.grid(True, linestyle="--", alpha=0.5)
            ax.legend()
            return self._save(fig, output_path)
        finally:
            plt.close(fig)

    def plot_prox_table(self, table, output_path) -> Path:
        fig, ax = plt.subplots(figsize=self.figsize)
        try:
            for beta, rows in table.groupby("beta", sort=True):
                rows = rows.sort_values("r")
                label = f"{rows['regime'].iloc[0]} (beta={beta:g}, alpha={rows['alpha'].iloc[0]:g})"
                ax.plot(rows["r"], rows["prox"], label=label, linewidth=1.2)
            lim = float(table["r"].abs().max())
            ax.plot([-lim, lim], [-lim, lim], color="grey", linestyle=":", linewidth=0.8)
            ax.set_xlabel("r")
            ax.set_ylabel("prox(r)")
            ax.set_title("Proximal operator of the scaled MCP")
            ax.grid(True, linestyle="--", alpha=0.5)
            ax.legend()
            return self._save(fig, output_path)
        finally:
            plt.close(fig)

    def plot_mcp_table(self, table, output_path) -> Path:
        fig, ax = plt.subplots(figsize=self.figsize)
        try:
            ax.plot(table["w"], table["l1"], label="|w|", linestyle="--")
            ax.plot(table["w"], table["moreau_env"], label="Moreau envelope")
            ax.plot(table["w"], table["mcp"], label="MCP")
            ax.set_xlabel("w")
            ax.set_title("MCP versus l1")
            ax.grid(True, linestyle="--", alpha=0.5)
            ax.legend()
            return self._save(fig, output_path)
        finally:
            plt.close(fig)

    def plot_spline_trajectories(
        self,
        trajectories: pd.DataFrame,
        output_path: Path,
        highlight_groups: Sequence[int] = (),
        title: str = "",
    ) -> Path:
        highlight = list(highlight_groups)
        colors = plt.get_cmap("tab10")
        fig, ax = plt.subplots(figsize=self.figsize)
        try:
            for column in trajectories.columns:
                match = _COEF_COLUMN.match(str(column))
                if match is None:
                    continue
                group = int(match.group(1))
                if group in highlight:
                    color, width = colors(highlight.index(group) % 10), 1.0
                else:
                    color, width = "lightgrey", 0.6
                ax.plot(trajectories["t"], trajectories[column], color=color, linewidth=width)
            ax.set_xlabel("time index")
            ax.set_ylabel("spline coefficient")
            ax.set_title(title)
            ax.grid(True, linestyle="--", alpha=0.5)
            return self._save(fig, output_path)
        finally:
            plt.close(fig)

    def _save(self, fig, output_path) -> Path:
        path = Path(output_path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        except (OSError, ValueError) as exc:
            raise PlotError(f"Failed to write figure {path}: {exc}") from exc
        logger.debug("Wrote figure %s", path)
        return path
