"""
Plotter port interface for static figure output.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Optional, Sequence

import pandas as pd

from ..core.errors import PlotError

__all__ = ["Plotter", "PlotError"]


class Plotter(ABC):
    """
    Abstract interface for figure backends.

    Plots are rendered from the same tables that are written as CSV, so a
    backend never sees anything the CSV artifacts do not contain.
    """

    @abstractmethod
    def plot_nmse(
        self,
        curves: pd.DataFrame,
        output_path: Path,
        title: str = "",
        switch_time: Optional[int] = None,
    ) -> Path:
        """
        Plot NMSE (dB) against time for several algorithms.

        Args:
            curves: Table with a ``t`` column and one dB column per algorithm.
            output_path: Destination file.
            title: Figure title.
            switch_time: Time of the system change, marked with a vertical line.

        Returns:
            The written path.

        Raises:
            PlotError: If the figure cannot be produced.
        """
        pass

    @abstractmethod
    def plot_prox_table(self, table: pd.DataFrame, output_path: Path) -> Path:
        """Plot a prox table (columns ``r``, ``prox``, ``regime``, ``beta``, ``alpha``)."""
        pass

    @abstractmethod
    def plot_mcp_table(self, table: pd.DataFrame, output_path: Path) -> Path:
        """Plot penalty shapes (columns ``w``, ``mcp``, ``moreau_env``, ``l1``)."""
        pass

    @abstractmethod
    def plot_spline_trajectories(
        self,
        trajectories: pd.DataFrame,
        output_path: Path,
        highlight_groups: Sequence[int] = (),
        title: str = "",
    ) -> Path:
        """
        Plot spline-coefficient estimates against time.

        Args:
            trajectories: Table with ``t`` and one ``g{group}_b{basis}`` column per coefficient.
            output_path: Destination file.
            highlight_groups: Groups drawn in color; all others are grey.
            title: Figure title.
        """
        pass

    def is_available(self) -> bool:
        """Check whether the backend can render."""
        return True

    def supported_formats(self) -> Dict[str, str]:
        """File extensions this backend writes, mapped to a description."""
        return {".svg": "Scalable Vector Graphics"}
