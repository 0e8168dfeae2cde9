"""
Tests for the matplotlib figure backend.
"""
import numpy as np
import pandas as pd
import pytest

pytest.importorskip("matplotlib")

from sparls.adapters.matplotlib_plotter import MatplotlibPlotter  # noqa: E402
from sparls.app import ExperimentRunner, spline_frame  # noqa: E402
from sparls.core.errors import PlotError  # noqa: E402


class TestMatplotlibPlotter:
    """Tests for MatplotlibPlotter."""

    def test_available(self):
        plotter = MatplotlibPlotter()
        assert plotter.is_available()
        assert ".svg" in plotter.supported_formats()

    def test_nmse_figure_is_deterministic(self, tmp_path):
        """Test that identical tables give identical SVG bytes."""
        curves = pd.DataFrame({"t": np.arange(1, 11), "RLS": np.linspace(0, -20, 10)})
        plotter = MatplotlibPlotter()
        first = plotter.plot_nmse(curves, tmp_path / "a.svg", title="x", switch_time=5)
        second = plotter.plot_nmse(curves, tmp_path / "b.svg", title="x", switch_time=5)
        assert first.read_bytes() == second.read_bytes()

    def test_nmse_requires_time_column(self, tmp_path):
        with pytest.raises(PlotError):
            MatplotlibPlotter().plot_nmse(pd.DataFrame({"RLS": [1.0]}), tmp_path / "x.svg")

    def test_tables_are_plotted(self, tmp_path):
        runner = ExperimentRunner(plotter=MatplotlibPlotter())
        runner.prox_table([0.5, 2.0], 1.0, np.linspace(-3, 3, 31), tmp_path / "prox.csv")
        runner.mcp_table(1.0, np.linspace(-2, 2, 21), tmp_path / "mcp.csv")
        assert (tmp_path / "prox.svg").exists()
        assert (tmp_path / "mcp.svg").exists()

    def test_spline_trajectories(self, tmp_path):
        frame = spline_frame(np.random.default_rng(0).standard_normal((20, 12)), v=3)
        path = MatplotlibPlotter().plot_spline_trajectories(
            frame, tmp_path / "splines.svg", highlight_groups=[2], title="GROUP_MCP"
        )
        assert path.exists()
        assert path.read_text().lstrip().startswith("<?xml")
