"""
Tests for the scaled MCP and its proximal operators.
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sparls.core.errors import DimensionError, PenaltyDomainError
from sparls.core.penalty import (
    GroupLayout,
    PenaltyConfig,
    ThresholdRegime,
    TiePolicy,
    group_mcp_penalty,
    mcp_penalty,
    mcp_value,
    moreau_env,
    prox_group,
    prox_group_soft,
    prox_regime,
    prox_scalar,
    prox_soft,
    prox_soft_vector,
    prox_vector,
)


def _prox_objective(m, mag_r, beta, alpha):
    """Prox objective restricted to the ray through r, as a function of |w| = m."""
    return (mag_r - m) ** 2 / (2.0 * beta) + mcp_value(m, alpha)


class TestPenaltyValues:
    """Tests for the MCP value and the Moreau envelope."""

    def test_mcp_branches(self):
        """Quadratic below alpha, flat at alpha/2 above."""
        assert mcp_value(0.0, 1.0) == 0.0
        assert mcp_value(0.5, 1.0) == pytest.approx(0.5 - 0.125)
        assert mcp_value(1.0, 1.0) == pytest.approx(0.5)
        assert mcp_value(7.0, 1.0) == pytest.approx(0.5)

    def test_mcp_plus_envelope_is_absolute_value(self):
        """rho(w) + env(w) = |w| everywhere."""
        w = np.linspace(0.0, 5.0, 101)
        assert_allclose(mcp_value(w, 1.3) + moreau_env(w, 1.3), w, atol=1e-12)

    def test_envelope_branches(self):
        assert moreau_env(0.5, 1.0) == pytest.approx(0.125)
        assert moreau_env(3.0, 1.0) == pytest.approx(2.5)

    def test_scalar_returns_float(self):
        assert isinstance(mcp_value(0.3, 1.0), float)
        assert isinstance(moreau_env(0.3, 1.0), float)

    def test_invalid_arguments(self):
        with pytest.raises(PenaltyDomainError):
            mcp_value(-0.1, 1.0)
        with pytest.raises(PenaltyDomainError):
            mcp_value(0.1, 0.0)
        with pytest.raises(PenaltyDomainError):
            moreau_env(0.1, -1.0)

    def test_vector_penalties(self):
        """Vector MCP sums magnitudes; group MCP uses group norms."""
        w = np.array([3 + 4j, 0.0, 0.5])
        assert mcp_penalty(w, 1.0) == pytest.approx(0.5 + 0.0 + 0.375)
        layout = GroupLayout((2, 1))
        # ||(3+4j, 0)|| = 5 -> alpha/2 ; |0.5| -> 0.375
        assert group_mcp_penalty(w, layout, 1.0) == pytest.approx(0.875)


class TestRegimes:
    """Tests for the firm/boundary/hard classification."""

    def test_classification(self):
        assert prox_regime(0.5, 1.0) is ThresholdRegime.FIRM
        assert prox_regime(1.0, 1.0) is ThresholdRegime.BOUNDARY
        assert prox_regime(2.0, 1.0) is ThresholdRegime.HARD

    def test_nonpositive_arguments(self):
        with pytest.raises(PenaltyDomainError):
            prox_regime(0.0, 1.0)
        with pytest.raises(PenaltyDomainError):
            prox_regime(1.0, -2.0)


class TestScalarProx:
    """Tests for the scalar MCP prox."""

    def test_firm_shape(self):
        """Zero below beta, linear ramp up to alpha, identity above."""
        beta, alpha = 0.5, 2.0
        assert prox_scalar(0.4, beta, alpha) == 0.0
        assert prox_scalar(0.5, beta, alpha) == 0.0
        ramp = alpha / (alpha - beta) * (1.2 - beta)
        assert prox_scalar(1.2, beta, alpha) == pytest.approx(ramp)
        assert prox_scalar(2.0, beta, alpha) == pytest.approx(2.0)
        assert prox_scalar(3.5, beta, alpha) == 3.5
        assert prox_scalar(-1.2, beta, alpha) == pytest.approx(-ramp)

    def test_firm_is_continuous_at_alpha(self):
        beta, alpha = 0.3, 1.0
        below = prox_scalar(alpha - 1e-9, beta, alpha)
        assert below == pytest.approx(alpha, abs=1e-8)

    def test_hard_threshold(self):
        beta, alpha = 4.0, 1.0
        threshold = math.sqrt(alpha * beta)
        assert prox_scalar(threshold - 1e-6, beta, alpha) == 0.0
        assert prox_scalar(threshold + 1e-6, beta, alpha) == pytest.approx(threshold + 1e-6)

    def test_boundary_threshold_at_alpha(self):
        assert prox_scalar(0.999, 1.0, 1.0) == 0.0
        assert prox_scalar(1.001, 1.0, 1.0) == pytest.approx(1.001)

    def test_tie_policy(self):
        """An exact tie at the hard threshold resolves to zero unless KEEP is chosen."""
        beta, alpha = 4.0, 1.0
        assert prox_scalar(2.0, beta, alpha) == 0.0
        assert prox_scalar(2.0, beta, alpha, TiePolicy.KEEP) == 2.0

    def test_complex_phase_preserved(self):
        r = 2.5 * np.exp(1j * 0.7)
        out = prox_scalar(r, 0.5, 1.0)
        assert isinstance(out, complex)
        assert out == pytest.approx(r)
        ramp = prox_scalar(0.8 * np.exp(1j * 0.7), 0.5, 1.0)
        assert np.angle(ramp) == pytest.approx(0.7)

    def test_real_input_stays_real(self):
        assert isinstance(prox_scalar(1.5, 0.5, 1.0), float)

    def test_matches_grid_minimization(self):
        """The prox attains the minimum of its objective over a fine magnitude grid."""
        rng = np.random.default_rng(1234)
        for _ in range(10_000):
            alpha = rng.uniform(0.1, 3.0)
            beta = rng.uniform(0.05, 3.0)
            mag = rng.uniform(0.0, 4.0)
            r = mag * np.exp(1j * rng.uniform(-np.pi, np.pi))
            out = prox_scalar(r, beta, alpha)
            grid = np.linspace(0.0, mag, 20001)
            values = _prox_objective(grid, mag, beta, alpha)
            best = float(values.min())
            attained = _prox_objective(abs(out), mag, beta, alpha)
            assert attained <= best + 1e-9
            regime = prox_regime(beta, alpha)
            if regime is ThresholdRegime.FIRM and beta < 0.9 * alpha:
                assert abs(abs(out) - grid[int(values.argmin())]) <= 1e-3
            elif regime is ThresholdRegime.HARD and abs(mag - math.sqrt(alpha * beta)) > 1e-2:
                assert abs(abs(out) - grid[int(values.argmin())]) <= 1e-3

    def test_vector_is_elementwise(self):
        r = np.array([0.1, -1.5, 0.7 + 0.7j, 4.0j])
        expected = [prox_scalar(complex(x), 0.4, 1.0) for x in r]
        assert_allclose(prox_vector(r, 0.4, 1.0), expected)


class TestGroupProx:
    """Tests for the group MCP prox."""

    def test_reduces_to_scalar_prox_on_norms(self):
        rng = np.random.default_rng(7)
        layout = GroupLayout((3, 2, 4))
        for _ in range(10_000):
            r = rng.standard_normal(9) + 1j * rng.standard_normal(9)
            r *= rng.uniform(0.05, 1.5)
            out = prox_group(r, layout, 0.4, 1.2)
            for sl in layout.slices():
                norm = np.linalg.norm(r[sl])
                shrunk = prox_scalar(norm, 0.4, 1.2)
                assert np.linalg.norm(out[sl]) == pytest.approx(shrunk, abs=1e-12)
                if shrunk > 0:
                    assert_allclose(out[sl] / shrunk, r[sl] / norm, atol=1e-12)

    def test_group_minimizes_objective(self):
        """No random candidate beats the group prox on its objective."""
        rng = np.random.default_rng(11)
        layout = GroupLayout((2,))
        beta, alpha = 0.3, 1.0
        for _ in range(200):
            r = rng.uniform(-1.5, 1.5, 2)
            out = prox_group(r, layout, beta, alpha).real
            value = np.sum((r - out) ** 2) / (2 * beta) + mcp_value(np.linalg.norm(out), alpha)
            candidates = rng.uniform(-1.5, 1.5, (2000, 2))
            cand_values = np.sum((r - candidates) ** 2, axis=1) / (2 * beta) + mcp_value(
                np.linalg.norm(candidates, axis=1), alpha
            )
            assert value <= cand_values.min() + 1e-9

    def test_requires_firm_regime(self):
        layout = GroupLayout((2,))
        with pytest.raises(PenaltyDomainError):
            prox_group(np.ones(2), layout, 1.0, 1.0)
        with pytest.raises(PenaltyDomainError):
            prox_group(np.ones(2), layout, 2.0, 1.0)

    def test_layout_mismatch(self):
        with pytest.raises(DimensionError):
            prox_group(np.ones(3), GroupLayout((2,)), 0.1, 1.0)


class TestSoftThresholding:
    """Tests for the l1 and group-Lasso proxes."""

    def test_scalar_soft(self):
        assert prox_soft(0.3, 0.5) == 0.0
        assert prox_soft(2.0, 0.5) == pytest.approx(1.5)
        assert prox_soft(-2.0, 0.5) == pytest.approx(-1.5)
        out = prox_soft(2.0j, 0.5)
        assert out == pytest.approx(1.5j)

    def test_zero_threshold_is_identity(self):
        r = np.array([0.2, -3.0, 1 + 1j])
        assert_allclose(prox_soft_vector(r, 0.0), r)

    def test_group_soft(self):
        layout = GroupLayout((2, 2))
        r = np.array([3.0, 4.0, 0.1, 0.1])
        out = prox_group_soft(r, layout, 1.0)
        assert_allclose(out[:2], np.array([3.0, 4.0]) * 0.8)
        assert_allclose(out[2:], 0.0)

    def test_negative_threshold(self):
        with pytest.raises(PenaltyDomainError):
            prox_soft_vector(np.ones(2), -0.1)


class TestGroupLayout:
    """Tests for GroupLayout."""

    def test_uniform(self):
        layout = GroupLayout.uniform(4, 3)
        assert layout.n_groups == 4
        assert layout.dim == 12
        assert layout.offsets == (0, 3, 6, 9)
        assert layout.slices()[2] == slice(6, 9)

    def test_norms_and_expand(self):
        layout = GroupLayout((1, 2))
        assert_allclose(layout.group_norms(np.array([-2.0, 3.0, 4.0])), [2.0, 5.0])
        assert_allclose(layout.expand(np.array([1.0, 7.0])), [1.0, 7.0, 7.0])

    def test_invalid_sizes(self):
        with pytest.raises(DimensionError):
            GroupLayout(())
        with pytest.raises(DimensionError):
            GroupLayout((2, 0))


class TestPenaltyConfig:
    """Tests for PenaltyConfig."""

    def test_derived_quantities(self):
        penalty = PenaltyConfig(alpha=0.5, gamma=10.0, xi2=0.01, sigma2=0.2)
        assert penalty.beta == pytest.approx(0.1)
        assert penalty.ratio == pytest.approx(0.05)
        assert penalty.regime is ThresholdRegime.FIRM
        assert penalty.with_gamma(100.0).regime is ThresholdRegime.HARD
        assert penalty.with_xi2(0.05).beta == pytest.approx(0.5)

    def test_zero_gamma_is_allowed(self):
        penalty = PenaltyConfig(alpha=1.0, gamma=0.0, xi2=0.1, sigma2=1.0)
        assert penalty.beta == 0.0
        assert penalty.regime is ThresholdRegime.FIRM

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"alpha": 0.0, "gamma": 1.0, "xi2": 0.1, "sigma2": 1.0},
            {"alpha": 1.0, "gamma": -1.0, "xi2": 0.1, "sigma2": 1.0},
            {"alpha": 1.0, "gamma": 1.0, "xi2": 0.0, "sigma2": 1.0},
            {"alpha": 1.0, "gamma": 1.0, "xi2": 0.1, "sigma2": 0.0},
            {"alpha": 1.0, "gamma": math.inf, "xi2": 0.1, "sigma2": 1.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(PenaltyDomainError):
            PenaltyConfig(**kwargs)
