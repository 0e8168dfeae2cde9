"""
Tests for the convergence and error-bound diagnostics.
"""
import math

import numpy as np
import pytest

from sparls.core.diagnostics import (
    BetaConvention,
    ErrorBoundReport,
    contraction_audit,
    error_bound_report,
    extreme_eigenvalues,
    is_descending,
    lipschitz_C,
    rsc_alpha1,
    theorem2_bound,
)
from sparls.core.errors import DiagnosticsError
from sparls.core.estimators import BatchProblem, EMTrace, select_xi2, spals_mcp
from sparls.core.penalty import PenaltyConfig, ThresholdRegime


def _instance(seed, n=200, M=20, s=3, sigma2=1e-10):
    rng = np.random.default_rng(seed)
    X = (rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M))) / np.sqrt(2)
    w = np.zeros(M, dtype=complex)
    support = rng.choice(M, size=s, replace=False)
    w[support] = rng.uniform(1.0, 2.0, s) * np.exp(1j * rng.uniform(-np.pi, np.pi, s))
    eps = np.sqrt(sigma2 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return BatchProblem(X, X @ w + eps, lam=1.0, sigma2=sigma2), w, eps


class TestEigenStructure:
    """Tests for eigenvalue helpers."""

    def test_extreme_eigenvalues(self):
        X = np.diag([1.0, 2.0, 3.0])
        assert extreme_eigenvalues(X, 1.0) == pytest.approx((1.0, 9.0))

    def test_weighted(self):
        X = np.eye(2)
        rho_min, rho_max = extreme_eigenvalues(X, 0.5)
        assert rho_min == pytest.approx(0.5)
        assert rho_max == pytest.approx(1.0)

    def test_rsc_alpha1(self):
        X = np.vstack([np.eye(2), np.eye(2)])
        assert rsc_alpha1(X, 1.0) == pytest.approx(0.5)


class TestLipschitz:
    """Tests for the contraction constant."""

    def test_value(self):
        C = lipschitz_C(rho_min=2.0, alpha=1.0, gamma=2.5, sigma2=1.0, xi2=0.2,
                        beta_convention=BetaConvention.XI2)
        assert C == pytest.approx(1.0 / 0.5 * 0.6)

    def test_conventions_differ(self):
        kwargs = dict(rho_min=1.0, alpha=1.0, gamma=0.5, sigma2=1.0, xi2=0.1)
        sigma_c = lipschitz_C(**kwargs, beta_convention=BetaConvention.SIGMA2)
        xi_c = lipschitz_C(**kwargs, beta_convention=BetaConvention.XI2)
        assert sigma_c == pytest.approx(2.0 * 0.9)
        assert xi_c == pytest.approx(1.0 / 0.95 * 0.9)

    def test_rejects_hard_regime(self):
        with pytest.raises(DiagnosticsError):
            lipschitz_C(1.0, 1.0, 20.0, 1.0, 0.1, BetaConvention.XI2)

    def test_rejects_oversized_ratio(self):
        with pytest.raises(DiagnosticsError):
            lipschitz_C(10.0, 1.0, 0.1, 1.0, 0.5, BetaConvention.XI2)


class TestAudit:
    """Tests for contraction audits and descent checks."""

    def _trace(self, points, regime=ThresholdRegime.FIRM):
        trace = EMTrace(regime=regime)
        trace.iterates = [np.array([p], dtype=complex) for p in points]
        trace.objective_values = [float(p) for p in points]
        return trace

    def test_passes_geometric_trace(self):
        audit = contraction_audit(self._trace([8.0, 4.0, 2.0, 1.0]), np.zeros(1), 0.5)
        assert audit.passed
        assert audit.ratios == pytest.approx([0.5, 0.5, 0.5])
        assert audit.distances == pytest.approx([8.0, 4.0, 2.0, 1.0])

    def test_fails_on_violation(self):
        audit = contraction_audit(self._trace([8.0, 6.0, 1.0]), np.zeros(1), 0.5)
        assert not audit.passed

    def test_zero_distance(self):
        audit = contraction_audit(self._trace([1.0, 0.0, 0.0]), np.zeros(1), 0.5)
        assert audit.passed
        assert audit.ratios == [0.0, 0.0]

    def test_hard_trace_needs_opt_in(self):
        trace = self._trace([2.0, 1.0], ThresholdRegime.HARD)
        with pytest.raises(DiagnosticsError):
            contraction_audit(trace, np.zeros(1), 0.5)
        audit = contraction_audit(trace, np.zeros(1), 0.5, allow_hard=True)
        assert audit.regime == "hard"

    def test_is_descending(self):
        assert is_descending(self._trace([3.0, 2.0, 2.0, 1.0]))
        assert not is_descending(self._trace([3.0, 2.0, 2.5]))


class TestErrorBound:
    """Tests for the relaxation-error bound."""

    def test_bound_formula(self):
        problem, w, eps = _instance(0)
        alpha1 = rsc_alpha1(problem.X, 1.0)
        alpha = 0.5 * alpha1
        report = theorem2_bound(problem.X, 1.0, eps, w, alpha, sigma2=problem.sigma2)
        noise_inf = np.max(np.abs(problem.X.conj().T @ eps))
        expected = 6 * math.sqrt(3) * 4 * noise_inf / (200 * (4 * alpha1 - 3 * alpha))
        assert report.s == 3
        assert report.noise_inf_norm == pytest.approx(noise_inf)
        assert report.relax_bound == pytest.approx(expected)
        assert report.gamma_low == pytest.approx(4 * noise_inf / problem.sigma2)
        assert report.gamma_high == pytest.approx(
            alpha * report.rho_min / (problem.sigma2 * report.rho_max)
        )

    def test_rejects_large_alpha(self):
        problem, w, eps = _instance(1)
        alpha1 = rsc_alpha1(problem.X, 1.0)
        with pytest.raises(DiagnosticsError):
            theorem2_bound(problem.X, 1.0, eps, w, alpha=2 * alpha1)

    def test_feasible_window_gives_error_within_bound(self):
        """With a gamma inside the window the stationary point is within the bound."""
        for seed in range(20):
            problem, w, eps = _instance(seed)
            alpha = 0.5 * rsc_alpha1(problem.X, 1.0)
            window = theorem2_bound(problem.X, 1.0, eps, w, alpha, sigma2=problem.sigma2)
            assert window.gamma_feasible
            gamma = math.sqrt(window.gamma_low * window.gamma_high)
            xi2 = select_xi2(problem.X, 1.0, problem.sigma2, safety=0.99)
            penalty = PenaltyConfig(alpha=alpha, gamma=gamma, xi2=xi2, sigma2=problem.sigma2)
            report = error_bound_report(problem, w, eps, penalty, K=20)
            assert isinstance(report, ErrorBoundReport)
            assert report.measured_error <= report.relax_bound
            assert report.contraction is not None
            assert report.contraction.regime == "firm"

    def test_hard_audit_is_recorded(self):
        problem, w, eps = _instance(7)
        alpha = 0.5 * rsc_alpha1(problem.X, 1.0)
        xi2 = select_xi2(problem.X, 1.0, problem.sigma2, safety=0.99)
        window = theorem2_bound(problem.X, 1.0, eps, w, alpha, sigma2=problem.sigma2)
        gamma = math.sqrt(window.gamma_low * window.gamma_high)
        penalty = PenaltyConfig(alpha=alpha, gamma=gamma, xi2=xi2, sigma2=problem.sigma2)
        report = error_bound_report(problem, w, eps, penalty, K=10, hard_gamma=2 * alpha / xi2)
        assert report.hard_contraction is not None
        assert report.hard_contraction.regime == "hard"
        assert len(report.hard_contraction.distances) == 11

    def test_report_serializes(self):
        problem, w, eps = _instance(2)
        alpha = 0.5 * rsc_alpha1(problem.X, 1.0)
        report = theorem2_bound(problem.X, 1.0, eps, w, alpha, sigma2=problem.sigma2)
        data = report.to_dict()
        assert data["s"] == 3
        assert "relax_bound" in data


class TestEMMatchesTrace:
    """The audited trace is the one produced by the estimator."""

    def test_trace_length(self):
        problem, _, _ = _instance(3, n=60, M=6, sigma2=0.01)
        xi2 = select_xi2(problem.X, 1.0, problem.sigma2, safety=0.9)
        penalty = PenaltyConfig(alpha=1.0, gamma=0.1 / xi2, xi2=xi2, sigma2=problem.sigma2)
        _, trace = spals_mcp(problem, penalty, K=7)
        assert trace.K == 7
        assert len(trace.objective_values) == 8
