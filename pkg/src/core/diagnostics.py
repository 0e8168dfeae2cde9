"""
Computable convergence and error-bound diagnostics for the batch EM estimator.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from dataclasses_json import dataclass_json

from .errors import ConvergenceError, DiagnosticsError
from .estimators import (
    BatchProblem,
    EMTrace,
    PenaltyKind,
    batch_matrices,
    em_e_step,
    em_m_step,
    objective,
    spals_mcp,
)
from .penalty import GroupLayout, PenaltyConfig, ThresholdRegime
from .types import CVec, as_cmat, as_cvec

logger = logging.getLogger(__name__)


class BetaConvention(Enum):
    """Which noise scale multiplies gamma in the firm-thresholding Lipschitz factor."""

    SIGMA2 = "sigma2"
    XI2 = "xi2"


@dataclass_json
@dataclass
class AuditResult:
    """Outcome of a contraction audit."""

    passed: bool
    C: float
    ratios: List[float] = field(default_factory=list)
    distances: List[float] = field(default_factory=list)
    regime: str = ThresholdRegime.FIRM.value


@dataclass_json
@dataclass
class ErrorBoundReport:
    """Eigen-structure, contraction constant and relaxation bound of one instance."""

    C: float
    rho_min: float
    rho_max: float
    alpha1: float
    relax_bound: float
    gamma_feasible: bool
    s: int
    gamma_low: float = 0.0
    gamma_high: float = 0.0
    noise_inf_norm: float = 0.0
    measured_error: Optional[float] = None
    contraction: Optional[AuditResult] = None
    hard_contraction: Optional[AuditResult] = None


def _weighted_gram(X, lam: float) -> np.ndarray:
    X = as_cmat(X, "X")
    problem = BatchProblem(X, np.zeros(X.shape[0], dtype=complex), lam)
    return problem.gram()


def extreme_eigenvalues(X, lam: float) -> Tuple[float, float]:
    """Smallest and largest eigenvalues of ``X^H Lambda X`` (clipped at zero)."""
    try:
        eigs = scipy.linalg.eigvalsh(_weighted_gram(X, lam))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConvergenceError(f"Eigensolver failed: {exc}") from exc
    return max(float(eigs[0]), 0.0), max(float(eigs[-1]), 0.0)


def rsc_alpha1(X, lam: float) -> float:
    """Restricted-strong-convexity curvature: smallest eigenvalue of ``(1/n) X^H Lambda X``."""
    X = as_cmat(X, "X")
    rho_min, _ = extreme_eigenvalues(X, lam)
    return rho_min / X.shape[0]


def lipschitz_C(
    rho_min: float,
    alpha: float,
    gamma: float,
    sigma2: float,
    xi2: float,
    beta_convention: BetaConvention = BetaConvention.SIGMA2,
) -> float:
    """
    Lipschitz constant of the EM map under firm thresholding.

    ``C = alpha / (alpha - beta) * (1 - (xi2/sigma2) rho_min)`` with
    ``beta = sigma2 * gamma`` or ``xi2 * gamma`` depending on ``beta_convention``.

    Raises:
        DiagnosticsError: Outside the firm regime or when ``(xi2/sigma2) rho_min > 1``.
    """
    scale = sigma2 if beta_convention is BetaConvention.SIGMA2 else xi2
    beta = scale * gamma
    if beta >= alpha:
        raise DiagnosticsError(
            "Lipschitz constant requires the firm regime (beta < alpha)",
            {"beta": beta, "alpha": alpha, "convention": beta_convention.value},
        )
    shrink = (xi2 / sigma2) * rho_min
    if shrink > 1 + 1e-12:
        raise DiagnosticsError(
            "xi2 / sigma2 * rho_min exceeds one", {"value": shrink}
        )
    return alpha / (alpha - beta) * max(1.0 - shrink, 0.0)


def contraction_audit(
    trace: EMTrace,
    w_star: CVec,
    C: float,
    slack: float = 1e-9,
    allow_hard: bool = False,
) -> AuditResult:
    """
    Check ``||w_{k+1} - w*|| <= C ||w_k - w*|| + slack`` along a trace.

    Hard-thresholding traces are rejected unless ``allow_hard`` is set, in which
    case the ratios are recorded without any guarantee.

    Raises:
        DiagnosticsError: For a hard or boundary-regime trace without ``allow_hard``.
    """
    if trace.regime is not ThresholdRegime.FIRM and not allow_hard:
        raise DiagnosticsError(
            "Contraction audit applies to firm thresholding only",
            {"regime": trace.regime.value},
        )
    w_star = as_cvec(w_star, "w_star")
    distances = [float(np.linalg.norm(w - w_star)) for w in trace.iterates]
    ratios: List[float] = []
    passed = True
    for before, after in zip(distances[:-1], distances[1:]):
        if before > 0:
            ratios.append(after / before)
        else:
            ratios.append(0.0 if after == 0 else math.inf)
        if after > C * before + slack:
            passed = False
    return AuditResult(
        passed=passed,
        C=C,
        ratios=ratios,
        distances=distances,
        regime=trace.regime.value,
    )


def converge_fixed_point(
    problem: BatchProblem,
    penalty: PenaltyConfig,
    w0: Optional[CVec] = None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    layout: Optional[GroupLayout] = None,
    kind: PenaltyKind = PenaltyKind.MCP,
) -> CVec:
    """Iterate the EM map until successive iterates move less than ``tol``."""
    B, mu = batch_matrices(problem, penalty.xi2)
    w = np.zeros(problem.dim, dtype=complex) if w0 is None else as_cvec(w0, "w0").copy()
    for step in range(max_iter):
        nxt = em_m_step(em_e_step(B, mu, w), penalty, layout, kind)
        if np.linalg.norm(nxt - w) < tol:
            logger.debug("EM fixed point reached after %d iterations", step + 1)
            return nxt
        w = nxt
    raise ConvergenceError(
        "EM iterations did not reach a fixed point",
        {"tol": tol, "max_iter": max_iter},
    )


def coordinate_stationarity_gap(
    problem: BatchProblem,
    w: CVec,
    penalty: PenaltyConfig,
    eps: float = 1e-4,
    layout: Optional[GroupLayout] = None,
    kind: PenaltyKind = PenaltyKind.MCP,
) -> float:
    """
    Largest objective decrease under real and imaginary coordinate perturbations.

    A stationary point gives a value close to zero (or negative).
    """
    w = as_cvec(w, "w")
    base = objective(problem, w, penalty, layout, kind)
    worst = -math.inf
    for j in range(w.shape[0]):
        for step in (eps, -eps, 1j * eps, -1j * eps):
            moved = w.copy()
            moved[j] += step
            drop = base - objective(problem, moved, penalty, layout, kind)
            worst = max(worst, drop)
    return worst


def is_descending(trace: EMTrace, slack: float = 1e-12) -> bool:
    """True when the objective never rises by more than ``slack`` (relative to its size)."""
    values = trace.objective_values
    return all(
        after <= before + slack * max(1.0, abs(before))
        for before, after in zip(values[:-1], values[1:])
    )


def theorem2_bound(
    X,
    lam: float,
    eps: CVec,
    w_true: CVec,
    alpha: float,
    alpha1: Optional[float] = None,
    sigma2: float = 1.0,
    gamma: Optional[float] = None,
    xi2: Optional[float] = None,
) -> ErrorBoundReport:
    """
    Relaxation-error bound of a stationary point and its admissible gamma window.

    Args:
        X: n x M design (rows x(i)^H).
        lam: Forgetting factor.
        eps: Noise of the stacked system, ``d - X w_true``.
        w_true: True weights.
        alpha: MCP envelope height.
        alpha1: RSC curvature; computed from ``X`` when omitted.
        sigma2: Noise variance used for the gamma window.
        gamma: Penalization level for the contraction constant (defaults to the
            lower edge of the window).
        xi2: Latent scale for the contraction constant (defaults to
            ``sigma2 / rho_max``).

    Returns:
        The report, with ``C`` evaluated under the ``xi2`` convention.

    Raises:
        DiagnosticsError: If ``3 alpha >= 4 alpha1``.
    """
    X = as_cmat(X, "X")
    eps = as_cvec(eps, "eps")
    w_true = as_cvec(w_true, "w_true")
    n = X.shape[0]
    if alpha1 is None:
        alpha1 = rsc_alpha1(X, lam)
    if 3 * alpha >= 4 * alpha1:
        raise DiagnosticsError(
            "Relaxation bound requires 3 alpha < 4 alpha1",
            {"alpha": alpha, "alpha1": alpha1},
        )
    rho_min, rho_max = extreme_eigenvalues(X, lam)
    sqrt_weights = np.sqrt(lam ** np.arange(n - 1, -1, -1, dtype=float))
    noise_inf = float(np.max(np.abs(X.conj().T @ (sqrt_weights * eps))))
    s = int(np.count_nonzero(w_true))

    relax = 6.0 * math.sqrt(s) * 4.0 * noise_inf / (n * (4.0 * alpha1 - 3.0 * alpha))
    gamma_low = 4.0 * noise_inf / sigma2
    gamma_high = alpha * rho_min / (sigma2 * rho_max) if rho_max > 0 else 0.0

    xi2_used = xi2 if xi2 is not None else (sigma2 / rho_max if rho_max > 0 else sigma2)
    gamma_used = gamma if gamma is not None else gamma_low
    try:
        C = lipschitz_C(rho_min, alpha, gamma_used, sigma2, xi2_used, BetaConvention.XI2)
    except DiagnosticsError:
        C = math.inf

    return ErrorBoundReport(
        C=C,
        rho_min=rho_min,
        rho_max=rho_max,
        alpha1=alpha1,
        relax_bound=relax,
        gamma_feasible=gamma_low < gamma_high,
        s=s,
        gamma_low=gamma_low,
        gamma_high=gamma_high,
        noise_inf_norm=noise_inf,
    )


def error_bound_report(
    problem: BatchProblem,
    w_true: CVec,
    eps: CVec,
    penalty: PenaltyConfig,
    K: int = 20,
    hard_gamma: Optional[float] = None,
) -> ErrorBoundReport:
    """
    Full static diagnostic: bound, measured error and contraction audits.

    The estimator is run to its fixed point; a fresh K-step trace from zero is
    audited against the contraction constant. When ``hard_gamma`` is given a
    hard-thresholding trace is audited too and only recorded.
    """
    report = theorem2_bound(
        problem.X,
        problem.lam,
        eps,
        w_true,
        penalty.alpha,
        sigma2=penalty.sigma2,
        gamma=penalty.gamma,
        xi2=penalty.xi2,
    )
    w_star = converge_fixed_point(problem, penalty)
    report.measured_error = float(np.linalg.norm(w_star - as_cvec(w_true, "w_true")))

    if penalty.regime is ThresholdRegime.FIRM and math.isfinite(report.C):
        _, trace = spals_mcp(problem, penalty, K=K)
        report.contraction = contraction_audit(trace, w_star, report.C)

    if hard_gamma is not None:
        hard = penalty.with_gamma(hard_gamma)
        if hard.regime is not ThresholdRegime.FIRM:
            try:
                hard_star = converge_fixed_point(problem, hard, max_iter=20_000)
            except ConvergenceError:
                hard_star = spals_mcp(problem, hard, K=2_000)[0]
            _, hard_trace = spals_mcp(problem, hard, K=K)
            report.hard_contraction = contraction_audit(
                hard_trace, hard_star, report.C, allow_hard=True
            )
    logger.info(
        "Error bound report: C=%.4g relax_bound=%.4g measured=%.4g feasible=%s",
        report.C,
        report.relax_bound,
        report.measured_error,
        report.gamma_feasible,
    )
    return report
