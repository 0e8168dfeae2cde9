"""
MCP-regularized least-squares estimators over complex data.

Batch problems are stacked as ``d_bar = X w + noise`` where row ``i`` of ``X`` is
``x(i)^H`` and ``d_bar`` holds the conjugated responses, so that the signal
model ``d(i) = w^H x(i) + eps(i)`` and the EM terms

    B  = I - (xi2/sigma2) X^H Lambda X
    mu = (xi2/sigma2) X^H Lambda d_bar

agree with the streaming recursion, which accumulates ``x(i) x(i)^H`` and
``x(i) conj(d(i))``.

Streaming filters come in two flavours: pure step functions over immutable
state records (``sparls_mcp_init``/``sparls_mcp_step``, ``rls_init``/``rls_step``)
and small stateful wrappers (:class:`SparlsFilter`, :class:`RLSFilter`) used by
the experiment runner.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConvergenceError, DimensionError, PenaltyDomainError
from .penalty import (
    GroupLayout,
    PenaltyConfig,
    ThresholdRegime,
    group_mcp_penalty,
    mcp_penalty,
    prox_group,
    prox_group_soft,
    prox_soft_vector,
    prox_vector,
)
from .types import CMat, CVec, as_cmat, as_cvec, check_length, check_square

logger = logging.getLogger(__name__)

POWER_ITERATION_TOL = 1e-6
POWER_ITERATION_MAX_STEPS = 10_000
DEFAULT_EM_ITERS = 5
DEFAULT_RLS_DELTA = 1e-2
ADMISSIBILITY_POWER_STEPS = 3
XI2_BACKOFF = 0.9


class PenaltyKind(Enum):
    """Sparsity penalty applied in the M-step."""

    MCP = "mcp"
    L1 = "l1"


# ---------------------------------------------------------------------------
# Problem definitions
# ---------------------------------------------------------------------------


@dataclass
class BatchProblem:
    """
    Exponentially weighted least-squares problem.

    Attributes:
        X: n x M matrix whose rows are x(i)^H.
        d: Conjugated responses, so that d ~ X w.
        lam: Forgetting factor in (0, 1].
        sigma2: Observation-noise variance.
    """

    X: CMat
    d: CVec
    lam: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self) -> None:
        self.X = as_cmat(self.X, "X")
        self.d = as_cvec(self.d, "d")
        if self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise DimensionError("X must be nonempty", {"shape": self.X.shape})
        check_length(self.d, self.X.shape[0], "d")
        if not (0 < self.lam <= 1):
            raise PenaltyDomainError(
                f"Forgetting factor must lie in (0, 1], got {self.lam}",
                {"lam": self.lam},
            )
        if not (self.sigma2 > 0):
            raise PenaltyDomainError(
                f"sigma2 must be positive, got {self.sigma2}", {"sigma2": self.sigma2}
            )

    @classmethod
    def from_samples(
        cls,
        xs: Sequence[CVec],
        ds: Sequence[complex],
        lam: float = 1.0,
        sigma2: float = 1.0,
    ) -> "BatchProblem":
        """Stack input vectors ``x(i)`` and responses ``d(i)`` into ``(X, d_bar)``."""
        inputs = as_cmat(np.asarray(xs), "xs")
        responses = as_cvec(ds, "ds")
        return cls(X=inputs.conj(), d=responses.conj(), lam=lam, sigma2=sigma2)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def weights(self) -> np.ndarray:
        """Diagonal of Lambda: lam^(n-1), ..., lam, 1."""
        return self.lam ** np.arange(self.n - 1, -1, -1, dtype=float)

    def gram(self) -> CMat:
        """X^H Lambda X."""
        weighted = self.X.conj().T * self.weights()
        return weighted @ self.X

    def cross(self) -> CVec:
        """X^H Lambda d."""
        return (self.X.conj().T * self.weights()) @ self.d

    def residual(self, w: CVec) -> CVec:
        return self.d - self.X @ w


@dataclass
class EMTrace:
    """Iterates and objective values of one EM run."""

    iterates: List[CVec] = field(default_factory=list)
    objective_values: List[float] = field(default_factory=list)
    regime: ThresholdRegime = ThresholdRegime.FIRM
    kind: PenaltyKind = PenaltyKind.MCP

    @property
    def K(self) -> int:
        return len(self.iterates) - 1

    @property
    def final(self) -> CVec:
        return self.iterates[-1]


# ---------------------------------------------------------------------------
# Objective and EM building blocks
# ---------------------------------------------------------------------------


def objective(
    problem: BatchProblem,
    w: CVec,
    penalty: PenaltyConfig,
    layout: Optional[GroupLayout] = None,
    kind: PenaltyKind = PenaltyKind.MCP,
) -> float:
    """Penalized weighted least-squares cost descended by the EM iterations."""
    w = as_cvec(w, "w")
    check_length(w, problem.dim, "w")
    resid = problem.residual(w)
    fit = float(np.sum(problem.weights() * np.abs(resid) ** 2)) / (2.0 * problem.sigma2)
    if penalty.gamma == 0:
        return fit
    if kind is PenaltyKind.MCP:
        if layout is None:
            reg = mcp_penalty(w, penalty.alpha)
        else:
            reg = group_mcp_penalty(w, layout, penalty.alpha)
    else:
        reg = float(np.sum(np.abs(w))) if layout is None else float(
            np.sum(layout.group_norms(w))
        )
    return fit + penalty.gamma * reg


def _power_iteration(gram: CMat) -> float:
    dim = gram.shape[0]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    for step in range(1, POWER_ITERATION_MAX_STEPS + 1):
        gv = gram @ v
        theta = float(np.vdot(v, gv).real)
        if theta <= 0:
            break
        residual = np.linalg.norm(gv - theta * v)
        if residual <= POWER_ITERATION_TOL * theta:
            logger.debug("Power iteration converged after %d steps", step)
            return theta
        v = gv / np.linalg.norm(gv)
    raise ConvergenceError(
        "Power iteration for the largest eigenvalue did not converge",
        {"max_steps": POWER_ITERATION_MAX_STEPS, "dim": dim},
    )


def select_xi2(X, lam: float, sigma2: float, safety: float = 1.0) -> float:
    """
    Largest admissible latent-noise scale ``safety * sigma2 / lambda_1``.

    ``lambda_1`` is the largest eigenvalue of ``X^H Lambda X`` found by power
    iteration.

    Raises:
        ConvergenceError: If power iteration fails or the Gram matrix is zero.
    """
    if not (0 < safety <= 1):
        raise PenaltyDomainError(
            f"safety must lie in (0, 1], got {safety}", {"safety": safety}
        )
    X = as_cmat(X, "X")
    problem = BatchProblem(X, np.zeros(X.shape[0], dtype=complex), lam, sigma2)
    lambda1 = _power_iteration(problem.gram())
    return safety * sigma2 / lambda1


def calibrate_xi2(
    x_prefix: Sequence[CVec], lam: float, sigma2: float, safety: float = 0.9
) -> float:
    """xi2 for a stream, from its first samples (inputs as rows, not conjugated)."""
    inputs = as_cmat(np.asarray(x_prefix), "x_prefix")
    return select_xi2(inputs.conj(), lam, sigma2, safety)


def batch_matrices(problem: BatchProblem, xi2: float) -> Tuple[CMat, CVec]:
    """EM matrices ``(B, mu)`` of a batch problem, computed from scratch."""
    gain = xi2 / problem.sigma2
    B = np.eye(problem.dim, dtype=complex) - gain * problem.gram()
    mu = gain * problem.cross()
    return B, mu


def em_e_step(B: CMat, mu: CVec, w_prev: CVec) -> CVec:
    """E-step ``r = B w_prev + mu``."""
    mu = as_cvec(mu, "mu")
    w_prev = as_cvec(w_prev, "w_prev")
    check_square(np.asarray(B), mu.shape[0], "B")
    check_length(w_prev, mu.shape[0], "w_prev")
    return B @ w_prev + mu


def em_m_step(
    r: CVec,
    penalty: PenaltyConfig,
    layout: Optional[GroupLayout] = None,
    kind: PenaltyKind = PenaltyKind.MCP,
) -> CVec:
    """M-step: prox of the chosen penalty at scale ``xi2 * gamma``."""
    r = as_cvec(r, "r")
    beta = penalty.beta
    if layout is not None:
        layout.validate(r)
    if kind is PenaltyKind.L1:
        if layout is None:
            return prox_soft_vector(r, beta)
        return prox_group_soft(r, layout, beta)
    if beta == 0:
        return r.copy()
    if layout is None:
        return prox_vector(r, beta, penalty.alpha, penalty.tie_policy)
    return prox_group(r, layout, beta, penalty.alpha)


def _check_xi2(problem: BatchProblem, penalty: PenaltyConfig) -> None:
    rho_max = float(np.linalg.eigvalsh(problem.gram())[-1])
    bound = penalty.sigma2 / rho_max if rho_max > 0 else np.inf
    if penalty.xi2 > bound * (1 + 1e-9):
        raise PenaltyDomainError(
            "xi2 exceeds sigma2 / lambda_1; the EM surrogate is not a majorizer",
            {"xi2": penalty.xi2, "bound": bound},
        )


def _run_em(
    problem: BatchProblem,
    penalty: PenaltyConfig,
    w0: Optional[CVec],
    K: int,
    layout: Optional[GroupLayout],
    kind: PenaltyKind,
) -> Tuple[CVec, EMTrace]:
    if K < 1:
        raise PenaltyDomainError(f"K must be positive, got {K}", {"K": K})
    _check_xi2(problem, penalty)
    if layout is not None:
        if layout.dim != problem.dim:
            raise DimensionError(
                "Group layout does not match the weight dimension",
                {"layout_dim": layout.dim, "dim": problem.dim},
            )
        if kind is PenaltyKind.MCP and penalty.beta >= penalty.alpha:
            raise PenaltyDomainError(
                "Group MCP requires xi2 * gamma < alpha",
                {"beta": penalty.beta, "alpha": penalty.alpha},
            )

    w = np.zeros(problem.dim, dtype=complex) if w0 is None else as_cvec(w0, "w0").copy()
    check_length(w, problem.dim, "w0")
    B, mu = batch_matrices(problem, penalty.xi2)

    trace = EMTrace(regime=penalty.regime, kind=kind)
    trace.iterates.append(w.copy())
    trace.objective_values.append(objective(problem, w, penalty, layout, kind))
    for _ in range(K):
        w = em_m_step(em_e_step(B, mu, w), penalty, layout, kind)
        trace.iterates.append(w.copy())
        trace.objective_values.append(objective(problem, w, penalty, layout, kind))
    return w, trace


def spals_mcp(
    problem: BatchProblem,
    penalty: PenaltyConfig,
    w0: Optional[CVec] = None,
    K: int = 100,
    layout: Optional[GroupLayout] = None,
) -> Tuple[CVec, EMTrace]:
    """
    Batch sparse least squares with MCP via K EM iterations.

    Args:
        problem: Weighted least-squares problem.
        penalty: MCP parameters; ``xi2`` must not exceed ``sigma2 / lambda_1``.
        w0: Initial estimate (zero when omitted).
        K: Number of EM iterations.
        layout: Group layout for the group MCP variant.

    Returns:
        Final estimate and the EM trace.

    Raises:
        PenaltyDomainError: For an inadmissible xi2, or beta >= alpha with groups.
        DimensionError: On shape mismatches.
    """
    return _run_em(problem, penalty, w0, K, layout, PenaltyKind.MCP)


def spals_l1(
    problem: BatchProblem,
    penalty: PenaltyConfig,
    w0: Optional[CVec] = None,
    K: int = 100,
    layout: Optional[GroupLayout] = None,
) -> Tuple[CVec, EMTrace]:
    """Batch l1 (or group Lasso when ``layout`` is given) counterpart of :func:`spals_mcp`."""
    return _run_em(problem, penalty, w0, K, layout, PenaltyKind.L1)


# ---------------------------------------------------------------------------
# Streaming recursions
# ---------------------------------------------------------------------------


@dataclass
class FilterState:
    """
    Recursion state of the streaming EM filter.

    ``B = I - c G`` and ``mu = c h`` with ``c = xi2 / sigma2``, where ``G`` and
    ``h`` are the exponentially weighted input correlation and cross-correlation.
    ``gain_bound`` is an upper bound on ``c * lambda_1(G)`` and ``top_vec`` the
    current estimate of the leading eigenvector of ``G``.
    """

    B: CMat
    mu: CVec
    w_hat: CVec
    t: int
    penalty: PenaltyConfig
    em_iters: int = DEFAULT_EM_ITERS
    lam: float = 0.99
    gain_bound: float = 0.0
    top_vec: Optional[CVec] = None

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


def _leading_eigenvalue(
    A: CMat, v: CVec, hint: Optional[CVec] = None
) -> Tuple[float, CVec]:
    """
    Estimate ``lambda_1`` of Hermitian PSD ``A`` by a few warm-started power steps.

    ``hint`` (the newest input) is tried as a second start so that a sudden
    rank-one jump along a direction orthogonal to ``v`` is not missed.
    """
    starts = [v]
    if hint is not None:
        starts.append(hint / max(float(np.linalg.norm(hint)), 1e-300))
    best, best_v = 0.0, v
    for u in starts:
        estimate = 0.0
        for _ in range(ADMISSIBILITY_POWER_STEPS):
            Au = A @ u
            estimate = float(np.linalg.norm(Au))
            if estimate == 0.0:
                break
            u = Au / estimate
        if estimate > best:
            best, best_v = estimate, u
    return best, best_v


def _keep_admissible(
    B: CMat,
    mu: CVec,
    penalty: PenaltyConfig,
    bound: float,
    v: CVec,
    t: int,
    x: Optional[CVec] = None,
) -> Tuple[CMat, CVec, PenaltyConfig, float, CVec]:
    """
    Shrink xi2 once ``(xi2 / sigma2) lambda_1`` exceeds one.

    Scaling xi2 by ``s`` maps ``B`` to ``(1 - s) I + s B`` and ``mu`` to ``s mu``
    exactly, so nothing has to be recomputed from the data.
    """
    if bound <= 1.0:
        return B, mu, penalty, bound, v
    eye = np.eye(B.shape[0], dtype=complex)
    gain_lambda1, v = _leading_eigenvalue(eye - B, v, x)
    if gain_lambda1 <= 1.0:
        return B, mu, penalty, gain_lambda1, v
    scale = XI2_BACKOFF / gain_lambda1
    logger.warning(
        "xi2 * lambda_1 / sigma2 reached %.3f at t=%d; shrinking xi2 from %.4g to %.4g",
        gain_lambda1, t, penalty.xi2, penalty.xi2 * scale,
    )
    B = (1.0 - scale) * eye + scale * B
    return B, scale * mu, penalty.with_xi2(penalty.xi2 * scale), XI2_BACKOFF, v


def sparls_mcp_init(
    x1: CVec,
    d1: complex,
    penalty: PenaltyConfig,
    K: int = DEFAULT_EM_ITERS,
    lam: float = 0.99,
) -> FilterState:
    """First-sample state: ``B = I - c x x^H``, ``mu = c x conj(d)``, ``w_hat = 0``."""
    x1 = as_cvec(x1, "x1")
    if not np.all(np.isfinite(x1)):
        raise DimensionError("x1 must be finite")
    if K < 1:
        raise PenaltyDomainError(f"K must be positive, got {K}", {"K": K})
    if not (0 < lam <= 1):
        raise PenaltyDomainError(
            f"Forgetting factor must lie in (0, 1], got {lam}", {"lam": lam}
        )
    gain = penalty.ratio
    B = np.eye(x1.shape[0], dtype=complex) - gain * np.outer(x1, x1.conj())
    mu = gain * x1 * np.conj(d1)
    power = float(np.vdot(x1, x1).real)
    if power > 0:
        v = x1 / np.sqrt(power)
    else:
        v = np.full(x1.shape[0], x1.shape[0] ** -0.5, dtype=complex)
    B, mu, penalty, bound, v = _keep_admissible(B, mu, penalty, gain * power, v, 1)
    return FilterState(
        B=B,
        mu=mu,
        w_hat=np.zeros(x1.shape[0], dtype=complex),
        t=1,
        penalty=penalty,
        em_iters=K,
        lam=lam,
        gain_bound=bound,
        top_vec=v,
    )


def _recursive_update(
    state: FilterState,
    x: CVec,
    d: complex,
    layout: Optional[GroupLayout],
    kind: PenaltyKind,
) -> FilterState:
    x = as_cvec(x, "x")
    check_length(x, state.dim, "x")
    if layout is not None:
        layout.validate(state.w_hat)
    gain = state.penalty.ratio
    lam = state.lam
    B = lam * state.B - gain * np.outer(x, x.conj())
    B[np.diag_indices_from(B)] += 1.0 - lam
    mu = lam * state.mu + gain * x * np.conj(d)

    # Weyl: lambda_1 grows by at most ||x||^2 per sample.
    bound = lam * state.gain_bound + gain * float(np.vdot(x, x).real)
    v = state.top_vec
    if v is None:
        v = np.full(state.dim, state.dim ** -0.5, dtype=complex)
    B, mu, penalty, bound, v = _keep_admissible(
        B, mu, state.penalty, bound, v, state.t + 1, x
    )

    w = state.w_hat.copy()
    for _ in range(state.em_iters):
        w = em_m_step(B @ w + mu, penalty, layout, kind)
    return FilterState(
        B=B,
        mu=mu,
        w_hat=w,
        t=state.t + 1,
        penalty=penalty,
        em_iters=state.em_iters,
        lam=lam,
        gain_bound=bound,
        top_vec=v,
    )


def sparls_mcp_step(
    state: FilterState,
    x: CVec,
    d: complex,
    layout: Optional[GroupLayout] = None,
) -> FilterState:
    """
    One streaming MCP update.

    Updates ``B`` and ``mu`` by the forgetting-factor recursion, warm-starts at the
    previous estimate and runs ``state.em_iters`` EM iterations. If the data push
    ``(xi2 / sigma2) lambda_1`` above one, xi2 is shrunk first so that the EM map
    stays a majorization step; the returned state carries the new penalty.
    """
    return _recursive_update(state, x, d, layout, PenaltyKind.MCP)


def sparls_l1_step(
    state: FilterState,
    x: CVec,
    d: complex,
    layout: Optional[GroupLayout] = None,
) -> FilterState:
    """Streaming update with soft (or block soft) thresholding in the M-step."""
    return _recursive_update(state, x, d, layout, PenaltyKind.L1)


@dataclass
class RLSState:
    """Inverse-correlation RLS state."""

    P: CMat
    w_hat: CVec
    lam: float
    t: int = 0


def rls_init(M: int, lam: float = 0.99, delta: float = DEFAULT_RLS_DELTA) -> RLSState:
    """``P(0) = I / delta`` and ``w_hat(0) = 0``."""
    if M < 1:
        raise DimensionError(f"Weight dimension must be positive, got {M}")
    if not (delta > 0):
        raise PenaltyDomainError(f"delta must be positive, got {delta}", {"delta": delta})
    if not (0 < lam <= 1):
        raise PenaltyDomainError(
            f"Forgetting factor must lie in (0, 1], got {lam}", {"lam": lam}
        )
    return RLSState(
        P=np.eye(M, dtype=complex) / delta,
        w_hat=np.zeros(M, dtype=complex),
        lam=lam,
    )


def rls_step(state: RLSState, x: CVec, d: complex) -> RLSState:
    """
    Exponentially weighted RLS update for ``d = w^H x + eps``.

    Raises:
        ConvergenceError: If P stops being Hermitian positive definite.
    """
    x = as_cvec(x, "x")
    check_length(x, state.w_hat.shape[0], "x")
    Px = state.P @ x
    denom = state.lam + float(np.vdot(x, Px).real)
    k = Px / denom
    err = d - np.vdot(state.w_hat, x)
    w = state.w_hat + k * np.conj(err)
    P = (state.P - np.outer(k, x.conj() @ state.P)) / state.lam
    P = 0.5 * (P + P.conj().T)

    diag = P.diagonal().real
    if not np.all(np.isfinite(P)) or np.any(diag <= 0):
        raise ConvergenceError(
            "RLS inverse correlation matrix lost positive definiteness",
            {"t": state.t + 1, "min_diag": float(np.min(diag))},
        )
    return RLSState(P=P, w_hat=w, lam=state.lam, t=state.t + 1)


# ---------------------------------------------------------------------------
# Stateful wrappers
# ---------------------------------------------------------------------------


class AdaptiveFilter(ABC):
    """Common interface of the streaming estimators used by the runner."""

    name: str = "filter"

    @abstractmethod
    def update(self, x: CVec, d: complex) -> CVec:
        """Consume one sample and return the new estimate."""

    @property
    @abstractmethod
    def estimate(self) -> CVec:
        """Current weight estimate."""

    def predict(self, x: CVec) -> complex:
        """A priori prediction ``w_hat^H x``."""
        return complex(np.vdot(self.estimate, as_cvec(x, "x")))


class RLSFilter(AdaptiveFilter):
    """Conventional exponentially weighted RLS."""

    name = "RLS"

    def __init__(self, M: int, lam: float = 0.99, delta: float = DEFAULT_RLS_DELTA):
        self._state = rls_init(M, lam, delta)

    @property
    def state(self) -> RLSState:
        return self._state

    @property
    def estimate(self) -> CVec:
        return self._state.w_hat

    def update(self, x: CVec, d: complex) -> CVec:
        self._state = rls_step(self._state, x, d)
        return self._state.w_hat


class SparlsFilter(AdaptiveFilter):
    """
    Streaming EM filter with an MCP or l1 M-step, optionally grouped.

    The first sample only initializes ``B`` and ``mu``; the estimate stays zero
    until the second sample arrives.
    ``penalty`` follows the state, so it reflects any xi2 shrink made to keep
    the recursion stable.
    """

    def __init__(
        self,
        M: int,
        penalty: PenaltyConfig,
        lam: float = 0.99,
        K: int = DEFAULT_EM_ITERS,
        kind: PenaltyKind = PenaltyKind.MCP,
        layout: Optional[GroupLayout] = None,
    ):
        if layout is not None and layout.dim != M:
            raise DimensionError(
                "Group layout does not match the weight dimension",
                {"layout_dim": layout.dim, "dim": M},
            )
        if layout is not None and kind is PenaltyKind.MCP and penalty.beta >= penalty.alpha:
            raise PenaltyDomainError(
                "Group MCP requires xi2 * gamma < alpha",
                {"beta": penalty.beta, "alpha": penalty.alpha},
            )
        self.M = M
        self.penalty = penalty
        self.lam = lam
        self.K = K
        self.kind = kind
        self.layout = layout
        self._state: Optional[FilterState] = None
        self.name = self._label()

    def _label(self) -> str:
        if self.layout is not None:
            return "GROUP_MCP" if self.kind is PenaltyKind.MCP else "GROUP_LASSO"
        return "SPARLS_MCP" if self.kind is PenaltyKind.MCP else "SPARLS_L1"

    @property
    def state(self) -> Optional[FilterState]:
        return self._state

    @property
    def estimate(self) -> CVec:
        if self._state is None:
            return np.zeros(self.M, dtype=complex)
        return self._state.w_hat

    def update(self, x: CVec, d: complex) -> CVec:
        if self._state is None:
            self._state = sparls_mcp_init(x, d, self.penalty, self.K, self.lam)
        elif self.kind is PenaltyKind.MCP:
            self._state = sparls_mcp_step(self._state, x, d, self.layout)
        else:
            self._state = sparls_l1_step(self._state, x, d, self.layout)
        self.penalty = self._state.penalty
        return self._state.w_hat
