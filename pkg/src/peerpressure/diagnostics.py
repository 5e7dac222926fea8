"""Numerical checks of the model's analytical properties on concrete instances.

Two gradients appear below and they differ by a factor 2 on the Laplacian
term:

* ``total_gradient`` is the gradient of the global utility
  ``U(x) = x^T (S + 2 rho L) x - 2 x^T S x+ + x+^T S x+``, the sum of every
  agent's stress when all agents sit at ``x`` (each edge counted from both
  ends).
* ``agent_gradient`` stacks ``dJ_i / dx_i``: each agent differentiates only
  its own stress in its own coordinate, neighbours held at ``x``. It equals
  ``2 (S + rho L) x - 2 S x+``.

The update map satisfies ``x_new = x - H agent_gradient(x)`` with
``H = diag(alpha) / 2`` exactly. The same identity with ``total_gradient``
does not hold unless ``L x = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    AgentProfile,
    Trajectory,
    bounded_limit,
    consensus_limit,
    fixed_point_at,
    limit_for,
    step,
    update,
)
from .exceptions import DegenerateTrajectory
from .graph import GraphMatrices, WeightedGraph
from .schedules import PressureSchedule
from .validation import check_positive, check_vector

__all__ = [
    "UtilityReport",
    "RateSeries",
    "StepDecomposition",
    "GradientCheck",
    "social_stress",
    "global_utility",
    "utility_quadratic",
    "utility_stress_sum",
    "total_gradient",
    "agent_gradient",
    "step_decomposition",
    "gradient_identity_check",
    "convergence_ratio_series",
    "total_utility",
    "optimal_point",
    "price_of_anarchy",
    "diagnose_trajectory",
]

FD_STEP = 1e-6
RATIO_FLOOR = 1e-13


def _matrices(g) -> GraphMatrices:
    return g.matrices if isinstance(g, WeightedGraph) else g


@dataclass(frozen=True)
class UtilityReport:
    u_k: float
    u_total: float
    u_limit: float


@dataclass(frozen=True)
class RateSeries:
    ratios: np.ndarray
    ks: np.ndarray  # ratios[t] = e(ks[t] + 1) / e(ks[t])


@dataclass(frozen=True)
class StepDecomposition:
    alpha: np.ndarray
    h_diag: np.ndarray
    grad_u: np.ndarray


@dataclass(frozen=True)
class GradientCheck:
    """Outcome of :func:`gradient_identity_check`.

    ``residual`` is the sup-norm gap between the update and
    ``x - H agent_gradient(x)``; ``residual_total`` is the same gap using
    the gradient of the global utility instead. ``fd_error`` and
    ``fd_error_total`` compare each analytic gradient with central
    differences of the function it claims to differentiate.
    """

    decomposition: StepDecomposition
    residual: float
    fd_error: float
    residual_total: float
    fd_error_total: float
    total_decomposition: StepDecomposition = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# stress and utility

def social_stress(g, p: AgentProfile, rho: float, i: int, x_i: float, x_prev) -> float:
    """Stress ``J_i`` of agent ``i`` disclosing ``x_i`` against neighbours at ``x_prev``."""
    m = _matrices(g)
    x_prev = check_vector(x_prev, m.n, "x_prev")
    row = m.adjacency[i]
    return float(p.s[i] * (x_i - p.x_plus[i]) ** 2 + rho * (row @ (x_i - x_prev) ** 2))


def utility_stress_sum(g, p: AgentProfile, rho: float, x) -> float:
    """``U(x)`` as the literal sum of ``J_i(x_i, x)`` over agents."""
    return float(sum(social_stress(g, p, rho, i, x[i], x) for i in range(len(x))))


def utility_quadratic(g, p: AgentProfile, rho: float, x) -> float:
    """``U(x) = x^T (S + 2 rho L) x - 2 x^T S x+ + x+^T S x+``."""
    m = _matrices(g)
    x = np.asarray(x, dtype=float)
    Sx = p.s * x
    return float(x @ Sx + 2.0 * rho * (x @ (m.laplacian @ x))
                 - 2.0 * (Sx @ p.x_plus) + (p.s * p.x_plus) @ p.x_plus)


def total_utility(g, p: AgentProfile, rho_star: float, x) -> float:
    """Limit of ``U_k(x)`` as ``rho(k) -> rho_star``; ``inf`` off the consensus line when unbounded."""
    if math.isinf(rho_star):
        m = _matrices(g)
        x = np.asarray(x, dtype=float)
        if x @ (m.laplacian @ x) > 1e-14 * max(1.0, x @ x):
            return math.inf
        return float(p.s @ (x - p.x_plus) ** 2)
    return utility_quadratic(g, p, rho_star, x)


def global_utility(g, p: AgentProfile, rho: float, x, rho_star: float | None = None,
                   check: bool = True) -> UtilityReport:
    """Utility of state ``x`` at pressure ``rho``.

    ``u_total`` uses ``rho_star`` (the schedule's limit, possibly ``inf``),
    defaulting to ``rho``. ``u_limit = 2 x^T L x`` is ``lim U_k / rho(k)``.
    With ``check`` the quadratic form is cross-checked against the stress
    sum.
    """
    m = _matrices(g)
    x = check_vector(x, m.n, "x")
    u_k = utility_quadratic(g, p, rho, x)
    if check:
        literal = utility_stress_sum(g, p, rho, x)
        if abs(literal - u_k) > 1e-10 * max(1.0, abs(literal)):
            raise ArithmeticError(f"utility forms disagree: {literal!r} vs {u_k!r}")
    rho_star = rho if rho_star is None else rho_star
    u_total = total_utility(g, p, rho_star, x)
    u_limit = float(2.0 * (x @ (m.laplacian @ x)))
    return UtilityReport(u_k, u_total, u_limit)


# ---------------------------------------------------------------------------
# gradient-descent form of the update

def total_gradient(g, p: AgentProfile, rho: float, x) -> np.ndarray:
    """Gradient of the global utility: ``2 (S + 2 rho L) x - 2 S x+``."""
    m = _matrices(g)
    x = np.asarray(x, dtype=float)
    return 2.0 * (p.s * x + 2.0 * rho * (m.laplacian @ x)) - 2.0 * p.s * p.x_plus


def agent_gradient(g, p: AgentProfile, rho: float, x) -> np.ndarray:
    """``dJ_i/dx_i`` for every agent: ``2 (S + rho L) x - 2 S x+``."""
    m = _matrices(g)
    x = np.asarray(x, dtype=float)
    return 2.0 * (p.s * x + rho * (m.laplacian @ x)) - 2.0 * p.s * p.x_plus


def step_decomposition(g, p: AgentProfile, rho: float, x_prev, total: bool = False) -> StepDecomposition:
    m = _matrices(g)
    alpha = 1.0 / (p.s + rho * m.degree)
    grad = (total_gradient if total else agent_gradient)(g, p, rho, x_prev)
    return StepDecomposition(alpha, 0.5 * alpha, grad)


def _central_diff(f, x, h=FD_STEP) -> np.ndarray:
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return out


def gradient_identity_check(g, p: AgentProfile, rho: float, x_prev) -> GradientCheck:
    """Check ``step(x) == x - H grad(x)`` with ``H = diag(alpha) / 2``.

    The agent-wise gradient is differentiated numerically from the stresses
    ``J_i(., x_prev)``; the total gradient from the global utility.
    """
    m = _matrices(g)
    rho = check_positive(rho, "rho")
    x_prev = check_vector(x_prev, m.n, "x_prev")
    x_new = step(m, p, rho, x_prev)

    own = step_decomposition(m, p, rho, x_prev)
    residual = float(np.abs(x_new - (x_prev - own.h_diag * own.grad_u)).max())
    fd_own = np.array([
        (social_stress(m, p, rho, i, x_prev[i] + FD_STEP, x_prev)
         - social_stress(m, p, rho, i, x_prev[i] - FD_STEP, x_prev)) / (2.0 * FD_STEP)
        for i in range(m.n)
    ])
    fd_error = float(np.abs(fd_own - own.grad_u).max())

    tot = step_decomposition(m, p, rho, x_prev, total=True)
    residual_total = float(np.abs(x_new - (x_prev - tot.h_diag * tot.grad_u)).max())
    fd_tot = _central_diff(lambda y: utility_quadratic(m, p, rho, y), x_prev)
    fd_error_total = float(np.abs(fd_tot - tot.grad_u).max())
    return GradientCheck(own, residual, fd_error, residual_total, fd_error_total, tot)


# ---------------------------------------------------------------------------
# convergence rate

def convergence_ratio_series(traj: Trajectory | np.ndarray, x_star) -> RateSeries:
    """Ratios ``||x(k+1) - x*|| / ||x(k) - x*||`` in the Euclidean norm.

    The series stops at the first ``k`` whose error falls below ``1e-13``.
    """
    states = traj.states if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    if states.shape[0] < 3:
        raise DegenerateTrajectory("need at least 3 states")
    x_star = check_vector(x_star, states.shape[1], "x_star")
    err = np.linalg.norm(states - x_star, axis=1)
    below = np.flatnonzero(err < RATIO_FLOOR)
    stop = below[0] if below.size else err.size - 1
    ratios = err[1: stop + 1] / err[:stop]
    if ratios.size < 2:
        raise DegenerateTrajectory("fewer than 2 ratios before reaching the limit")
    return RateSeries(ratios, np.arange(stop))


# ---------------------------------------------------------------------------
# price of anarchy

def optimal_point(g, p: AgentProfile, rho_star: float) -> np.ndarray:
    """Minimizer of the total utility: ``(S + 2 rho* L)^-1 S x+`` (consensus if unbounded)."""
    if math.isinf(rho_star):
        return consensus_limit(p).value
    # same solve as a fixed point with doubled pressure
    return fixed_point_at(g, p, 2.0 * rho_star)


def price_of_anarchy(g, p: AgentProfile, sch: PressureSchedule | float) -> float:
    """Total utility at the decentralized limit over the optimum.

    Unbounded schedules give exactly 1.0: the consensus limit is the
    minimizer. ``sch`` may also be a bare ``rho_star``.
    """
    rho_star = sch.limit if isinstance(sch, PressureSchedule) else float(sch)
    if math.isinf(rho_star):
        return 1.0
    x_nash = bounded_limit(g, p, rho_star).value
    x_opt = optimal_point(g, p, rho_star)
    # pairwise form: nonnegative term by term, so near-zero values are not
    # swamped by cancellation in the quadratic form
    u_nash = _utility_pairwise(g, p, rho_star, x_nash)
    u_opt = _utility_pairwise(g, p, rho_star, x_opt)
    if u_opt <= 1e-20 * float(p.s.sum()):
        # both vanish only when x+ is already a consensus
        return 1.0
    return u_nash / u_opt


def _utility_pairwise(g, p: AgentProfile, rho: float, x) -> float:
    A = _matrices(g).adjacency
    diff = x[:, None] - x[None, :]
    return float(p.s @ (x - p.x_plus) ** 2 + rho * (A * diff * diff).sum())


# ---------------------------------------------------------------------------
# one-shot report

def diagnose_trajectory(g, p: AgentProfile, sch: PressureSchedule, states, x_star=None) -> dict:
    """Diagnostics report for a recorded trajectory, JSON-ready.

    ``residuals.gradient`` is the largest gap over all recorded steps
    between ``x(k)`` and ``x(k-1) - H_k grad_k(x(k-1))`` (agent-wise
    gradient); ``residuals.gradient_total_utility`` the same with the total
    gradient. ``residuals.fixed_point`` is ``||F(x_bar) - x_bar||_inf`` at the
    last pressure.
    """
    m = _matrices(g)
    states = np.asarray(states, dtype=float)
    K = states.shape[0] - 1
    if K < 1:
        raise DegenerateTrajectory("trajectory has no steps")
    rhos = sch.values(K)
    grad_res = 0.0
    grad_res_total = 0.0
    for k in range(1, K + 1):
        own = step_decomposition(m, p, rhos[k - 1], states[k - 1])
        grad_res = max(grad_res, float(np.abs(
            states[k] - (states[k - 1] - own.h_diag * own.grad_u)).max()))
        tot = step_decomposition(m, p, rhos[k - 1], states[k - 1], total=True)
        grad_res_total = max(grad_res_total, float(np.abs(
            states[k] - (states[k - 1] - tot.h_diag * tot.grad_u)).max()))
    rho_last = float(rhos[-1])
    x_bar = fixed_point_at(m, p, rho_last)
    fp_res = float(np.abs(update(m, p, rho_last, x_bar) - x_bar).max())
    if x_star is None:
        x_star = limit_for(m, p, sch).value
    series = convergence_ratio_series(states, x_star)
    report = global_utility(m, p, rho_last, states[-1], rho_star=sch.limit, check=False)
    return {
        "u_k": report.u_k,
        "u_total": report.u_total if math.isfinite(report.u_total) else None,
        "u_limit": report.u_limit,
        "residuals": {
            "gradient": grad_res,
            "gradient_total_utility": grad_res_total,
            "fixed_point": fp_res,
        },
        "ratios": series.ratios.tolist(),
        "poa": price_of_anarchy(m, p, sch),
    }
