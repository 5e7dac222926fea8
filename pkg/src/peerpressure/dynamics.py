"""Opinion update map, trajectories, per-step fixed points and limits.

Agent ``i`` discloses

    x_i(k) = (s_i x+_i + rho(k) sum_j w_ij x_j(k-1)) / (s_i + rho(k) d_i)

which in matrix form is ``x(k) = (S + rho D)^-1 (S x+ + rho A x(k-1))``.
For fixed ``rho`` the map has the unique fixed point
``(S + rho L)^-1 S x+``; as ``rho -> inf`` that point tends to the
stubbornness-weighted mean of ``x+`` on every coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidProfile
from .graph import GraphMatrices, WeightedGraph
from .numerics import operator_norm, solve_spd
from .schedules import PressureSchedule
from .validation import check_opinions, check_positive, check_vector

__all__ = [
    "AgentProfile",
    "Trajectory",
    "LimitPoint",
    "step",
    "update",
    "iterate",
    "simulate",
    "fixed_point_at",
    "consensus_limit",
    "bounded_limit",
    "limit_for",
    "contraction_matrix",
    "contraction_factor",
]


def _matrices(g) -> GraphMatrices:
    return g.matrices if isinstance(g, WeightedGraph) else g


@dataclass(frozen=True)
class AgentProfile:
    """Innate preferences ``x_plus`` in [0, 1] and stubbornness ``s >= 0``."""

    x_plus: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        xp = check_opinions(self.x_plus, name="x_plus").copy()
        s = check_vector(self.s, xp.shape[0], "s").copy()
        if np.any(s < 0):
            raise InvalidProfile("stubbornness must be nonnegative")
        if not s.sum() > 0:
            raise InvalidProfile("at least one agent must have positive stubbornness")
        xp.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "x_plus", xp)
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.x_plus.shape[0]

    @property
    def S(self) -> np.ndarray:
        return np.diag(self.s)

    def __eq__(self, other):
        if not isinstance(other, AgentProfile):
            return NotImplemented
        return np.array_equal(self.x_plus, other.x_plus) and np.array_equal(self.s, other.s)

    __hash__ = None


@dataclass(frozen=True)
class LimitPoint:
    value: np.ndarray
    kind: str  # "consensus" or "distribution"


@dataclass
class Trajectory:
    """States ``x(0), ..., x(K)`` and the pressures ``rho(1..K)`` that made them."""

    states: np.ndarray
    rhos: np.ndarray
    profile: AgentProfile
    graph: object = None
    schedule: PressureSchedule | None = None
    stop_reason: str = "k_max"
    ks: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.ks is None:
            self.ks = np.arange(self.states.shape[0])

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def out_of_box(self) -> int:
        """Number of recorded opinions outside [0, 1] (should always be 0)."""
        return int(np.count_nonzero((self.states < 0.0) | (self.states > 1.0)))


def _check_compatible(m: GraphMatrices, p: AgentProfile):
    if m.n != p.n:
        raise InvalidProfile(f"profile has {p.n} agents but graph has {m.n}")


def step(g, p: AgentProfile, rho: float, x_prev) -> np.ndarray:
    """One synchronous best response, evaluated agent by agent.

    This is the literal per-agent formula; :func:`update` is the vectorized
    equivalent used by :func:`simulate`.
    """
    m = _matrices(g)
    _check_compatible(m, p)
    rho = check_positive(rho, "rho")
    x_prev = check_vector(x_prev, m.n, "x_prev")
    A = m.adjacency
    out = np.empty(m.n)
    for i in range(m.n):
        nbrs = np.flatnonzero(A[i])
        pull = 0.0
        deg = 0.0
        for j in nbrs:
            pull += A[i, j] * x_prev[j]
            deg += A[i, j]
        out[i] = (p.s[i] * p.x_plus[i] + rho * pull) / (p.s[i] + rho * deg)
    return out


def update(g, p: AgentProfile, rho: float, x_prev) -> np.ndarray:
    """Vectorized update map ``F_rho``."""
    m = _matrices(g)
    return (p.s * p.x_plus + rho * (m.adjacency @ x_prev)) / (p.s + rho * m.degree)


def iterate(g, p: AgentProfile, rhos, x0, stop_tol: float = 0.0):
    """Apply ``F_rho`` for each ``rho`` in ``rhos`` starting at ``x0``.

    Returns ``(states, stop_reason)`` where ``states`` has one row per
    recorded state. Stops early once the sup-norm step size drops below
    ``stop_tol``. The pressures need not be monotone, which is what schedule
    fitting relies on.
    """
    m = _matrices(g)
    _check_compatible(m, p)
    x = check_opinions(x0, m.n, "x0").copy()
    rhos = np.asarray(rhos, dtype=float)
    if rhos.size and not np.all(rhos > 0):
        raise ValueError("every rho must be positive")
    A, d = m.adjacency, m.degree
    sxp, s = p.s * p.x_plus, p.s
    states = np.empty((rhos.size + 1, m.n))
    states[0] = x
    for k, rho in enumerate(rhos, start=1):
        x_new = (sxp + rho * (A @ x)) / (s + rho * d)
        states[k] = x_new
        if stop_tol > 0.0 and np.abs(x_new - x).max() < stop_tol:
            return states[: k + 1], "tolerance"
        x = x_new
    return states, "k_max"


def simulate(g, p: AgentProfile, sch: PressureSchedule, x0=None, k_max: int = 1000,
             stop_tol: float = 1e-12) -> Trajectory:
    """Run the dynamics under schedule ``sch`` for at most ``k_max`` steps.

    ``x0`` defaults to the innate preferences.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    x0 = p.x_plus if x0 is None else x0
    rhos = sch.values(int(k_max))
    states, reason = iterate(g, p, rhos, x0, stop_tol)
    return Trajectory(states, rhos[: states.shape[0] - 1], p, g, sch, reason)


def fixed_point_at(g, p: AgentProfile, rho: float) -> np.ndarray:
    """Unique fixed point ``(S + rho L)^-1 S x+`` of ``F_rho``."""
    m = _matrices(g)
    _check_compatible(m, p)
    rho = check_positive(rho, "rho")
    return solve_spd(np.diag(p.s) + rho * m.laplacian, p.s * p.x_plus)


def consensus_limit(p: AgentProfile) -> LimitPoint:
    """Stubbornness-weighted mean of ``x+`` on every coordinate."""
    value = float(p.s @ p.x_plus) / float(p.s.sum())
    return LimitPoint(np.full(p.n, value), "consensus")


def bounded_limit(g, p: AgentProfile, rho_star: float) -> LimitPoint:
    return LimitPoint(fixed_point_at(g, p, rho_star), "distribution")


def limit_for(g, p: AgentProfile, sch: PressureSchedule) -> LimitPoint:
    """Where a trajectory under ``sch`` ends up."""
    if math.isinf(sch.limit):
        return consensus_limit(p)
    return bounded_limit(g, p, sch.limit)


def contraction_matrix(g, p: AgentProfile, rho: float) -> np.ndarray:
    """Linear part ``rho (S + rho D)^-1 A`` of the update map."""
    m = _matrices(g)
    _check_compatible(m, p)
    return rho * m.adjacency / (p.s + rho * m.degree)[:, None]


def contraction_factor(g, p: AgentProfile, rho: float) -> float:
    """Lipschitz constant of ``F_rho`` in the norm ``||(S + rho D)^(1/2) x||_2``.

    In that norm the linear part is similar to the symmetric matrix
    ``rho W^-1/2 A W^-1/2`` (``W = S + rho D``), so the induced norm equals
    the spectral radius of ``rho (S + rho D)^-1 A``, which is below 1 on a
    connected graph with some positive stubbornness. The plain Euclidean
    norm of the same matrix can exceed 1 on irregular graphs.
    """
    m = _matrices(g)
    _check_compatible(m, p)
    rho = check_positive(rho, "rho")
    w = 1.0 / np.sqrt(p.s + rho * m.degree)
    return operator_norm(rho * w[:, None] * m.adjacency * w[None, :])
