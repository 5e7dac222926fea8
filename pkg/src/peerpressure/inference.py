"""Fitting a peer-pressure schedule to observed opinion snapshots.

Snapshots are taken at known steps ``k_0 < k_1 < ...``. Pressure is held
constant on each interval ``(b_{j-1}, b_j]`` between consecutive snapshot
steps (plus ``(0, k_0]`` when ``k_0 > 0``), the dynamics are run from
``x0`` and the loss is the sum over snapshots of the distance between the
simulated and observed opinion vectors. The per-interval pressures are found
by Nelder-Mead in log space, and a least-squares line through them
(pressure against interval index ``1..J``) summarizes the trend.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dynamics import AgentProfile, iterate
from .exceptions import DegenerateInput, DimensionMismatch, ParseError
from .io import read_states_csv, write_states_csv
from .numerics import RegressionLine, linear_regression
from .validation import check_opinions

__all__ = [
    "ObservationPanel",
    "FitResult",
    "BudgetExhaustedWarning",
    "interval_bounds",
    "piecewise_rhos",
    "simulate_panel",
    "fit_loss",
    "fit_schedule",
    "ScheduleFitter",
    "read_panel",
    "write_panel",
]

NORMS = {"l2": 2, "sup": np.inf}


class BudgetExhaustedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ObservationPanel:
    ks: np.ndarray
    opinions: np.ndarray  # one row per snapshot

    def __post_init__(self):
        ks = np.asarray(self.ks, dtype=int).ravel()
        X = np.asarray(self.opinions, dtype=float)
        if X.ndim != 2 or X.shape[0] != ks.size or ks.size == 0:
            raise DimensionMismatch("need one opinion row per snapshot step")
        if ks[0] < 0 or np.any(np.diff(ks) <= 0):
            raise ParseError("snapshot steps must be nonnegative and strictly increasing")
        for row in X:
            check_opinions(row, X.shape[1], "snapshot")
        object.__setattr__(self, "ks", ks)
        object.__setattr__(self, "opinions", X)

    @property
    def n(self) -> int:
        return self.opinions.shape[1]

    @property
    def n_intervals(self) -> int:
        return interval_bounds(self.ks).size - 1

    def __eq__(self, other):
        if not isinstance(other, ObservationPanel):
            return NotImplemented
        return np.array_equal(self.ks, other.ks) and np.array_equal(self.opinions, other.opinions)

    __hash__ = None


@dataclass(frozen=True)
class FitResult:
    rho: np.ndarray
    loss: float
    trend: RegressionLine | None
    evaluations: int
    budget_exhausted: bool
    initial_loss: float

    def as_dict(self) -> dict:
        return {
            "rho": self.rho.tolist(),
            "loss": self.loss,
            "trend": self.trend.as_dict() if self.trend is not None else None,
            "evaluations": self.evaluations,
            "budget_exhausted": self.budget_exhausted,
        }


def interval_bounds(ks) -> np.ndarray:
    ks = np.asarray(ks, dtype=int)
    return ks if ks[0] == 0 else np.concatenate([[0], ks])


def piecewise_rhos(ks, rho_values) -> np.ndarray:
    """Per-step pressures ``rho(1..k_last)`` from one value per interval."""
    bounds = interval_bounds(ks)
    rho_values = np.asarray(rho_values, dtype=float).ravel()
    if rho_values.size != bounds.size - 1:
        raise DimensionMismatch(
            f"expected {bounds.size - 1} interval pressures, got {rho_values.size}")
    return np.repeat(rho_values, np.diff(bounds))


def simulate_panel(g, p: AgentProfile, ks, rho_values, x0) -> np.ndarray:
    """Simulated opinions at each snapshot step."""
    ks = np.asarray(ks, dtype=int)
    states, _ = iterate(g, p, piecewise_rhos(ks, rho_values), x0)
    return states[ks]


def _check_panel(g, p: AgentProfile, panel: ObservationPanel):
    n = g.n
    if panel.n != p.n or panel.n != n:
        raise DimensionMismatch(
            f"panel has {panel.n} agents, profile {p.n}, graph {n}")


def fit_loss(g, p: AgentProfile, panel: ObservationPanel, rho_values, x0=None,
             norm: str = "l2") -> float:
    """Sum over snapshots of ``||x_sim(k) - x_obs(k)||`` (Euclidean by default)."""
    _check_panel(g, p, panel)
    x0 = panel.opinions[0] if x0 is None else check_opinions(x0, panel.n, "x0")
    sim = simulate_panel(g, p, panel.ks, rho_values, x0)
    return float(np.linalg.norm(sim - panel.opinions, ord=NORMS[norm], axis=1).sum())


class _Budget(Exception):
    pass


def fit_schedule(g, p: AgentProfile, panel: ObservationPanel, init=None, budget: int = 2000,
                 x0=None, norm: str = "l2", simplex_step: float = 0.5,
                 xatol: float = 1e-10, fatol: float = 1e-14) -> FitResult:
    """Nelder-Mead fit of one pressure per interval, searched over ``log(rho)``.

    The initial simplex offsets each log-coordinate of ``init`` by
    ``simplex_step``. At most ``budget`` loss evaluations are spent; the
    best point seen is returned, so the loss never exceeds the loss at
    ``init``.
    """
    _check_panel(g, p, panel)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    J = panel.n_intervals
    init = np.ones(J) if init is None else np.asarray(init, dtype=float).ravel()
    if init.size != J:
        raise DimensionMismatch(f"init needs {J} values, got {init.size}")
    if np.any(init <= 0):
        raise ValueError("init pressures must be positive")
    x0 = panel.opinions[0] if x0 is None else check_opinions(x0, panel.n, "x0")

    best = {"rho": init, "loss": math.inf}
    count = [0]

    def evaluate(rho):
        if count[0] >= budget:
            raise _Budget
        count[0] += 1
        loss = fit_loss(g, p, panel, rho, x0, norm)
        if loss < best["loss"]:
            best["rho"], best["loss"] = rho, loss
        return loss

    # init is scored as given: exp(log(rho)) need not round-trip exactly
    initial_loss = evaluate(init)
    z0 = np.log(init)
    exhausted = False
    if J and initial_loss > 0.0:
        simplex = np.vstack([z0] + [z0 + simplex_step * e for e in np.eye(J)])
        try:
            res = minimize(lambda z: evaluate(np.exp(z)), z0, method="Nelder-Mead",
                           options={"initial_simplex": simplex, "maxfev": budget,
                                    "maxiter": 100 * budget, "xatol": xatol,
                                    "fatol": fatol, "adaptive": False})
            exhausted = res.status == 1 and count[0] >= budget
        except _Budget:
            exhausted = True
    if exhausted:
        warnings.warn(f"evaluation budget {budget} exhausted", BudgetExhaustedWarning,
                      stacklevel=2)
    rho = np.array(best["rho"], dtype=float)
    trend = None
    if J >= 2:
        try:
            trend = linear_regression(np.column_stack([np.arange(1, J + 1), rho]))
        except DegenerateInput:
            trend = None
    return FitResult(rho, best["loss"], trend, count[0], exhausted, initial_loss)


class ScheduleFitter(BaseEstimator):
    """Estimator wrapper around :func:`fit_schedule`.

    ``fit`` takes an :class:`ObservationPanel`; ``predict`` returns simulated
    opinions at the requested snapshot steps under the fitted pressures and
    ``score`` is the negative loss, so the fitter plugs into
    ``sklearn.model_selection`` utilities that only need those methods.

    Parameters
    ----------
    graph : WeightedGraph
    profile : AgentProfile
    init : array-like or None
        Starting pressure per interval (default all ones).
    budget : int
        Maximum number of loss evaluations.
    norm : {"l2", "sup"}
        Per-snapshot distance.
    x0 : array-like or None
        Initial opinions; defaults to the first snapshot.
    """

    def __init__(self, graph=None, profile=None, init=None, budget=2000, norm="l2", x0=None):
        self.graph = graph
        self.profile = profile
        self.init = init
        self.budget = budget
        self.norm = norm
        self.x0 = x0

    def fit(self, panel: ObservationPanel, y=None):
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {sorted(NORMS)}")
        result = fit_schedule(self.graph, self.profile, panel, init=self.init,
                              budget=self.budget, x0=self.x0, norm=self.norm)
        self.result_ = result
        self.rho_ = result.rho
        self.loss_ = result.loss
        self.trend_ = result.trend
        self.n_evaluations_ = result.evaluations
        self.x0_ = panel.opinions[0] if self.x0 is None else np.asarray(self.x0, dtype=float)
        self.ks_ = panel.ks
        return self

    def _check_fitted(self):
        if not hasattr(self, "rho_"):
            raise NotFittedError("ScheduleFitter is not fitted yet")

    def predict(self, panel_or_ks=None) -> np.ndarray:
        self._check_fitted()
        if panel_or_ks is None:
            ks = self.ks_
        elif isinstance(panel_or_ks, ObservationPanel):
            ks = panel_or_ks.ks
        else:
            ks = np.asarray(panel_or_ks, dtype=int)
        if not np.array_equal(interval_bounds(ks), interval_bounds(self.ks_)):
            raise DimensionMismatch("snapshot steps differ from the fitted panel")
        return simulate_panel(self.graph, self.profile, ks, self.rho_, self.x0_)

    def score(self, panel: ObservationPanel, y=None) -> float:
        self._check_fitted()
        return -fit_loss(self.graph, self.profile, panel, self.rho_, self.x0_, self.norm)


def read_panel(path) -> ObservationPanel:
    """Read a ``k,agent_id,opinion`` CSV."""
    ks, X = read_states_csv(path)
    return ObservationPanel(ks, X)


def write_panel(panel: ObservationPanel, path) -> None:
    write_states_csv(path, panel.ks, panel.opinions)
