"""Dense linear-algebra kernel: SPD solves, rank-one updates, norms, regression."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from .exceptions import DegenerateInput, NoConvergence, NotPositiveDefinite, SingularUpdate
from .validation import check_square, check_symmetric, check_vector

__all__ = [
    "RegressionLine",
    "cholesky_factor",
    "solve_spd",
    "rank_one_update_solve",
    "operator_norm",
    "linear_regression",
]

NORM_RTOL = 1e-9
NORM_MAX_ITER = 10_000
SINGULAR_DENOM = 1e-12


@dataclass(frozen=True)
class RegressionLine:
    slope: float
    intercept: float
    r_squared: float

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r_squared}


def cholesky_factor(M):
    """Cholesky factor of a symmetric matrix; raises if it is not PD."""
    M = check_symmetric(M)
    try:
        return cho_factor(M, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def solve_spd(M, b) -> np.ndarray:
    """Solve ``M x = b`` for symmetric positive definite ``M``.

    The factorization doubles as the definiteness test, so a singular or
    indefinite ``M`` raises :class:`NotPositiveDefinite` instead of
    returning garbage.
    """
    factor = cholesky_factor(M)
    b = check_vector(b, factor[0].shape[0], "b")
    return cho_solve(factor, b, check_finite=False)


def rank_one_update_solve(M, s: float, v, b) -> np.ndarray:
    """Solve ``(M + s v v^T) x = b`` by Sherman-Morrison.

    Only solves against ``M`` are performed: with ``y = M^-1 b`` and
    ``z = M^-1 v``::

        x = y - s (v.y) / (1 + s v.z) * z

    ``M`` must be symmetric and invertible (PD matrices are factored by
    Cholesky, anything else by LU) and ``v`` a unit vector.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    v = check_vector(v, n, "v")
    b = check_vector(b, n, "b")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("v must be a unit vector")
    rhs = np.column_stack([b, v])
    try:
        yz = cho_solve(cho_factor(M, lower=True, check_finite=False), rhs, check_finite=False)
    except LinAlgError:
        lu = lu_factor(M, check_finite=False)
        if np.any(np.diag(lu[0]) == 0.0):
            raise SingularUpdate("M is singular") from None
        yz = lu_solve(lu, rhs, check_finite=False)
    y, z = yz[:, 0], yz[:, 1]
    denom = 1.0 + s * float(v @ z)
    if abs(denom) < SINGULAR_DENOM:
        raise SingularUpdate(f"1 + s v^T M^-1 v = {denom:.3g}")
    return y - (s * float(v @ y) / denom) * z


def operator_norm(M) -> float:
    """Spectral norm by power iteration on ``M^T M``.

    Starts from the all-ones vector with a small deterministic ramp added,
    stops when successive estimates agree to a relative ``1e-9``.
    """
    M = check_square(M)
    n = M.shape[0]
    scale = float(np.abs(M).max())
    if scale == 0.0:
        return 0.0
    # iterate on a unit-scale copy so tiny or huge entries cannot under/overflow
    M = M / scale
    v = np.ones(n) + 1e-3 * np.arange(1, n + 1) / n
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(NORM_MAX_ITER):
        Mv = M @ v
        w = M.T @ Mv
        new_sigma = float(np.sqrt(Mv @ Mv))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space of M^T M; nudge and retry
            v = np.roll(v, 1) + 1e-3
            v /= np.linalg.norm(v)
            continue
        if abs(new_sigma - sigma) <= NORM_RTOL * new_sigma:
            # one more Rayleigh step makes the returned value a tight lower bound
            v = w / nw
            Mv = M @ v
            return scale * max(new_sigma, float(np.sqrt(Mv @ Mv)))
        sigma = new_sigma
        v = w / nw
    raise NoConvergence(f"power iteration did not settle in {NORM_MAX_ITER} iterations")


def linear_regression(points) -> RegressionLine:
    """Ordinary least-squares line through ``(x, y)`` pairs, with r^2."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegenerateInput("need at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        raise DegenerateInput("all x values are equal")
    slope = float(((x - xm) * (y - ym)).sum()) / sxx
    intercept = float(ym - slope * xm)
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - (slope * x + intercept)) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return RegressionLine(slope, intercept, min(1.0, max(0.0, r2)))
