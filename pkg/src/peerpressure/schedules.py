"""Peer-pressure schedules ``k -> rho(k)``.

Four families, all positive and nondecreasing in ``k >= 1``:

``constant:<rho>``
    ``rho(k) = rho``
``linear:<a>,<b>``
    ``rho(k) = max(1e-6, a*k + b)``, ``a >= 0``. Unbounded when ``a > 0``.
``saturating:<rho0>,<rho_star>,<rate>``
    ``rho(k) = rho_star - (rho_star - rho0) * exp(-rate*k)``
``table:<v1>,<v2>,...``
    ``rho(k) = v_k``, extended by the last value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidSchedule

__all__ = ["PressureSchedule", "RHO_FLOOR", "parse_schedule", "eval_schedule"]

RHO_FLOOR = 1e-6
FAMILIES = ("constant", "linear", "saturating", "table")


@dataclass(frozen=True)
class PressureSchedule:
    family: str
    params: tuple[float, ...]

    def __post_init__(self):
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if not all(math.isfinite(p) for p in params):
            raise InvalidSchedule(f"non-finite schedule parameter in {params}")
        check = getattr(self, f"_check_{self.family}", None)
        if check is None:
            raise InvalidSchedule(f"unknown schedule family {self.family!r}")
        check(params)

    # -- validation per family

    @staticmethod
    def _check_constant(p):
        if len(p) != 1 or p[0] <= 0:
            raise InvalidSchedule("constant schedule needs one positive value")

    @staticmethod
    def _check_linear(p):
        if len(p) != 2:
            raise InvalidSchedule("linear schedule needs slope and intercept")
        if p[0] < 0:
            raise InvalidSchedule("linear schedule must be nondecreasing (slope >= 0)")

    @staticmethod
    def _check_saturating(p):
        if len(p) != 3:
            raise InvalidSchedule("saturating schedule needs rho0, rho_star, rate")
        rho0, rho_star, rate = p
        if rho0 <= 0 or rho_star < rho0 or rate <= 0:
            raise InvalidSchedule("saturating schedule needs 0 < rho0 <= rho_star and rate > 0")

    @staticmethod
    def _check_table(p):
        if not p:
            raise InvalidSchedule("table schedule needs at least one value")
        if min(p) <= 0:
            raise InvalidSchedule("table values must be positive")
        if any(b < a for a, b in zip(p, p[1:])):
            raise InvalidSchedule("table values must be nondecreasing")

    # -- constructors

    @classmethod
    def constant(cls, rho: float) -> "PressureSchedule":
        return cls("constant", (rho,))

    @classmethod
    def linear(cls, a: float, b: float) -> "PressureSchedule":
        return cls("linear", (a, b))

    @classmethod
    def saturating(cls, rho0: float, rho_star: float, rate: float) -> "PressureSchedule":
        return cls("saturating", (rho0, rho_star, rate))

    @classmethod
    def table(cls, values) -> "PressureSchedule":
        return cls("table", tuple(values))

    # -- evaluation

    def __call__(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"schedule is defined for k >= 1, got {k}")
        p = self.params
        if self.family == "constant":
            return p[0]
        if self.family == "linear":
            return max(RHO_FLOOR, p[0] * k + p[1])
        if self.family == "saturating":
            return p[1] - (p[1] - p[0]) * math.exp(-p[2] * k)
        return p[min(k, len(p)) - 1]

    def values(self, k_max: int) -> np.ndarray:
        """``rho(1), ..., rho(k_max)`` as an array."""
        return np.array([self(k) for k in range(1, k_max + 1)])

    @property
    def limit(self) -> float:
        """``lim rho(k)``; ``math.inf`` for unbounded schedules."""
        p = self.params
        if self.family == "constant":
            return p[0]
        if self.family == "linear":
            return math.inf if p[0] > 0 else max(RHO_FLOOR, p[1])
        if self.family == "saturating":
            return p[1]
        return p[-1]

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.limit)

    def to_spec(self) -> str:
        return f"{self.family}:" + ",".join(repr(p) for p in self.params)


def parse_schedule(spec: str) -> PressureSchedule:
    """Parse the ``family:v1,v2,...`` form used on the command line."""
    family, sep, rest = spec.strip().partition(":")
    if not sep or not rest.strip():
        raise InvalidSchedule(f"schedule spec {spec!r} is not of the form family:values")
    try:
        params = tuple(float(v) for v in rest.split(","))
    except ValueError:
        raise InvalidSchedule(f"schedule spec {spec!r} has non-numeric values") from None
    return PressureSchedule(family.strip().lower(), params)


def eval_schedule(sch: PressureSchedule, k: int) -> float:
    return sch(k)
