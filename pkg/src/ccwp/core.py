"""Shared constants, error types and the first-order filter used by every
dynamic equation in the plant.

Units throughout the package: temperatures in degC, mass flows in kg/s,
heat rates and electric power in kW, time in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Specific heat of water, kJ/(kg K). With flows in kg/s, c_pw * mdot * dT is in kW.
C_PW = 4.186

#: Smallest flow treated as "flowing"; strict positivity constraints use it.
MDOT_MIN = 1e-6


class CCWPError(Exception):
    """Base class for all model errors."""


class ParameterError(CCWPError, ValueError):
    """Raised for invalid model parameters."""


class FeasibilityError(CCWPError):
    """Raised when a control input violates a feasibility constraint.

    ``violations`` holds one human-readable message per failed constraint.
    """

    def __init__(self, violations, step=None):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        self.step = step
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(prefix + "; ".join(self.violations))


class SolverError(CCWPError):
    """Raised when an optimization subproblem cannot be evaluated."""

    def __init__(self, message, x=None):
        self.x = x
        super().__init__(message if x is None else f"{message} (at x={x!r})")


@dataclass(frozen=True)
class SimConstants:
    c_pw: float = C_PW
    t_s: float = 60.0

    def __post_init__(self):
        if not self.c_pw > 0:
            raise ParameterError(f"c_pw must be positive, got {self.c_pw}")
        if not self.t_s > 0:
            raise ParameterError(f"t_s must be positive, got {self.t_s}")


def check_filter(a: float) -> float:
    if not 0.0 <= a < 1.0:
        raise ParameterError(f"filter coefficient must lie in [0, 1), got {a}")
    return float(a)


def lowpass(a: float, prev: float, target: float) -> float:
    """One step of the discrete first-order filter ``a*prev + (1-a)*target``."""
    return a * prev + (1.0 - a) * target


def filter_from_time_constant(tau: float, t_s: float) -> float:
    """Filter coefficient ``exp(-t_s/tau)`` for a time constant ``tau``.

    ``tau == 0`` means an instantaneous response and gives 0.
    """
    if tau < 0:
        raise ParameterError(f"time constant must be nonnegative, got {tau}")
    if t_s <= 0:
        raise ParameterError(f"sampling period must be positive, got {t_s}")
    if tau == 0:
        return 0.0
    return math.exp(-t_s / tau)


def time_grid(n_steps: int, t_s: float) -> np.ndarray:
    """Integer-second timestamps ``0, t_s, ..., (n_steps-1)*t_s``."""
    return np.arange(n_steps, dtype=np.int64) * int(round(t_s))
