"""Bounded one-dimensional minimization.

Both equipment subproblems (the chiller evaporator duty and the cooling-tower
range) have a single bounded decision variable once their equality
constraints are substituted, so a dense grid followed by golden-section
refinement around the best cell finds the global minimum reliably and
deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ParameterError, SolverError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ParameterError(f"bracket requires lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class SolverSettings:
    grid_points: int = 257
    refine_tol: float = 1e-7
    max_refine_iters: int = 100

    def __post_init__(self):
        if self.grid_points < 3:
            raise ParameterError("grid_points must be at least 3")
        if not self.refine_tol > 0:
            raise ParameterError("refine_tol must be positive")
        if self.max_refine_iters < 1:
            raise ParameterError("max_refine_iters must be positive")


DEFAULT_SOLVER = SolverSettings()


def _checked(f, x):
    fx = float(f(x))
    if not math.isfinite(fx):
        raise SolverError("objective is not finite", x=x)
    return fx


def _golden(f, a, b, fa, fb, tol, max_iter):
    """Golden-section search on [a, b]; returns the best point seen."""
    best_x, best_f = (a, fa) if fa <= fb else (b, fb)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = _checked(f, c), _checked(f, d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = _checked(f, c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = _checked(f, d)
    for x, fx in sorted(((c, fc), (d, fd))):
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def minimize_scalar(
    f: Callable,
    bracket: Bracket,
    settings: SolverSettings = DEFAULT_SOLVER,
    vectorized: bool = False,
) -> tuple[float, float]:
    """Globally minimize ``f`` over ``[bracket.lo, bracket.hi]``.

    The objective is sampled on a uniform grid of ``settings.grid_points``
    points; the best sample (ties go to the smaller x) is then refined by
    golden-section search over its two neighbouring cells.

    Parameters
    ----------
    f
        Objective. If ``vectorized`` is true it must also accept a numpy
        array and return the elementwise values, which makes the grid pass
        a single call.
    bracket
        Search interval.
    settings
        Grid size and refinement tolerances.

    Returns
    -------
    (x_star, f_star)

    Raises
    ------
    SolverError
        If ``f`` returns a non-finite value anywhere it is evaluated.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    if lo == hi:
        return lo, _checked(f, lo)

    xs = np.linspace(lo, hi, settings.grid_points)
    if vectorized:
        fs = np.asarray(f(xs), dtype=float)
    else:
        fs = np.array([float(f(x)) for x in xs])
    bad = ~np.isfinite(fs)
    if bad.any():
        raise SolverError("objective is not finite", x=float(xs[np.argmax(bad)]))

    i = int(np.argmin(fs))
    best_x, best_f = float(xs[i]), float(fs[i])
    a_i, b_i = max(i - 1, 0), min(i + 1, len(xs) - 1)
    x, fx = _golden(
        f, float(xs[a_i]), float(xs[b_i]), float(fs[a_i]), float(fs[b_i]),
        settings.refine_tol, settings.max_refine_iters,
    )
    if fx < best_f:
        best_x, best_f = x, fx
    return min(max(best_x, lo), hi), best_f


def solve_monotone_threshold(
    g: Callable[[float], float],
    target: float,
    bracket: Bracket,
    tol: float,
) -> float:
    """Largest ``x`` in the bracket with ``g(x) <= target`` for nondecreasing ``g``.

    Returns ``lo`` when even ``g(lo)`` exceeds the target and ``hi`` when the
    whole bracket satisfies it. Otherwise bisects to within ``tol`` and
    returns the feasible end of the final interval.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    if g(lo) > target:
        return lo
    if g(hi) <= target:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo
