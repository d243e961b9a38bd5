"""Potential functions of the uncoupled and coupled ensembles.

Single system::

    U(x; eps) = (1 - R(1-x)) / R'(1) - x rho(1-x) - eps/L'(1) * L(1 - rho(1-x))

Its stationary points are exactly the DE fixed points, which is what the
speed bounds exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import de_core
from .ensemble import DegreeDistribution

GRID_SIZE = 10_000


@dataclass(frozen=True)
class PotentialCurve:
    epsilon: float
    x: np.ndarray
    U: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.U.tolist()))


def potential_single(dd: DegreeDistribution, epsilon: float, x):
    x = np.asarray(x, dtype=np.float64)
    y = 1.0 - x
    r = dd.rho(y)
    out = (1.0 - dd.R(y)) / dd.R_prime_1 - x * r - epsilon / dd.L_prime_1 * dd.L(1.0 - r)
    return out if out.ndim else float(out)


def potential_derivative(dd: DegreeDistribution, epsilon: float, x):
    """``rho'(1-x) (x - eps lambda(1-rho(1-x)))``."""
    x = np.asarray(x, dtype=np.float64)
    out = dd.rho_prime(1.0 - x) * (x - de_core.de_step_single(dd, epsilon, x))
    return out if out.ndim else float(out)


def potential_second_derivative(dd: DegreeDistribution, epsilon: float, x):
    x = np.asarray(x, dtype=np.float64)
    y = 1.0 - x
    rp = dd.rho_prime(y)
    g = x - epsilon * dd.lam(1.0 - dd.rho(y))
    gp = 1.0 - epsilon * dd.lam_prime(1.0 - dd.rho(y)) * rp
    out = -dd.rho_double_prime(y) * g + rp * gp
    return out if out.ndim else float(out)


def potential_curve(dd: DegreeDistribution, epsilon: float, n_points: int = 1001) -> PotentialCurve:
    x = np.linspace(0.0, 1.0, n_points)
    return PotentialCurve(float(epsilon), x, potential_single(dd, epsilon, x))


def max_abs_second_derivative(dd: DegreeDistribution, epsilon: float, x_hi: float,
                              grid_size: int = GRID_SIZE) -> float:
    """``max |U''(x)|`` over ``(0, x_hi)``: grid scan, then a bounded refinement."""
    if not 0 < x_hi <= 1:
        raise ValueError("x_hi must lie in (0, 1]")
    grid = np.linspace(0.0, x_hi, grid_size + 1)
    vals = np.abs(potential_second_derivative(dd, epsilon, grid))
    i = int(np.argmax(vals))
    best = float(vals[i])
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid_size)]
    if b > a:
        res = minimize_scalar(lambda t: -abs(potential_second_derivative(dd, epsilon, t)),
                              bounds=(a, b), method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def min_potential(dd: DegreeDistribution, epsilon: float, grid_size: int = GRID_SIZE) -> tuple[float, float]:
    """Global minimizer and minimum of ``U(.; eps)`` over ``(0, 1]``.

    Every local minimum on the grid is refined by bisection on ``U'``, so a
    second well (two-minimum potentials) is never missed.
    """
    grid = np.linspace(0.0, 1.0, grid_size + 1)[1:]
    d = potential_derivative(dd, epsilon, grid)
    cands = [grid[-1], grid[int(np.argmin(potential_single(dd, epsilon, grid)))]]
    f = lambda t: float(potential_derivative(dd, epsilon, t))
    for i in np.nonzero((d[:-1] < 0) & (d[1:] >= 0))[0]:
        cands.append(de_core._bisect_root(f, grid[i], grid[i + 1], d[i]))
    vals = [potential_single(dd, epsilon, c) for c in cands]
    k = int(np.argmin(vals))
    return float(cands[k]), float(vals[k])


def area_threshold(dd: DegreeDistribution, tol: float = 1e-6, grid_size: int = GRID_SIZE) -> float:
    """Largest eps with ``U(x; eps) >= 0`` on ``[0, 1]`` (area / Maxwell threshold)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo = de_core.bp_threshold(dd, tol=max(tol, 1e-6))
    lo = max(lo - 10 * tol, 0.0)
    hi = 1.0
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if min_potential(dd, mid, grid_size)[1] >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# coupled potential -----------------------------------------------------------

def _check_nodes(dd, x: np.ndarray, w: int) -> np.ndarray:
    """``c_z = 1 - (1/w) sum_j rho(1 - x_{z+j})`` for z = 1..N', right end clamped."""
    n = x.size
    ext = np.concatenate([x, np.full(w - 1, x[-1])])
    r = dd.rho(1.0 - ext)
    cs = np.concatenate([[0.0], np.cumsum(r)])
    return 1.0 - (cs[w:w + n] - cs[:n]) / w


def potential_coupled(dd: DegreeDistribution, x, epsilon: float, w: int) -> float:
    """Coupled potential of a one-sided profile ``x = (x_1, ..., x_N')``.

    Reads beyond ``N'`` use ``x_N'``; the left boundary needs no reads since
    the sum starts at z = 1.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < w:
        raise ValueError(f"profile length {x.size} shorter than w={w}")
    y = 1.0 - x
    single = (1.0 - dd.R(y)) / dd.R_prime_1 - x * dd.rho(y)
    c = _check_nodes(dd, x, w)
    return float(np.sum(single) - epsilon / dd.L_prime_1 * np.sum(dd.L(c)))


def potential_coupled_gradient(dd: DegreeDistribution, x, epsilon: float, w: int) -> np.ndarray:
    """Exact gradient of :func:`potential_coupled`, clamp multiplicities included."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    c = _check_nodes(dd, x, w)
    lam_c = dd.lam(c)
    acc = np.zeros(n)
    for j in range(w):
        idx = np.minimum(np.arange(n) + j, n - 1)
        np.add.at(acc, idx, lam_c)
    rp = dd.rho_prime(1.0 - x)
    return rp * (x - epsilon * acc / w)
