"""Density evolution of the uncoupled ensemble on the BEC.

The recursion is ``x <- eps * lambda(1 - rho(1 - x))`` started from ``x = 1``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .ensemble import DegreeDistribution

log = logging.getLogger(__name__)

DE_TOL = 1e-12
DE_MAX_ITERS = 50_000
ZERO_LEVEL = 1e-10
GRID_SIZE = 10_000
ROOT_TOL = 1e-12

Stability = Literal["stable", "unstable"]


class DEConvergenceError(RuntimeError):
    """Forward DE did not settle within ``max_iters``; carries the last iterate."""

    def __init__(self, msg: str, last: float):
        super().__init__(msg)
        self.last = last


@dataclass(frozen=True)
class FixedPointSet:
    epsilon: float
    points: tuple[tuple[float, Stability], ...]

    @property
    def xs(self) -> np.ndarray:
        return np.array([p for p, _ in self.points])

    @property
    def stable(self) -> list[float]:
        return [p for p, s in self.points if s == "stable"]

    @property
    def unstable(self) -> list[float]:
        return [p for p, s in self.points if s == "unstable"]

    def __len__(self) -> int:
        return len(self.points)


def de_step_single(dd: DegreeDistribution, epsilon: float, x):
    """One step of the uncoupled recursion; vectorized over ``x``."""
    return epsilon * dd.lam(1.0 - dd.rho(1.0 - np.asarray(x, dtype=np.float64)))


def de_map_derivative(dd: DegreeDistribution, epsilon: float, x):
    """d/dx of ``eps * lambda(1 - rho(1 - x))``."""
    x = np.asarray(x, dtype=np.float64)
    return epsilon * dd.lam_prime(1.0 - dd.rho(1.0 - x)) * dd.rho_prime(1.0 - x)


def fixed_point_residual(dd, epsilon, x):
    """``g(x) = eps*lambda(1-rho(1-x)) - x``; zero exactly at DE fixed points."""
    return de_step_single(dd, epsilon, x) - x


def forward_de_limit(dd: DegreeDistribution, epsilon: float, tol: float = DE_TOL,
                     max_iters: int = DE_MAX_ITERS) -> float:
    """Iterate from ``x = 1`` until successive iterates differ by less than ``tol``.

    Raises:
        DEConvergenceError: if ``max_iters`` steps do not reach ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lam, rho = dd.lam, dd.rho
    x = 1.0
    for _ in range(max_iters):
        nxt = epsilon * lam(1.0 - rho(1.0 - x))
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    raise DEConvergenceError(
        f"forward DE at eps={epsilon} not converged after {max_iters} iterations", x
    )


def _decays_to_zero(dd, epsilon, max_iters=DE_MAX_ITERS, level=ZERO_LEVEL) -> bool:
    lam, rho = dd.lam, dd.rho
    x = 1.0
    for _ in range(max_iters):
        x = epsilon * lam(1.0 - rho(1.0 - x))
        if x < level:
            return True
    return False


def _bisect_root(f, a, b, fa, tol=ROOT_TOL):
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def find_fixed_points(dd: DegreeDistribution, epsilon: float, grid_size: int = GRID_SIZE) -> FixedPointSet:
    """All roots of ``eps*lambda(1-rho(1-x)) - x`` on ``[0, 1]``.

    Sign changes are located on a uniform grid and refined by bisection; a
    point is stable when the DE map has slope below one there.
    """
    if grid_size < 1000:
        raise ValueError("grid_size must be >= 1000")
    grid = np.linspace(0.0, 1.0, grid_size + 1)
    g = fixed_point_residual(dd, epsilon, grid)
    f = lambda x: float(fixed_point_residual(dd, epsilon, x))

    roots = [0.0]
    # skip x=0 itself: it is always a root because lambda(0)=0
    s = np.sign(g[1:])
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0] + 1
    exact = np.nonzero(g[2:] == 0.0)[0] + 2
    for i in idx:
        roots.append(_bisect_root(f, grid[i], grid[i + 1], g[i]))
    for i in exact:
        roots.append(float(grid[i]))
    roots = sorted(set(roots))

    h = 1.0 / grid_size
    for a, b in zip(roots, roots[1:]):
        if b - a < 2 * h:
            warnings.warn(
                f"fixed points {a:.6g} and {b:.6g} closer than two grid cells; increase grid_size",
                RuntimeWarning,
                stacklevel=2,
            )

    points = []
    for r in roots:
        slope = float(de_map_derivative(dd, epsilon, r))
        points.append((float(r), "stable" if slope < 1.0 else "unstable"))
    return FixedPointSet(float(epsilon), tuple(points))


def bp_threshold(dd: DegreeDistribution, tol: float = 1e-6, max_iters: int = DE_MAX_ITERS) -> float:
    """Largest erasure probability for which forward DE decays to zero (bisection)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 0.0, 1.0
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if _decays_to_zero(dd, mid, max_iters):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_point_count_transition(dd: DegreeDistribution, lo: float, hi: float, count: int = 5,
                                 tol: float = 1e-6, grid_size: int = GRID_SIZE) -> float:
    """Smallest eps in ``[lo, hi]`` at which at least ``count`` fixed points exist.

    Assumes the count is monotone across the bracket, as it is for the
    three-to-five transition of ensembles with two stable nonzero points.
    """
    n = lambda e: len(find_fixed_points(dd, e, grid_size))
    if n(hi) < count:
        raise ValueError(f"fewer than {count} fixed points at eps={hi}")
    if n(lo) >= count:
        return lo
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if n(mid) >= count:
                hi = mid
            else:
                lo = mid
    return 0.5 * (lo + hi)


def x_bp(dd: DegreeDistribution, epsilon: float) -> float:
    """Forward DE fixed point, refined to the exact root of the residual."""
    x = forward_de_limit(dd, epsilon)
    if x == 0.0 or x < ZERO_LEVEL:
        return 0.0
    fps = find_fixed_points(dd, epsilon)
    nonzero = [p for p, s in fps.points if p > 0 and s == "stable"]
    if not nonzero:
        return x
    return min(nonzero + [1.0], key=lambda p: abs(p - x))
