"""Upper and lower bounds on the wave speed ``v_1``.

* ``B1``: alpha U(x_BP) over the weighted squared increments of a formed profile.
* ``B2``: closed form in ``U(x_u)`` and ``U(x_BP)``, linear in ``w``; the
  finite-``w`` variant keeps the ``D x_BP^2 / w`` correction.
* ``LB``: closed-form lower bound, in two variants (see :func:`bound_LB`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from . import de_core
from .coupled_de import CoupledConfig, DensityProfile
from .ensemble import DegreeDistribution
from .potential import max_abs_second_derivative, potential_single

LBVariant = Literal["as_tabulated", "as_stated"]
DEGENERATE_TOL = 1e-14


class VacuousBoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundsReport:
    B1: float
    B2: float
    B2_finite_w: Optional[float]
    LB: float
    alpha: float
    D: float
    lb_variant: str = "as_tabulated"


def _check_alpha(alpha: float):
    if not 1.0 <= alpha <= 2.0:
        raise ValueError(f"alpha={alpha} outside [1, 2]")


def _three_points(dd: DegreeDistribution, epsilon: float) -> tuple[float, float]:
    """``(x_u, x_BP)``: the largest unstable point and the forward DE limit."""
    xbp = de_core.x_bp(dd, epsilon)
    if xbp == 0.0:
        raise ValueError(f"eps={epsilon} is below the BP threshold; no wave")
    fps = de_core.find_fixed_points(dd, epsilon)
    us = [p for p in fps.unstable if p < xbp]
    if not us:
        raise ValueError(f"no unstable fixed point below x_BP at eps={epsilon}")
    return us[-1], xbp


def weighted_increments(dd: DegreeDistribution, x: np.ndarray) -> np.ndarray:
    """``rho'(1 - x_z) (x_z - x_{z-1})^2`` for z = 1..N' with ``x_0 = 0``."""
    x = np.asarray(x, dtype=np.float64)
    d = np.diff(np.concatenate([[0.0], x]))
    return dd.rho_prime(1.0 - x) * d * d


def bound_B1(cfg: CoupledConfig, formed: DensityProfile, alpha: float = 1.0,
             x_bp: Optional[float] = None) -> float:
    """Profile-based upper bound on ``v_1``.

    In the two-wave regime the same expression bounds the slower, lower wave.
    """
    _check_alpha(alpha)
    if x_bp is None:
        x_bp = de_core.x_bp(cfg.dd, cfg.epsilon)
    den = float(weighted_increments(cfg.dd, formed.x).sum())
    if den < DEGENERATE_TOL:
        raise ValueError(f"degenerate profile: increment sum {den:.3e}")
    return alpha * potential_single(cfg.dd, cfg.epsilon, x_bp) / den


def bound_B1_per_wave(cfg: CoupledConfig, formed: DensityProfile, s1: float, s2: float,
                      alpha: float = 1.0) -> tuple[float, float]:
    """``(upper, lower)`` wave bounds from splitting the increment sum at ``s1``."""
    _check_alpha(alpha)
    x = formed.x
    inc = weighted_increments(cfg.dd, x)
    up, low = inc[x > s1].sum(), inc[(x > 0) & (x <= s1)].sum()
    if min(up, low) < DEGENERATE_TOL:
        raise ValueError("degenerate profile: one of the waves has no increments")
    U = lambda v: potential_single(cfg.dd, cfg.epsilon, v)
    return alpha * (U(s2) - U(s1)) / up, alpha * U(s1) / low


def bound_B2(dd: DegreeDistribution, epsilon: float, w: int, alpha: float = 1.0,
             include_D_term: bool = False, D: Optional[float] = None) -> float:
    _check_alpha(alpha)
    xu, xbp = _three_points(dd, epsilon)
    ubp = potential_single(dd, epsilon, xbp)
    den = 2.0 * potential_single(dd, epsilon, xu) - ubp
    if include_D_term:
        if D is None:
            D = max_abs_second_derivative(dd, epsilon, xbp)
        den -= D * xbp * xbp / w
        if den <= 0:
            raise VacuousBoundError(f"bound vacuous at this w={w}: denominator {den:.3e}")
    elif den <= 0:
        raise VacuousBoundError(f"non-positive denominator {den:.3e}")
    return w * alpha * ubp / den


def bound_LB(dd: DegreeDistribution, epsilon: float, w: int,
             formula_variant: LBVariant = "as_tabulated") -> float:
    """Lower bound on ``v_1``.

    ``as_tabulated`` uses ``1 - rho(1 - x_BP)`` in the denominator and no
    ``1/w`` correction; ``as_stated`` uses ``1 - rho(x_BP)`` and subtracts ``1/w``.
    """
    xbp = de_core.x_bp(dd, epsilon)
    if xbp == 0.0:
        raise ValueError(f"eps={epsilon} is below the BP threshold; no wave")
    ubp = potential_single(dd, epsilon, xbp)
    if formula_variant == "as_tabulated":
        return w * ubp / (xbp * (1.0 - dd.rho(1.0 - xbp)))
    if formula_variant == "as_stated":
        return w * ubp / (xbp * (1.0 - dd.rho(xbp))) - 1.0 / w
    raise ValueError(f"unknown LB variant {formula_variant!r}")


def compute_bounds(cfg: CoupledConfig, formed: DensityProfile, alpha: float = 1.0,
                   lb_variant: LBVariant = "as_tabulated") -> BoundsReport:
    dd, eps, w = cfg.dd, cfg.epsilon, cfg.w
    xbp = de_core.x_bp(dd, eps)
    D = max_abs_second_derivative(dd, eps, xbp)
    try:
        b2f = bound_B2(dd, eps, w, alpha, include_D_term=True, D=D)
    except VacuousBoundError:
        b2f = None
    return BoundsReport(
        B1=bound_B1(cfg, formed, alpha, xbp),
        B2=bound_B2(dd, eps, w, alpha),
        B2_finite_w=b2f,
        LB=bound_LB(dd, eps, w, lb_variant),
        alpha=alpha,
        D=D,
        lb_variant=lb_variant,
    )
