"""Propagation speed of the coupled DE wave.

``T_I`` is the smallest ``T`` such that ``x^(t+T)_z <= x^(t)_{z-I}`` on the
interior window, maximized over a span of reference iterations ``t``; then
``v_I = I / T_I``.  The comparison is monotone in ``T`` because every
``x_z`` decreases with ``t``, so the first hit while streaming forward is
the minimum.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import de_core
from .coupled_de import (
    COMPARE_TOL,
    ChainTooShortError,
    CoupledConfig,
    DensityProfile,
    WaveFormation,
    front_position,
    run_until_wave_formed,
    trajectory,
)
from .ensemble import DegreeDistribution
from .potential import potential_coupled_gradient, _check_nodes

log = logging.getLogger(__name__)

REF_SPAN = 32
TAIL_TOL = 1e-8
SEPARATION_TOL = 1e-6
MAX_SHIFT_TIME = 2_000_000
CHUNK = 256


class WaveNotFormedError(RuntimeError):
    pass


class OverlappingWavesError(RuntimeError):
    def __init__(self, msg: str, plateau_width: int):
        super().__init__(msg)
        self.plateau_width = plateau_width


@dataclass(frozen=True)
class WaveMode:
    kind: str  # "single_wave" or "two_wave"
    points: de_core.FixedPointSet
    s1: Optional[float] = None
    s2: Optional[float] = None
    u1: Optional[float] = None
    u2: Optional[float] = None


@dataclass(frozen=True)
class SpeedReport:
    I: int
    T_I: int
    mode: str = "single_wave"
    v_upper: Optional[float] = None
    v_lower: Optional[float] = None

    @property
    def v_I(self) -> float:
        return self.I / self.T_I


@dataclass
class AlphaEstimate:
    alpha: float
    max_ratio: float
    ratios: np.ndarray = field(repr=False)
    remainders: np.ndarray = field(repr=False)


def classify_wave_mode(dd: DegreeDistribution, epsilon: float) -> WaveMode:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fps = de_core.find_fixed_points(dd, epsilon)
    n = len(fps)
    xs = fps.xs
    if n > 5:
        raise ValueError(f"unsupported fixed-point structure: {n} fixed points at eps={epsilon}")
    if n == 5:
        return WaveMode("two_wave", fps, s1=xs[2], s2=xs[4], u1=xs[1], u2=xs[3])
    if n == 3:
        return WaveMode("single_wave", fps)
    raise ValueError(f"no wave-like solution: {n} fixed point(s) at eps={epsilon}")


def _check_tail(cfg: CoupledConfig, row: np.ndarray, plateau: float, tail_tol: float):
    z = cfg.N_prime - 2 * cfg.w - 1
    if row[z] < plateau - tail_tol:
        raise ChainTooShortError(
            f"profile at z={z + 1} is {plateau - row[z]:.2e} below the plateau; extend N_prime"
        )


def shift_times(cfg: CoupledConfig, start: DensityProfile, I: int, ref_span: int = REF_SPAN,
                transform: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                plateau: Optional[float] = None, tail_tol: float = TAIL_TOL,
                tol: float = COMPARE_TOL, max_T: int = MAX_SHIFT_TIME) -> np.ndarray:
    """Minimal ``T`` for each reference iteration ``start.t .. start.t + ref_span - 1``.

    ``transform`` is applied to every profile before comparing (used to
    isolate one wave of a two-wave solution).
    """
    if I < 1:
        raise ValueError("I must be >= 1")
    w, n = cfg.w, cfg.N_prime
    lo, hi = 2 * w + I, n - 2 * w
    if hi - lo < 1:
        raise ChainTooShortError(f"no interior window for I={I} at N'={n}; extend N_prime")
    if plateau is None:
        plateau = float(start.x[-1])
    f = transform or (lambda a: a)

    refs = np.empty((ref_span, hi - lo))
    ref_t = np.arange(ref_span)
    found = np.zeros(ref_span, dtype=np.int64)
    cur = start
    refs[0] = f(start.x)[lo - I:hi - I]
    s = 0  # iterations after start
    while (found == 0).any():
        if s >= max_T + ref_span:
            raise RuntimeError(f"no {I}-position shift within {max_T} iterations")
        rows = trajectory(cfg, cur, CHUNK)
        for row in rows:
            s += 1
            _check_tail(cfg, row, plateau, tail_tol)
            fr = f(row)
            if s < ref_span:
                refs[s] = fr[lo - I:hi - I]
            active = (found == 0) & (ref_t < s)
            if active.any():
                idx = np.nonzero(active)[0]
                ok = np.all(fr[lo:hi] <= refs[idx] + tol, axis=1)
                found[idx[ok]] = s - ref_t[idx[ok]]
        cur = DensityProfile(rows[-1], cur.t + rows.shape[0])
    return found


def form_wave(cfg: CoupledConfig, **kw) -> WaveFormation:
    wf = run_until_wave_formed(cfg, **kw)
    if not wf.formed:
        raise WaveNotFormedError(
            f"wave not formed at eps={cfg.epsilon} (x_BP={wf.x_bp:.4g}, t={wf.profile.t})"
        )
    return wf


def measure_speed(cfg: CoupledConfig, I: int, formed: DensityProfile | WaveFormation | None = None,
                  ref_span: int = REF_SPAN) -> SpeedReport:
    """``T_I`` and ``v_I`` of a formed single wave."""
    if formed is None:
        formed = form_wave(cfg)
    if isinstance(formed, WaveFormation):
        if not formed.formed:
            raise WaveNotFormedError("wave not formed")
        formed = formed.profile
    T = shift_times(cfg, formed, I, ref_span)
    return SpeedReport(I, int(T.max()))


def auto_length(w: int, I_max: int = 20) -> int:
    """Initial one-sided chain length for a speed measurement."""
    return max(4 * w, 16 * w + 2 * I_max + 80)


def speeds(dd: DegreeDistribution, epsilon: float, w: int, I_values: Sequence[int] = (1, 20),
           N_prime: Optional[int] = None, retries: int = 3, ref_span: int = REF_SPAN):
    """Form a wave and measure ``T_I`` for several ``I``, doubling ``N'`` on failure.

    Just above the BP threshold the profile approaches ``x_BP`` slowly and
    needs a long chain, hence several retries by default.

    Returns ``(cfg, formation, {I: SpeedReport})``.
    """
    n = N_prime or auto_length(w, max(I_values))
    for attempt in range(retries + 1):
        cfg = CoupledConfig(dd, n, w, epsilon)
        try:
            wf = form_wave(cfg)
            out = {I: measure_speed(cfg, I, wf, ref_span) for I in I_values}
            return cfg, wf, out
        except ChainTooShortError:
            if attempt == retries:
                raise
            log.info("chain too short at N'=%d; retrying with %d", n, 2 * n)
            n *= 2
    raise AssertionError("unreachable")


# two-wave -------------------------------------------------------------------

def plateau_width(x: np.ndarray, level: float, tol: float = SEPARATION_TOL) -> int:
    """Longest run of consecutive positions with ``|x_z - level| < tol``."""
    hit = np.abs(x - level) < tol
    best = run = 0
    for h in hit:
        run = run + 1 if h else 0
        best = max(best, run)
    return best


def separate_waves(cfg: CoupledConfig, mode: WaveMode, separation_tol: float = SEPARATION_TOL,
                   max_iters: int = 500_000) -> DensityProfile:
    """Advance a formed two-wave solution until an ``s1`` plateau of ``2w`` positions exists."""
    wf = form_wave(cfg)
    prof = wf.profile
    need = 2 * cfg.w
    level = 0.5 * (mode.s2 + mode.s1)
    while True:
        width = plateau_width(prof.x, mode.s1, separation_tol)
        if width >= need:
            return prof
        if prof.t >= max_iters:
            raise OverlappingWavesError(
                f"no s1 plateau of {need} positions after {prof.t} iterations", width)
        rows = trajectory(cfg, prof, CHUNK)
        if front_position(rows[-1], level) > cfg.N_prime - 2 * cfg.w:
            raise OverlappingWavesError(
                f"upper wave reached the boundary before separating (plateau width {width})", width)
        prof = DensityProfile(rows[-1], prof.t + rows.shape[0])


def measure_two_wave_speeds(cfg: CoupledConfig, I: int = 1, mode: Optional[WaveMode] = None,
                            start: Optional[DensityProfile] = None,
                            separation_tol: float = SEPARATION_TOL,
                            ref_span: int = REF_SPAN,
                            cuts: Optional[tuple[float, float]] = None) -> SpeedReport:
    """Speeds of the upper (s2 -> s1) and lower (s1 -> 0) waves separately.

    Each wave is isolated by clipping the profile before the shift
    comparison: from below at ``s1 + 2*separation_tol`` for the upper wave and
    from above at ``s1 - 2*separation_tol`` for the lower one.  The plateau
    between the waves crosses ``s1`` and lengthens over time, so a cut inside
    the plateau band mixes the two speeds.  ``cuts = (upper, lower)``
    overrides both.
    """
    mode = mode or classify_wave_mode(cfg.dd, cfg.epsilon)
    if mode.kind != "two_wave":
        raise ValueError("measure_two_wave_speeds needs a two-wave regime")
    if start is None:
        start = separate_waves(cfg, mode, separation_tol)
    elif plateau_width(start.x, mode.s1, separation_tol) < 2 * cfg.w:
        raise OverlappingWavesError("start profile has no s1 plateau",
                                    plateau_width(start.x, mode.s1, separation_tol))
    margin = 2.0 * separation_tol
    up_cut, lo_cut = cuts or (mode.s1 + margin, mode.s1 - margin)
    T_up = shift_times(cfg, start, I, ref_span, transform=lambda a: np.maximum(a, up_cut))
    T_lo = shift_times(cfg, start, I, ref_span, transform=lambda a: np.minimum(a, lo_cut))
    v_up, v_lo = I / int(T_up.max()), I / int(T_lo.max())
    return SpeedReport(I, int(max(T_up.max(), T_lo.max())), "two_wave", v_up, v_lo)


# alpha ----------------------------------------------------------------------

def _coupled_terms(dd, x, epsilon, w):
    """Per-position summands of the coupled potential (left part, check part)."""
    y = 1.0 - x
    single = (1.0 - dd.R(y)) / dd.R_prime_1 - x * dd.rho(y)
    return single, epsilon / dd.L_prime_1 * dd.L(_check_nodes(dd, x, w))


def potential_coupled_difference(dd, x_new, x_old, epsilon, w) -> float:
    """``U(x_new) - U(x_old)`` summed termwise to limit cancellation."""
    a1, b1 = _coupled_terms(dd, np.asarray(x_new), epsilon, w)
    a0, b0 = _coupled_terms(dd, np.asarray(x_old), epsilon, w)
    return float(np.sum(a1 - a0) - np.sum(b1 - b0))


def estimate_alpha(cfg: CoupledConfig, formed: DensityProfile, n_steps: int = 50,
                   stall_tol: float = 1e-14) -> AlphaEstimate:
    """Empirical first-order dominance factor over ``n_steps`` DE steps.

    For every step, ``ratio = dU1 / dU`` with ``dU1`` the gradient term and
    ``dU`` the exact change of the coupled potential.  The certified value is
    ``max(1, max ratio)``; the remainders ``dU - dU1`` are returned as well.
    """
    if n_steps < 10:
        raise ValueError("n_steps must be >= 10")
    dd, eps, w = cfg.dd, cfg.epsilon, cfg.w
    rows = np.vstack([formed.x, trajectory(cfg, formed, n_steps)])
    ratios = np.empty(n_steps)
    rem = np.empty(n_steps)
    for k in range(n_steps):
        x0, x1 = rows[k], rows[k + 1]
        du1 = float(potential_coupled_gradient(dd, x0, eps, w) @ (x1 - x0))
        du = potential_coupled_difference(dd, x1, x0, eps, w)
        if abs(du) < stall_tol:
            raise RuntimeError(f"stalled wave: potential change {du:.3e} at step {k}")
        ratios[k] = du1 / du
        rem[k] = du - du1
    mx = float(ratios.max())
    return AlphaEstimate(max(1.0, mx), mx, ratios, rem)
