"""One-sided coupled density evolution on the BEC.

Positions are ``z = 1..N'``; arrays are 0-based, so ``x[z - 1]`` holds
``x_z``.  Reads left of the chain see zero erasure (and ``eps_z = 0``), reads
right of ``N'`` see ``x_N'``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import de_core, kernels
from .ensemble import DegreeDistribution, edge_degree_arrays

log = logging.getLogger(__name__)

SHAPE_TOL = 1e-9
COMPARE_TOL = 1e-12
STABLE_CHECKS = 3
FORM_MAX_ITERS = 200_000


class ChainTooShortError(RuntimeError):
    """The wave reached the clamped right end before it could be used."""


@dataclass(frozen=True)
class CoupledConfig:
    dd: DegreeDistribution
    N_prime: int
    w: int
    epsilon: float
    _kern: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.w < 2:
            raise ValueError(f"coupling factor w={self.w} must be >= 2")
        if self.N_prime < 4 * self.w:
            raise ValueError(f"N'={self.N_prime} must be at least 4w={4 * self.w}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon={self.epsilon} outside [0, 1]")
        lam = edge_degree_arrays(self.dd.L_coeffs, self.dd.L_prime_1)
        rho = edge_degree_arrays(self.dd.R_coeffs, self.dd.R_prime_1)
        object.__setattr__(self, "_kern", (*lam, *rho))

    @classmethod
    def from_N(cls, dd, N: int, w: int, epsilon: float) -> "CoupledConfig":
        """Config for the one-sided half of a chain with ``2N`` variable positions."""
        return cls(dd, N + (w - 1) // 2, w, epsilon)

    def with_length(self, N_prime: int) -> "CoupledConfig":
        return CoupledConfig(self.dd, N_prime, self.w, self.epsilon)


@dataclass(frozen=True)
class DensityProfile:
    x: np.ndarray
    t: int = 0

    def __post_init__(self):
        arr = np.asarray(self.x, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "x", arr)

    def __len__(self) -> int:
        return self.x.size

    def at(self, z: int) -> float:
        """``x_z`` with the one-sided boundary convention, 1-based."""
        if z <= 0:
            return 0.0
        return float(self.x[min(z, self.x.size) - 1])

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.x) >= -tol))


def init_profile(cfg: CoupledConfig) -> DensityProfile:
    return DensityProfile(np.ones(cfg.N_prime), 0)


def coupled_de_step(cfg: CoupledConfig, profile: DensityProfile) -> DensityProfile:
    nxt = kernels.coupled_de_trajectory(np.ascontiguousarray(profile.x), cfg.w, cfg.epsilon,
                                        *cfg._kern, 1)[0]
    return DensityProfile(nxt, profile.t + 1)


def advance(cfg: CoupledConfig, profile: DensityProfile, n_steps: int) -> DensityProfile:
    if n_steps <= 0:
        return profile
    x = kernels.coupled_de_advance(np.ascontiguousarray(profile.x), cfg.w, cfg.epsilon,
                                   *cfg._kern, n_steps)
    return DensityProfile(x, profile.t + n_steps)


def trajectory(cfg: CoupledConfig, profile: DensityProfile, n_steps: int) -> np.ndarray:
    """Profiles after 1..n_steps further iterations, stacked as rows."""
    return kernels.coupled_de_trajectory(np.ascontiguousarray(profile.x), cfg.w, cfg.epsilon,
                                         *cfg._kern, n_steps)


def front_position(x: np.ndarray, level: float) -> float:
    """Fractional 1-based position where a nondecreasing profile crosses ``level``."""
    i = int(np.searchsorted(x, level))
    if i == 0:
        return 1.0
    if i >= x.size:
        return float(x.size + 1)
    a, b = x[i - 1], x[i]
    return i + (level - a) / (b - a) if b > a else float(i + 1)


def shift_time(history: np.ndarray, ref: np.ndarray, shift: int, lo: int, hi: int,
               tol: float = COMPARE_TOL) -> Optional[int]:
    """First row ``k`` of ``history`` with ``history[k][z] <= ref[z - shift]`` on ``[lo, hi)``.

    ``lo``/``hi`` are 0-based array indices.  Returns the 1-based step count, or
    None when no row qualifies.
    """
    cmp = np.all(history[:, lo:hi] <= ref[lo - shift:hi - shift] + tol, axis=1)
    hits = np.nonzero(cmp)[0]
    return int(hits[0]) + 1 if hits.size else None


class Trajectory:
    """Consecutive DE profiles starting at iteration ``t0``, extended on demand.

    Only the most recent ``capacity`` profiles are retained.
    """

    def __init__(self, cfg: CoupledConfig, start: DensityProfile, capacity: int = 64):
        self.cfg = cfg
        self.t0 = start.t
        self.capacity = max(int(capacity), 64)
        self._buf: deque[np.ndarray] = deque([start.x], maxlen=self.capacity)
        self._t_last = start.t

    @property
    def t_last(self) -> int:
        return self._t_last

    @property
    def t_first(self) -> int:
        return self._t_last - len(self._buf) + 1

    def last(self) -> DensityProfile:
        return DensityProfile(self._buf[-1], self._t_last)

    def extend(self, n_steps: int) -> np.ndarray:
        rows = trajectory(self.cfg, self.last(), n_steps)
        self._buf.extend(rows)
        self._t_last += n_steps
        return rows

    def profile(self, t: int) -> DensityProfile:
        if t > self._t_last:
            self.extend(t - self._t_last)
        if t < self.t_first:
            raise IndexError(f"iteration {t} dropped from buffer (oldest kept: {self.t_first})")
        return DensityProfile(self._buf[t - self.t_first], t)

    def window(self, t_from: int, t_to: int) -> np.ndarray:
        """Rows for iterations ``t_from..t_to`` inclusive."""
        if t_to > self._t_last:
            self.extend(t_to - self._t_last)
        if t_from < self.t_first:
            raise IndexError(f"iteration {t_from} dropped from buffer")
        off = self.t_first
        return np.array([self._buf[t - off] for t in range(t_from, t_to + 1)])


class WaveFormation(NamedTuple):
    profile: DensityProfile
    formed: bool
    x_bp: float
    period: Optional[int] = None


def _measure_window(cfg: CoupledConfig) -> tuple[int, int]:
    # 0-based [lo, hi) excluding 2w positions at each boundary
    return 2 * cfg.w, cfg.N_prime - 2 * cfg.w


def run_until_wave_formed(cfg: CoupledConfig, shape_tol: float = SHAPE_TOL,
                          max_iters: int = FORM_MAX_ITERS, x_bp: Optional[float] = None) -> WaveFormation:
    """Iterate from the all-erasure profile until a traveling wave has formed.

    The wave counts as formed when (a) the far end of the chain sits at the
    forward fixed point ``x_BP`` to within ``shape_tol``, (b) the profile has
    detached from the left boundary (``x_w <= shape_tol``), and (c) the
    one-position shift time ``T_1`` has been identical for three consecutive
    checks.  Exact translation after an integer period is not required: it
    does not occur when the speed is irrational.

    Raises:
        ChainTooShortError: the wavefront came within ``2w`` of ``N'`` first.
    """
    w = cfg.w
    if x_bp is None:
        x_bp = de_core.x_bp(cfg.dd, cfg.epsilon)
    prof = init_profile(cfg)
    if x_bp == 0.0:
        while prof.t < max_iters and prof.x.max() >= de_core.ZERO_LEVEL:
            prof = advance(cfg, prof, min(256, max_iters - prof.t))
        return WaveFormation(prof, False, 0.0)

    lo, hi = _measure_window(cfg)
    level = 0.5 * x_bp
    limit = cfg.N_prime - 2 * w
    history: list[int] = []
    hist_len = 64
    while prof.t < max_iters:
        rows = trajectory(cfg, prof, hist_len)
        front = front_position(rows[-1], level)
        if front > limit:
            raise ChainTooShortError(
                f"wavefront at {front:.1f} within 2w of N'={cfg.N_prime} before forming; extend N_prime"
            )
        ref = prof.x
        t1 = shift_time(rows, ref, 1, lo + 1, hi)
        settled = abs(ref[-1] - x_bp) < shape_tol and ref[w - 1] <= shape_tol
        if t1 is None:
            if settled and hist_len < 1 << 16:
                hist_len *= 2  # slow wave: look further ahead
            prof = DensityProfile(rows[-1], prof.t + rows.shape[0])
            history.clear()
            continue
        if settled:
            history.append(t1)
            if len(history) >= STABLE_CHECKS and len(set(history[-STABLE_CHECKS:])) == 1:
                return WaveFormation(prof, True, x_bp, t1)
        else:
            history.clear()
        step = max(t1, 1)
        prof = DensityProfile(rows[step - 1], prof.t + step)
    return WaveFormation(prof, False, x_bp)
