"""Wavefront tracking on per-position error traces."""

from __future__ import annotations

from typing import Optional

import numpy as np


class NoFrontError(RuntimeError):
    pass


def front_positions(half: np.ndarray, center_width: Optional[int] = None) -> np.ndarray:
    """0-based front position per iteration of a left-half trace, or -1 if undefined.

    The plateau level is the median of the ``center_width`` positions next to
    the chain center; the front is the first position whose metric exceeds
    half of it.  Positions are made non-decreasing in time (finite-length
    noise can otherwise make the crossing jump back by one).
    """
    T, P = half.shape
    cw = center_width or max(2, P // 10)
    plateau = np.median(half[:, P - cw:], axis=1)
    above = half > 0.5 * plateau[:, None]
    first = np.where(above.any(axis=1), above.argmax(axis=1), -1)
    ok = (plateau > 0) & (first >= 0) & (first < P - cw)
    front = np.where(ok, first, -1)
    # the front is defined only up to the first iteration where it is lost
    bad = np.nonzero(~ok)[0]
    if bad.size:
        front[bad[0]:] = -1
    valid = front >= 0
    front[valid] = np.maximum.accumulate(front[valid])
    return front


def empirical_speed(trace: np.ndarray, I: int, w: int, center_width: Optional[int] = None) -> float:
    """``I`` over the mean of ``T(p)`` across start positions ``p`` in ``[2w, P - 2w - I]``.

    ``T(p)`` is the number of iterations between the front first reaching
    ``p`` and first reaching ``p + I``.  Averaging ``T`` rather than ``I/T``
    keeps a single jump of a noisy front from dominating.  ``trace`` is a
    left-half trace (iterations by positions).

    Raises:
        NoFrontError: no window can be measured.
    """
    if I < 1:
        raise ValueError("I must be >= 1")
    front = front_positions(np.asarray(trace, dtype=np.float64), center_width)
    valid = np.nonzero(front >= 0)[0]
    if valid.size < 2:
        raise NoFrontError("no front")
    f = front[valid]
    P = trace.shape[1]
    cw = center_width or max(2, P // 10)
    lo, hi = 2 * w, min(P - 2 * w, P - cw) - I
    vals = []
    for p in range(lo, hi):
        ia = np.searchsorted(f, p)
        ib = np.searchsorted(f, p + I)
        if ib >= f.size or ia >= f.size:
            break
        vals.append(valid[ib] - valid[ia])
    if not vals or max(vals) == 0:
        raise NoFrontError("no front")
    return float(I / np.mean(vals))
