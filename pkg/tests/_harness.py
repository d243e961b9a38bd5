"""Reference implementations used only by the tests.

These are written from the recursions directly, with plain loops, so they
share no code with the package under test.
"""

from __future__ import annotations

import numpy as np


def two_sided_step(dd, eps: float, N: int, w: int, x: np.ndarray) -> np.ndarray:
    """One step of the full two-sided chain on positions 1..2N+w-1 (0-based array)."""
    M = 2 * N + w - 1
    assert x.size == M

    def xv(z):
        return x[z - 1] if 1 <= z <= M else 0.0

    def ev(z):
        return eps if 1 <= z <= 2 * N else 0.0

    out = np.empty(M)
    for z in range(1, M + 1):
        acc = 0.0
        for k in range(w):
            e = ev(z - k)
            if e == 0.0:
                continue
            s = sum(dd.rho(1.0 - xv(z + j - k)) for j in range(w)) / w
            acc += e * dd.lam(1.0 - s)
        out[z - 1] = acc / w
    return out


def one_sided_step(dd, eps: float, w: int, x: np.ndarray) -> np.ndarray:
    """One-sided update with x_z = 0 left of the chain and x_z = x_N' beyond it."""
    n = x.size

    def xv(z):
        if z < 1:
            return 0.0
        return x[min(z, n) - 1]

    out = np.empty(n)
    for z in range(1, n + 1):
        acc = 0.0
        for k in range(w):
            if z - k < 1:
                continue
            s = sum(dd.rho(1.0 - xv(z + j - k)) for j in range(w)) / w
            acc += eps * dd.lam(1.0 - s)
        out[z - 1] = acc / w
    return out


def single_potential_reg(dv: int, dc: int, eps: float, x: float) -> float:
    """Closed-form single-system potential of the (dv, dc)-regular ensemble."""
    y = 1.0 - x
    return ((1 - y ** dc) / dc - x * y ** (dc - 1)
            - eps / dv * (1 - y ** (dc - 1)) ** dv)
