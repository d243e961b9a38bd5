"""Binary memoryless symmetric channels indexed by their entropy.

Entropy conventions (bits per channel use, all-zero codeword, BPSK ``0 -> +1``):

* BEC(eps): ``h = eps``
* BSC(p): ``h = h2(p)``
* BIAWGN(sigma): ``h = E[log2(1 + exp(-L))]`` with the channel LLR
  ``L ~ N(2/sigma^2, 4/sigma^2)``, i.e. ``1 - capacity``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate, optimize

Kind = Literal["BEC", "BSC", "AWGN"]
KINDS = ("BEC", "BSC", "AWGN")
ENTROPY_TOL = 1e-12


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def awgn_entropy(sigma: float) -> float:
    if sigma <= 0:
        return 0.0
    mu = 2.0 / sigma**2
    sd = 2.0 / sigma

    def f(u):
        llr = mu + sd * u
        # log2(1 + e^-L), stable for large |L|
        return np.logaddexp(0.0, -llr) / math.log(2) * math.exp(-0.5 * u * u)

    val, _ = integrate.quad(f, -40.0, 40.0, limit=200, epsabs=1e-13, epsrel=1e-11)
    return float(val / math.sqrt(2 * math.pi))


@dataclass(frozen=True)
class ChannelModel:
    kind: Kind
    param: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.kind == "BEC" and not 0 <= self.param <= 1:
            raise ValueError("BEC erasure probability must lie in [0, 1]")
        if self.kind == "BSC" and not 0 <= self.param <= 0.5:
            raise ValueError("BSC crossover probability must lie in [0, 0.5]")
        if self.kind == "AWGN" and self.param < 0:
            raise ValueError("AWGN noise level must be nonnegative")

    @property
    def entropy(self) -> float:
        if self.kind == "BEC":
            return float(self.param)
        if self.kind == "BSC":
            return binary_entropy(self.param)
        return awgn_entropy(self.param)

    @classmethod
    def from_entropy(cls, kind: Kind, h: float) -> "ChannelModel":
        if not 0 <= h <= 1:
            raise ValueError("entropy must lie in [0, 1]")
        if kind == "BEC":
            return cls("BEC", h)
        if h == 0:
            return cls(kind, 0.0)
        if kind == "BSC":
            if h == 1:
                return cls("BSC", 0.5)
            p = optimize.brentq(lambda p: binary_entropy(p) - h, 1e-300, 0.5, xtol=1e-15)
            return cls("BSC", p)
        if kind == "AWGN":
            if h >= 1:
                raise ValueError("AWGN entropy must be below 1")
            hi = 1.0
            while awgn_entropy(hi) < h:
                hi *= 2
            s = optimize.brentq(lambda s: awgn_entropy(s) - h, 1e-3, hi, xtol=1e-14)
            return cls("AWGN", s)
        raise ValueError(f"unknown channel kind {kind!r}")

    def llr(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Channel LLRs for the all-zero codeword (positive means ``0``)."""
        if self.kind == "BEC":
            erased = rng.random(size) < self.param
            return np.where(erased, 0.0, np.inf)
        if self.kind == "BSC":
            p = self.param
            if p == 0:
                return np.full(size, np.inf)
            mag = math.log((1 - p) / p)
            return np.where(rng.random(size) < p, -mag, mag)
        if self.param == 0:
            return np.full(size, np.inf)
        y = 1.0 + self.param * rng.standard_normal(size)
        return 2.0 * y / self.param**2
