"""Degree distributions and the polynomial algebra shared by every module.

Polynomials are kept sparse: a degree distribution is a map ``degree -> coefficient``
in node perspective (``L``, ``R``).  Edge-perspective polynomials are derived:

    lambda(x) = L'(x) / L'(1),    rho(x) = R'(x) / R'(1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

NORM_TOL = 1e-12
RENORM_LIMIT = 1e-9
DOMAIN_SLACK = 1e-12

Coefficient = Union[float, int, str, Fraction]


class DegreeDistributionError(ValueError):
    """Raised for malformed or inconsistent degree distributions."""


def parse_coefficient(value: Coefficient) -> float:
    """Parse a coefficient given as a number or an exact fraction string like ``"153/283"``."""
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise DegreeDistributionError(f"bad coefficient {value!r}") from exc
    return float(value)


def parse_pairs(spec: Union[str, Mapping, Iterable]) -> dict[int, float]:
    """Parse a (degree, coefficient) list into a sparse map.

    Accepted forms::

        "2:153/283, 3:102/283, 51:28/283"
        [[2, "153/283"], [3, "102/283"], [51, "28/283"]]
        {2: 0.54, 3: 0.36, 51: 0.1}
    """
    if isinstance(spec, str):
        items = []
        for chunk in spec.replace(";", ",").split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if ":" not in chunk:
                raise DegreeDistributionError(f"expected 'degree:coefficient', got {chunk!r}")
            deg, coef = chunk.split(":", 1)
            items.append((deg, coef))
    elif isinstance(spec, Mapping):
        items = list(spec.items())
    else:
        items = [tuple(p) for p in spec]

    out: dict[int, float] = {}
    for deg, coef in items:
        d = int(deg)
        out[d] = out.get(d, 0.0) + parse_coefficient(coef)
    return out


def _normalize(coeffs: Mapping[int, float], name: str) -> dict[int, float]:
    if not coeffs:
        raise DegreeDistributionError(f"{name} is empty")
    clean = {}
    for d, c in coeffs.items():
        if int(d) != d or d < 1:
            raise DegreeDistributionError(f"{name}: degree {d} must be an integer >= 1")
        if c < 0:
            raise DegreeDistributionError(f"{name}: negative coefficient {c} at degree {d}")
        if c > 0:
            clean[int(d)] = float(c)
    total = math.fsum(clean.values())
    dev = abs(total - 1.0)
    if dev > RENORM_LIMIT:
        raise DegreeDistributionError(f"{name} sums to {total!r}, not 1 (deviation {dev:.3g})")
    if dev > NORM_TOL:
        clean = {d: c / total for d, c in clean.items()}
    if min(clean) < 2:
        raise DegreeDistributionError(f"{name}: minimum degree must be >= 2")
    return dict(sorted(clean.items()))


class Polynomial:
    """Sparse polynomial ``sum_k c_k x^k`` evaluated elementwise on arrays."""

    __slots__ = ("degrees", "coeffs")

    def __init__(self, terms: Mapping[int, float]):
        items = sorted((int(k), float(c)) for k, c in terms.items() if c != 0.0)
        self.degrees = np.array([k for k, _ in items], dtype=np.int64)
        self.coeffs = np.array([c for _, c in items], dtype=np.float64)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.degrees.size == 0:
            return np.zeros_like(x)[()] if x.ndim else 0.0
        out = np.power.outer(x, self.degrees) @ self.coeffs
        return out if x.ndim else float(out)

    def derivative(self) -> "Polynomial":
        return Polynomial({k - 1: k * c for k, c in zip(self.degrees, self.coeffs) if k > 0})

    def at_one(self) -> float:
        return float(self.coeffs.sum())

    def terms(self) -> dict[int, float]:
        return {int(k): float(c) for k, c in zip(self.degrees, self.coeffs)}

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}x^{k}" for k, c in zip(self.degrees, self.coeffs))
        return f"Polynomial({body or '0'})"


@dataclass(frozen=True)
class DegreeDistribution:
    """Node-perspective degree distribution pair ``(L, R)`` of an LDPC ensemble.

    Construction validates normalization, non-negativity and the minimum
    degree rule (no degree-1 nodes).  Inputs within 1e-9 of unit mass are
    renormalized; anything further off is rejected.
    """

    L_coeffs: Mapping[int, float]
    R_coeffs: Mapping[int, float]
    name: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "L_coeffs", _normalize(self.L_coeffs, "L"))
        object.__setattr__(self, "R_coeffs", _normalize(self.R_coeffs, "R"))
        L = Polynomial(self.L_coeffs)
        R = Polynomial(self.R_coeffs)
        Lp, Rp = L.derivative(), R.derivative()
        Lp1, Rp1 = Lp.at_one(), Rp.at_one()
        lam = Polynomial({k: c / Lp1 for k, c in Lp.terms().items()})
        rho = Polynomial({k: c / Rp1 for k, c in Rp.terms().items()})
        self._cache.update(
            L=L, R=R, Lp=Lp, Rp=Rp, Lp1=Lp1, Rp1=Rp1,
            lam=lam, lam_p=lam.derivative(), lam_pp=lam.derivative().derivative(),
            rho=rho, rho_p=rho.derivative(), rho_pp=rho.derivative().derivative(),
        )

    @classmethod
    def from_pairs(cls, L, R, name: str = "") -> "DegreeDistribution":
        return cls(parse_pairs(L), parse_pairs(R), name=name)

    @classmethod
    def regular(cls, dv: int, dc: int) -> "DegreeDistribution":
        return cls({dv: 1.0}, {dc: 1.0}, name=f"reg-{dv}-{dc}")

    # polynomial accessors -------------------------------------------------
    @property
    def L(self) -> Polynomial:
        return self._cache["L"]

    @property
    def R(self) -> Polynomial:
        return self._cache["R"]

    @property
    def lam(self) -> Polynomial:
        return self._cache["lam"]

    @property
    def rho(self) -> Polynomial:
        return self._cache["rho"]

    @property
    def lam_prime(self) -> Polynomial:
        return self._cache["lam_p"]

    @property
    def lam_double_prime(self) -> Polynomial:
        return self._cache["lam_pp"]

    @property
    def rho_prime(self) -> Polynomial:
        return self._cache["rho_p"]

    @property
    def rho_double_prime(self) -> Polynomial:
        return self._cache["rho_pp"]

    @property
    def L_prime_1(self) -> float:
        """Average variable degree L'(1)."""
        return self._cache["Lp1"]

    @property
    def R_prime_1(self) -> float:
        """Average check degree R'(1)."""
        return self._cache["Rp1"]

    @property
    def max_variable_degree(self) -> int:
        return max(self.L_coeffs)

    @property
    def max_check_degree(self) -> int:
        return max(self.R_coeffs)

    def label(self) -> str:
        if self.name:
            return self.name
        fmt = lambda m: "+".join(f"{c:.6g}x^{d}" for d, c in m.items())
        return f"({fmt(self.L_coeffs)},{fmt(self.R_coeffs)})"

    def to_pairs(self) -> dict:
        return {
            "L": [[d, c] for d, c in self.L_coeffs.items()],
            "R": [[d, c] for d, c in self.R_coeffs.items()],
        }


def _check_domain(x):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < -DOMAIN_SLACK) or np.any(arr > 1.0 + DOMAIN_SLACK):
        raise ValueError(f"argument outside [0, 1]: {x!r}")
    return np.clip(arr, 0.0, 1.0)[()] if arr.ndim else float(min(max(arr, 0.0), 1.0))


def eval_L(dd: DegreeDistribution, x):
    return dd.L(_check_domain(x))


def eval_R(dd: DegreeDistribution, x):
    return dd.R(_check_domain(x))


def eval_L_prime(dd: DegreeDistribution, x):
    return dd._cache["Lp"](_check_domain(x))


def eval_R_prime(dd: DegreeDistribution, x):
    return dd._cache["Rp"](_check_domain(x))


def eval_lambda(dd: DegreeDistribution, x):
    return dd.lam(_check_domain(x))


def eval_rho(dd: DegreeDistribution, x):
    return dd.rho(_check_domain(x))


def eval_rho_prime(dd: DegreeDistribution, x):
    return dd.rho_prime(_check_domain(x))


def eval_rho_double_prime(dd: DegreeDistribution, x):
    return dd.rho_double_prime(_check_domain(x))


def design_rate(dd: DegreeDistribution) -> float:
    """Design rate ``1 - L'(1)/R'(1)``."""
    return 1.0 - dd.L_prime_1 / dd.R_prime_1


def edge_degree_arrays(poly_coeffs: Mapping[int, float], normalizer: float) -> tuple[np.ndarray, np.ndarray]:
    """Exponents and weights of the edge-perspective polynomial, for the compiled kernels."""
    exps = np.array([d - 1 for d in poly_coeffs], dtype=np.int64)
    weights = np.array([d * c / normalizer for d, c in poly_coeffs.items()], dtype=np.float64)
    return exps, weights


NAMED_ENSEMBLES: dict[str, tuple] = {
    "reg-3-6": ({3: 1}, {6: 1}),
    "reg-4-8": ({4: 1}, {8: 1}),
    "reg-5-10": ({5: 1}, {10: 1}),
    "irr-deg4": ({3: "19/20", 23: "1/20"}, {8: 1}),
    "irr-five-fp": ({2: "153/283", 3: "102/283", 51: "28/283"}, {16: 1}),
}


def named_ensemble(name: str) -> DegreeDistribution:
    try:
        L, R = NAMED_ENSEMBLES[name]
    except KeyError:
        raise DegreeDistributionError(
            f"unknown ensemble {name!r}; known: {', '.join(NAMED_ENSEMBLES)}"
        ) from None
    return DegreeDistribution.from_pairs(L, R, name=name)


def ensemble_from_config(spec) -> DegreeDistribution:
    """Build a distribution from a name, or a mapping with ``L``/``R`` pair lists."""
    if isinstance(spec, DegreeDistribution):
        return spec
    if isinstance(spec, str):
        return named_ensemble(spec)
    if isinstance(spec, Mapping):
        if "L" not in spec or "R" not in spec:
            raise DegreeDistributionError("ensemble mapping needs 'L' and 'R'")
        return DegreeDistribution.from_pairs(spec["L"], spec["R"], name=str(spec.get("name", "")))
    raise DegreeDistributionError(f"cannot build an ensemble from {spec!r}")


__all__: Sequence[str] = [
    "DegreeDistribution", "DegreeDistributionError", "Polynomial", "parse_pairs",
    "parse_coefficient", "eval_L", "eval_R", "eval_L_prime", "eval_R_prime",
    "eval_lambda", "eval_rho", "eval_rho_prime", "eval_rho_double_prime",
    "design_rate", "named_ensemble", "ensemble_from_config", "NAMED_ENSEMBLES",
    "edge_degree_arrays",
]
