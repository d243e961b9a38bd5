"""Sampling of finite coupled code instances.

Variable positions are ``z = 1..2N`` and check positions ``c = 1..2N+w-1``;
a variable at position ``z`` connects only to checks at ``z..z+w-1``.  The
sockets of each variable position are split as evenly as possible over the
``w`` offsets and then matched uniformly at random to check sockets of the
target position.  Check sockets left over (boundary positions) stand for
edges to known virtual variables and are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..coupled_de import CoupledConfig
from ..ensemble import DegreeDistribution


class QuantizationError(ValueError):
    pass


def quantize_degrees(coeffs: dict[int, float], count: int) -> np.ndarray:
    """Degree of each of ``count`` nodes: floor of ``count*L_d`` plus largest remainders."""
    degs = np.array(sorted(coeffs), dtype=np.int64)
    target = np.array([coeffs[d] for d in degs]) * count
    k = np.floor(target + 1e-9).astype(np.int64)
    short = count - int(k.sum())
    if short > 0:
        order = np.argsort(-(target - k), kind="stable")
        k[order[:short]] += 1
    return np.repeat(degs, k)


@dataclass
class CodeInstance:
    dd: DegreeDistribution
    N: int
    w: int
    n: int
    m: int
    seed: int
    var_degrees: np.ndarray = field(repr=False)
    chk_degrees: np.ndarray = field(repr=False)
    # edge arrays, one entry per connected edge
    edge_var: np.ndarray = field(repr=False)
    edge_chk: np.ndarray = field(repr=False)

    @property
    def n_var_positions(self) -> int:
        return 2 * self.N

    @property
    def n_chk_positions(self) -> int:
        return 2 * self.N + self.w - 1

    @property
    def n_vars(self) -> int:
        return self.n * self.n_var_positions

    @property
    def n_checks(self) -> int:
        return self.m * self.n_chk_positions

    @property
    def n_edges(self) -> int:
        return self.edge_var.size

    @property
    def var_pos(self) -> np.ndarray:
        """0-based position of each variable."""
        return np.arange(self.n_vars, dtype=np.int64) // self.n

    @property
    def edge_pos(self) -> np.ndarray:
        """0-based check position of each edge."""
        return self.edge_chk // self.m

    def sockets_per_check_position(self) -> int:
        return int(self.chk_degrees.sum())

    def csr(self):
        """``(var_ptr, var_edges, chk_ptr, chk_edges)`` adjacency in CSR form."""
        cache = getattr(self, "_csr", None)
        if cache is None:
            var_edges = np.argsort(self.edge_var, kind="stable").astype(np.int64)
            chk_edges = np.argsort(self.edge_chk, kind="stable").astype(np.int64)
            var_ptr = np.concatenate([[0], np.cumsum(np.bincount(self.edge_var, minlength=self.n_vars))])
            chk_ptr = np.concatenate([[0], np.cumsum(np.bincount(self.edge_chk, minlength=self.n_checks))])
            cache = (var_ptr.astype(np.int64), var_edges, chk_ptr.astype(np.int64), chk_edges)
            self._csr = cache
        return cache


def checks_per_position(dd: DegreeDistribution, n: int) -> int:
    return int(np.ceil(n * dd.L_prime_1 / dd.R_prime_1 - 1e-9))


def sample_instance(cfg: CoupledConfig | DegreeDistribution, n: int, seed: int,
                    N: Optional[int] = None, w: Optional[int] = None) -> CodeInstance:
    """Sample an instance with ``n`` variables per position.

    ``cfg`` may be a :class:`CoupledConfig` (its ``N`` is recovered from
    ``N'``) or a bare distribution together with ``N`` and ``w``.
    """
    if isinstance(cfg, CoupledConfig):
        dd, w = cfg.dd, cfg.w
        N = cfg.N_prime - (cfg.w - 1) // 2
    else:
        dd = cfg
        if N is None or w is None:
            raise ValueError("N and w are required with a bare degree distribution")
    if n < 1 or N < 1 or w < 1:
        raise ValueError("n, N and w must be positive")

    rng = np.random.default_rng(seed)
    vdeg = quantize_degrees(dict(dd.L_coeffs), n)
    m = checks_per_position(dd, n)
    cdeg = quantize_degrees(dict(dd.R_coeffs), m)
    s_var, s_chk = int(vdeg.sum()), int(cdeg.sum())
    if s_chk < s_var:
        raise QuantizationError(
            f"check sockets per position ({s_chk}) fewer than variable sockets ({s_var}); "
            f"imbalance {s_var - s_chk}"
        )

    n_vpos, n_cpos = 2 * N, 2 * N + w - 1
    # socket i of a variable position goes to offset i mod w after shuffling
    base_sock = np.repeat(np.arange(n, dtype=np.int64), vdeg)
    offset = np.arange(s_var, dtype=np.int64) % w
    socks_var = np.empty((n_vpos, s_var), dtype=np.int64)
    for z in range(n_vpos):
        socks_var[z] = z * n + rng.permutation(base_sock)
    sock_cpos = np.arange(n_vpos, dtype=np.int64)[:, None] + offset[None, :]
    flat_var = socks_var.ravel()
    flat_cpos = sock_cpos.ravel()
    order = np.argsort(flat_cpos, kind="stable")
    flat_var, flat_cpos = flat_var[order], flat_cpos[order]
    bounds = np.searchsorted(flat_cpos, np.arange(n_cpos + 1))

    chk_sock = np.repeat(np.arange(m, dtype=np.int64), cdeg)
    edge_chk = np.empty_like(flat_var)
    for c in range(n_cpos):
        a, b = bounds[c], bounds[c + 1]
        edge_chk[a:b] = c * m + chk_sock[rng.permutation(s_chk)[: b - a]]
    return CodeInstance(dd, N, w, n, m, int(seed), vdeg, cdeg, flat_var, edge_chk)
