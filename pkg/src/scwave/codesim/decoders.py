"""Belief-propagation decoding of sampled instances (flooding schedule)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from .channels import ChannelModel
from .graph import CodeInstance

LLR_CLAMP = 30.0


@dataclass
class DecodeTrace:
    """Per-iteration, per-position error metric.

    ``trace[t, p]`` is the metric after ``t`` iterations at 0-based position
    ``p``; ``positions`` says whether positions are check positions (BEC) or
    variable positions (BMS).
    """

    trace: np.ndarray
    iterations: int
    success: bool
    positions: str

    def symmetrized_half(self) -> np.ndarray:
        """Average each position with its mirror image and keep the left half."""
        P = self.trace.shape[1]
        sym = 0.5 * (self.trace + self.trace[:, ::-1])
        return sym[:, : (P + 1) // 2]


def bp_decode_bec(inst: CodeInstance, erasure_pattern: np.ndarray, max_iters: int = 10_000) -> DecodeTrace:
    """Erasure decoding; the metric is the fraction of erased variable-to-check
    messages into each check position, over that position's full socket count.

    Row 0 holds the channel-only messages.
    """
    erased = np.ascontiguousarray(erasure_pattern, dtype=np.uint8)
    if erased.size != inst.n_vars:
        raise ValueError(f"erasure pattern has {erased.size} entries, expected {inst.n_vars}")
    var_ptr, var_edges, chk_ptr, chk_edges = inst.csr()
    sockets = np.full(inst.n_chk_positions, float(inst.sockets_per_check_position()))
    trace, t, ok = kernels.bec_peel(var_ptr, var_edges, chk_ptr, chk_edges,
                                    inst.edge_var, inst.edge_chk, inst.edge_pos,
                                    erased, sockets, int(max_iters))
    return DecodeTrace(trace, int(t), bool(ok), "check")


def bp_decode_bms(inst: CodeInstance, channel: ChannelModel, noise_seed: int,
                  max_iters: int = 10_000, clamp: float = LLR_CLAMP, patience: int = 0) -> DecodeTrace:
    """Sum-product decoding; the metric is the hard-decision bit-error fraction
    at each variable position.

    ``patience > 0`` ends decoding once the error count has not improved for
    that many iterations (a stalled wave).
    """
    if channel.kind == "BEC":
        raise ValueError("use bp_decode_bec for the erasure channel")
    rng = np.random.default_rng(noise_seed)
    llr = np.clip(channel.llr(inst.n_vars, rng), -clamp, clamp)
    var_ptr, var_edges, chk_ptr, chk_edges = inst.csr()
    trace, t, ok = kernels.llr_flood(var_ptr, var_edges, chk_ptr, chk_edges, inst.edge_var,
                                     np.ascontiguousarray(llr), inst.var_pos,
                                     inst.n_var_positions, int(max_iters), float(clamp),
                                     int(patience))
    return DecodeTrace(trace, int(t), bool(ok), "variable")


def sample_erasures(inst: CodeInstance, epsilon: float, noise_seed: int) -> np.ndarray:
    rng = np.random.default_rng(noise_seed)
    return (rng.random(inst.n_vars) < epsilon).astype(np.uint8)
