"""Monte-Carlo estimate of the empirical wave speed over sampled instances."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..ensemble import DegreeDistribution
from .channels import ChannelModel
from .decoders import bp_decode_bec, bp_decode_bms, sample_erasures
from .front import NoFrontError, empirical_speed
from .graph import sample_instance

log = logging.getLogger(__name__)

STALL_PATIENCE = 200

CSV_FIELDS = ("ensemble", "channel", "h", "n", "N", "w", "seed", "instances",
              "v_mean", "v_stderr", "stall_fraction")


@dataclass
class MonteCarloResult:
    ensemble: str
    channel: str
    h: float
    n: int
    N: int
    w: int
    seed: int
    instances: int
    v_mean: float
    v_stderr: float
    stall_fraction: float
    speeds: list = field(default_factory=list, repr=False)

    def row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_FIELDS}


def instance_seeds(base_seed: int, count: int) -> list[tuple[int, int]]:
    """``(graph_seed, noise_seed)`` per instance, derived from one base seed."""
    out = []
    for child in np.random.SeedSequence(base_seed).spawn(count):
        g, s = child.generate_state(2, dtype=np.uint64)
        out.append((int(g), int(s)))
    return out


def decode_instance(dd: DegreeDistribution, N: int, w: int, n: int, channel: ChannelModel,
                    graph_seed: int, noise_seed: int, max_iters: int, patience: int = STALL_PATIENCE):
    inst = sample_instance(dd, n, graph_seed, N=N, w=w)
    if channel.kind == "BEC":
        return bp_decode_bec(inst, sample_erasures(inst, channel.param, noise_seed), max_iters)
    return bp_decode_bms(inst, channel, noise_seed, max_iters, patience=patience)


def _one(args):
    dd, N, w, n, channel, gs, ns, max_iters, I, patience = args
    tr = decode_instance(dd, N, w, n, channel, gs, ns, max_iters, patience)
    try:
        v = empirical_speed(tr.symmetrized_half(), I, w)
    except NoFrontError:
        v = 0.0  # the wave never propagated
    return v, tr.success


def run_montecarlo(dd: DegreeDistribution, N: int, w: int, n: int, channel: ChannelModel,
                   instances: int = 100, base_seed: int = 0, I: int = 20,
                   max_iters: int = 10_000, jobs: int = 1,
                   patience: int = STALL_PATIENCE) -> MonteCarloResult:
    """Decode ``instances`` independent (graph, noise) draws and average the speeds.

    Instances without a measurable front contribute speed 0; decoding
    failures are reported as ``stall_fraction``.  BMS decoding stops after
    ``patience`` iterations without progress.
    """
    if instances < 1:
        raise ValueError("instances must be >= 1")
    tasks = [(dd, N, w, n, channel, g, s, max_iters, I, patience) for g, s in instance_seeds(base_seed, instances)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            res = list(ex.map(_one, tasks))
    else:
        res = [_one(t) for t in tasks]
    v = np.array([r[0] for r in res])
    stalled = np.array([not r[1] for r in res])
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return MonteCarloResult(dd.label(), channel.kind, channel.entropy, n, N, w, base_seed, instances,
                            float(v.mean()), se, float(stalled.mean()), v.tolist())


def mean_bec_trace(dd: DegreeDistribution, N: int, w: int, n: int, epsilon: float,
                   instances: int, base_seed: int, n_iters: int) -> np.ndarray:
    """Symmetrized left-half BEC trace averaged over instances, rows ``0..n_iters``.

    Instances that finish early are padded with their final row.
    """
    ch = ChannelModel("BEC", epsilon)
    acc = None
    for g, s in instance_seeds(base_seed, instances):
        half = decode_instance(dd, N, w, n, ch, g, s, n_iters).symmetrized_half()
        if half.shape[0] < n_iters + 1:
            half = np.vstack([half, np.repeat(half[-1:], n_iters + 1 - half.shape[0], axis=0)])
        acc = half[: n_iters + 1] if acc is None else acc + half[: n_iters + 1]
    return acc / instances
