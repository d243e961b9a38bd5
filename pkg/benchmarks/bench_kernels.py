"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is fed identical inputs under both backends; the table reports
the best wall time of ``--repeat`` runs and the speedup.
"""

import argparse
import sys
import time

import numpy as np

from scwave import kernels, named_ensemble
from scwave.codesim import ChannelModel, sample_erasures, sample_instance
from scwave.coupled_de import CoupledConfig, init_profile


def _cases():
    cfg = CoupledConfig(named_ensemble("reg-3-6"), 400, 3, 0.475)
    de_args = (init_profile(cfg).x, cfg.w, cfg.epsilon, *cfg._kern, 2000)

    inst = sample_instance(named_ensemble("reg-3-6"), 2000, 1, N=20, w=3)
    csr = inst.csr()
    er = sample_erasures(inst, 0.46, 2)
    sockets = np.full(inst.n_chk_positions, float(inst.sockets_per_check_position()))
    peel_args = (*csr, inst.edge_var, inst.edge_chk, inst.edge_pos, er, sockets, 2000)

    ch = ChannelModel.from_entropy("AWGN", 0.46)
    llr = np.clip(ch.llr(inst.n_vars, np.random.default_rng(3)), -30, 30)
    flood_args = (*csr, inst.edge_var, llr, inst.var_pos, inst.n_var_positions, 100, 30.0, 0)

    return [
        ("coupled DE, N'=400 w=3, 2000 steps", "coupled_de_advance", de_args),
        ("BEC peeling, N=20 n=2000", "bec_peel", peel_args),
        ("AWGN flooding, N=20 n=2000, 100 iters", "llr_flood", flood_args),
    ]


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.compiled is None:
        print("compiled extension not available; build it with "
              "`python3 setup.py build_ext --inplace`", file=sys.stderr)
        return 1
    print(f"{'kernel':<40} {'cython s':>10} {'numpy s':>10} {'speedup':>8}")
    for label, name, a in _cases():
        tc = _best(getattr(kernels.compiled, name), a, args.repeat)
        tf = _best(getattr(kernels.fallback, name), a, args.repeat)
        print(f"{label:<40} {tc:>10.4f} {tf:>10.4f} {tf / tc:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
