"""Command-line interface.

Exit status: 0 on success, 1 when some grid points failed, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from .ensemble import DegreeDistributionError
from .experiment import (
    PRESETS,
    ConfigError,
    ExperimentConfig,
    MonteCarloSpec,
    preset,
    run_experiment,
)

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


def _floats(text: str) -> list[float]:
    return sorted(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _ensemble(text: str):
    """A named ensemble, or ``L=2:0.5,3:0.5;R=6:1``."""
    if "=" not in text:
        return text
    parts = dict(p.split("=", 1) for p in text.split(";"))
    if set(parts) != {"L", "R"}:
        raise argparse.ArgumentTypeError("ensemble needs both L= and R= parts")
    return {"L": parts["L"], "R": parts["R"]}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--output", default="results", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0, help="base seed for Monte-Carlo tasks")
    p.add_argument("--jobs", type=int, default=1, help="worker processes across grid points")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lb-variant", choices=("as_tabulated", "as_stated"), default="as_tabulated")


def _grid_args(p, w=True, eps=True):
    p.add_argument("--ensemble", type=_ensemble, action="append",
                   help="named ensemble or 'L=d:c,...;R=d:c,...' (repeatable; default reg-3-6)")
    if eps:
        p.add_argument("--eps", type=_floats, default=[0.475], help="comma-separated erasure probabilities")
    if w:
        p.add_argument("--w", type=_ints, default=[3], help="comma-separated coupling factors")
        p.add_argument("--N", default="auto", help="half chain length, or 'auto'")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scwave", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"scwave {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="BP, area and fixed-point-count thresholds")
    _grid_args(p, w=False, eps=False)
    _common(p)

    p = sub.add_parser("fixed-points", help="DE fixed points and their stability")
    _grid_args(p, w=False)
    _common(p)

    p = sub.add_parser("potential", help="potential curve samples (x, U)")
    _grid_args(p, w=False)
    _common(p)

    p = sub.add_parser("de-run", help="coupled DE profiles at given iterations")
    _grid_args(p)
    p.add_argument("--iters", type=_ints, default=[200, 400, 600])
    _common(p)

    p = sub.add_parser("speed", help="wave speeds v_I from coupled DE")
    _grid_args(p)
    p.add_argument("--I", type=_ints, default=[1, 20])
    _common(p)

    p = sub.add_parser("bounds", help="speed bounds B1, B2, LB")
    _grid_args(p)
    _common(p)

    p = sub.add_parser("simulate", help="Monte-Carlo BP decoding of sampled instances")
    _grid_args(p, eps=False)
    p.add_argument("--channel", action="append", choices=("BEC", "BSC", "AWGN"))
    p.add_argument("--h", type=_floats, required=True, help="comma-separated channel entropies")
    p.add_argument("--n", type=int, default=5000, help="variables per position")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--I", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=10_000)
    _common(p)

    p = sub.add_parser("preset", help="run a built-in experiment")
    p.add_argument("name", choices=PRESETS)
    p.add_argument("--show", action="store_true", help="print the configuration and exit")
    _common(p)

    p = sub.add_parser("run", help="run an experiment from a YAML/JSON config file")
    p.add_argument("config")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default=None, help="override the config's output directory")
    return ap


def _config_from_args(a) -> ExperimentConfig:
    ens = a.ensemble or ["reg-3-6"]
    base = dict(ensembles=ens, output_dir=a.output, output_format=a.format, alpha=a.alpha,
                lb_variant=a.lb_variant, name=a.command)
    coupling = []
    if hasattr(a, "w"):
        N = None if a.N == "auto" else int(a.N)
        coupling = [(N, w) for w in a.w]
    cmd = a.command
    if cmd == "thresholds":
        return ExperimentConfig(tasks=["thresholds"], **base)
    if cmd == "fixed-points":
        return ExperimentConfig(tasks=["fixed_points"], epsilon_grid=a.eps, **base)
    if cmd == "potential":
        return ExperimentConfig(tasks=["potential_curve"], epsilon_grid=a.eps, **base)
    if cmd == "de-run":
        coupling = [(N or 100, w) for N, w in coupling]
        return ExperimentConfig(tasks=["profiles"], coupling=coupling, epsilon_grid=a.eps,
                                profile_iters=sorted(a.iters), **base)
    if cmd == "speed":
        return ExperimentConfig(tasks=["speed"], coupling=coupling, epsilon_grid=a.eps,
                                I_values=a.I, **base)
    if cmd == "bounds":
        return ExperimentConfig(tasks=["bounds"], coupling=coupling, epsilon_grid=a.eps, **base)
    if cmd == "simulate":
        coupling = [(N or 100, w) for N, w in coupling]
        mc = MonteCarloSpec(n=a.n, instance_count=a.instances, base_seed=a.seed,
                            channels=a.channel or ["BEC"], I=a.I, max_iters=a.max_iters)
        return ExperimentConfig(tasks=["montecarlo"], coupling=coupling, entropy_grid=a.h,
                                montecarlo=mc, **base)
    raise ConfigError(f"unknown command {cmd}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if a.command == "run":
            cfg = ExperimentConfig.load(a.config)
            out = a.output
        elif a.command == "preset":
            cfg = preset(a.name)
            cfg.output_dir, cfg.output_format = a.output, a.format
            cfg.alpha, cfg.lb_variant = a.alpha, a.lb_variant
            if cfg.montecarlo is not None:
                cfg.montecarlo.base_seed = a.seed
            cfg.validate()
            if a.show:
                sys.stdout.write(cfg.dump())
                return EXIT_OK
            out = None
        else:
            cfg = _config_from_args(a)
            out = None
        res = run_experiment(cfg, jobs=a.jobs, output_dir=out)
    except (ConfigError, DegreeDistributionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for task, path in res.files.items():
        print(f"{task}: {path}")
    for f in res.failures:
        print(f"failed {f['key']}: {f['error']}", file=sys.stderr)
    return EXIT_PARTIAL if res.failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
