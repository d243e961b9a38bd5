"""Batch experiments: configuration, presets, grid execution and output files."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from . import __version__, bounds, de_core, kernels, potential, speed
from .codesim import ChannelModel, run_montecarlo
from .codesim.montecarlo import CSV_FIELDS as MONTECARLO_FIELDS
from .coupled_de import CoupledConfig, init_profile, trajectory
from .ensemble import DegreeDistribution, ensemble_from_config

log = logging.getLogger(__name__)

TASKS = ("profiles", "thresholds", "fixed_points", "potential_curve", "speed", "bounds", "montecarlo")
FORMATS = ("csv", "json")
MANIFEST = "manifest.json"

SPEED_FIELDS = ("ensemble", "w", "epsilon", "I", "T_I", "v_I", "mode", "v_upper", "v_lower", "alpha_est")
BOUNDS_FIELDS = ("ensemble", "w", "epsilon", "alpha", "B1", "B2", "B2_finite_w", "LB", "variant")
TASK_FIELDS = {
    "profiles": ("ensemble", "N", "w", "epsilon", "t", "z", "x"),
    "thresholds": ("ensemble", "eps_bp", "eps_area", "eps_star"),
    "fixed_points": ("ensemble", "epsilon", "x", "stability"),
    "potential_curve": ("ensemble", "epsilon", "x", "U"),
    "speed": SPEED_FIELDS,
    "bounds": BOUNDS_FIELDS,
    "montecarlo": MONTECARLO_FIELDS,
}


class ConfigError(ValueError):
    pass


@dataclass
class MonteCarloSpec:
    n: int
    instance_count: int
    base_seed: int
    channels: list[str] = field(default_factory=lambda: ["BEC"])
    I: int = 20
    max_iters: int = 10_000


@dataclass
class ExperimentConfig:
    ensembles: list[Any]
    tasks: list[str]
    coupling: list[tuple[Optional[int], int]] = field(default_factory=list)
    epsilon_grid: list[float] = field(default_factory=list)
    entropy_grid: list[float] = field(default_factory=list)
    montecarlo: Optional[MonteCarloSpec] = None
    output_dir: str = "results"
    output_format: str = "csv"
    I_values: list[int] = field(default_factory=lambda: [1, 20])
    profile_iters: list[int] = field(default_factory=list)
    alpha: float = 1.0
    lb_variant: str = "as_tabulated"
    wave_regime_only: bool = False
    name: str = "experiment"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.tasks:
            raise ConfigError("tasks must not be empty")
        bad = [t for t in self.tasks if t not in TASKS]
        if bad:
            raise ConfigError(f"unknown task(s) {bad}; choose from {TASKS}")
        if not self.ensembles:
            raise ConfigError("at least one ensemble is required")
        for g, name in ((self.epsilon_grid, "epsilon_grid"), (self.entropy_grid, "entropy_grid")):
            if list(g) != sorted(g):
                raise ConfigError(f"{name} must be sorted ascending")
            if any(not 0 <= v <= 1 for v in g):
                raise ConfigError(f"{name} values must lie in [0, 1]")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}")
        if "montecarlo" in self.tasks:
            if self.montecarlo is None:
                raise ConfigError("montecarlo task needs a montecarlo section with base_seed")
            if not (self.entropy_grid or self.epsilon_grid):
                raise ConfigError("montecarlo task needs entropy_grid or epsilon_grid")
        needs_w = {"profiles", "speed", "bounds", "montecarlo"} & set(self.tasks)
        if needs_w and not self.coupling:
            raise ConfigError(f"tasks {sorted(needs_w)} need a coupling list")
        if needs_w - {"montecarlo"} and not self.epsilon_grid:
            raise ConfigError("DE tasks need an epsilon_grid")
        if "profiles" in self.tasks and not self.profile_iters:
            raise ConfigError("profiles task needs profile_iters")
        for N, w in self.coupling:
            if w < 2:
                raise ConfigError(f"coupling factor w={w} must be >= 2")
            if N is not None and N < 1:
                raise ConfigError(f"N={N} must be positive")
        if not 1 <= self.alpha <= 2:
            raise ConfigError("alpha must lie in [1, 2]")
        if self.lb_variant not in ("as_tabulated", "as_stated"):
            raise ConfigError("lb_variant must be as_tabulated or as_stated")

    # (de)serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coupling"] = [{"N": N, "w": w} for N, w in self.coupling]
        d["output"] = {"dir": d.pop("output_dir"), "format": d.pop("output_format")}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        try:
            if "ensemble" in d:
                d["ensembles"] = [d.pop("ensemble")]
            out = d.pop("output", None) or {}
            if isinstance(out, str):
                out = {"dir": out}
            d.setdefault("output_dir", out.get("dir", "results"))
            d.setdefault("output_format", out.get("format", "csv"))
            coup = []
            for c in d.get("coupling", []):
                N, w = (c.get("N"), c["w"]) if isinstance(c, dict) else c
                coup.append((None if N in (None, "auto") else int(N), int(w)))
            d["coupling"] = coup
            for k in ("epsilon_grid", "entropy_grid"):
                d[k] = [float(v) for v in d.get(k, [])]
            mc = d.get("montecarlo")
            if isinstance(mc, dict):
                if "base_seed" not in mc:
                    raise ConfigError("montecarlo section requires base_seed")
                d["montecarlo"] = MonteCarloSpec(**mc)
            known = set(cls.__dataclass_fields__)
            extra = set(d) - known
            if extra:
                raise ConfigError(f"unknown config keys {sorted(extra)}")
            return cls(**d)
        except ConfigError:
            raise
        except (TypeError, KeyError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        return cls.from_dict(data)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def resolved_ensembles(self) -> list[DegreeDistribution]:
        try:
            return [ensemble_from_config(e) for e in self.ensembles]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


# presets --------------------------------------------------------------------

def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return [round(lo + k * step, 10) for k in range(n + 1)]


def preset(name: str) -> ExperimentConfig:
    if name == "table1":
        return ExperimentConfig(
            name="table1", ensembles=["reg-3-6"], tasks=["speed", "bounds"],
            coupling=[(None, w) for w in (2, 4, 8, 16, 32)], epsilon_grid=[0.475],
            I_values=[1, 20])
    if name == "fig2":
        return ExperimentConfig(
            name="fig2", ensembles=["reg-3-6"],
            tasks=["profiles", "potential_curve", "fixed_points"],
            coupling=[(100, 3)], epsilon_grid=[0.475], profile_iters=[200, 400, 600])
    if name == "fig3":
        return ExperimentConfig(
            name="fig3", ensembles=["reg-3-6", "reg-4-8", "reg-5-10"],
            tasks=["thresholds", "speed", "bounds", "montecarlo"],
            coupling=[(100, 6)], epsilon_grid=_grid(0.33, 0.50, 0.0025), I_values=[20],
            wave_regime_only=True,
            montecarlo=MonteCarloSpec(n=5000, instance_count=100, base_seed=0, channels=["BEC"]))
    if name == "fig4":
        return ExperimentConfig(
            name="fig4", ensembles=["reg-4-8", "irr-deg4", "irr-five-fp"],
            tasks=["thresholds", "speed"], coupling=[(None, 3)],
            epsilon_grid=_grid(0.36, 0.50, 0.0025), I_values=[1, 20], wave_regime_only=True)
    if name == "fig5":
        return ExperimentConfig(
            name="fig5", ensembles=["reg-3-6"], tasks=["montecarlo"], coupling=[(100, 3)],
            entropy_grid=_grid(0.40, 0.50, 0.01),
            montecarlo=MonteCarloSpec(n=5000, instance_count=100, base_seed=0,
                                      channels=["BEC", "BSC", "AWGN"]))
    raise ConfigError(f"unknown preset {name!r}; choose from table1, fig2, fig3, fig4, fig5")


PRESETS = ("table1", "fig2", "fig3", "fig4", "fig5")


# per-point workers ----------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _wave_chain(dd, N, w, eps, I_max):
    """Coupled config for a speed measurement; ``N=None`` means auto-sized."""
    if N is None:
        return CoupledConfig(dd, speed.auto_length(w, I_max), w, eps)
    return CoupledConfig.from_N(dd, N, w, eps)


def point_speed_bounds(dd, label, N, w, eps, tasks, I_values, alpha, lb_variant):
    """Speed and/or bounds rows for one grid point, sharing one formed wave."""
    cfg0 = _wave_chain(dd, N, w, eps, max(I_values))
    I_meas = I_values if "speed" in tasks else (1,)
    cfg, wf, reps = speed.speeds(dd, eps, w, I_meas, N_prime=cfg0.N_prime)
    mode = speed.classify_wave_mode(dd, eps)
    out = {"speed": [], "bounds": []}
    if "speed" in tasks:
        try:
            a = speed.estimate_alpha(cfg, wf.profile).alpha
        except RuntimeError:
            a = None
        for I in I_values:
            rep = reps[I]
            vu = vl = None
            if mode.kind == "two_wave":
                tw = speed.measure_two_wave_speeds(cfg, I, mode)
                vu, vl = tw.v_upper, tw.v_lower
            out["speed"].append(dict(ensemble=label, w=w, epsilon=eps, I=I, T_I=rep.T_I, v_I=rep.v_I,
                                     mode=mode.kind, v_upper=vu, v_lower=vl, alpha_est=a))
    if "bounds" in tasks:
        b1 = bounds.bound_B1(cfg, wf.profile, alpha, wf.x_bp)
        row = dict(ensemble=label, w=w, epsilon=eps, alpha=alpha, B1=b1, B2=None, B2_finite_w=None,
                   LB=None, variant=lb_variant)
        if mode.kind == "single_wave":
            rep = bounds.compute_bounds(cfg, wf.profile, alpha, lb_variant)
            row.update(B2=rep.B2, B2_finite_w=rep.B2_finite_w, LB=rep.LB)
        out["bounds"].append(row)
    return out


def point_profiles(dd, label, N, w, eps, iters):
    cfg = CoupledConfig.from_N(dd, N, w, eps)
    start = init_profile(cfg)
    # row t is the profile after t steps; row 0 is the all-ones start
    rows = np.vstack([start.x, trajectory(cfg, start, max(iters))])
    out = []
    for t in iters:
        for z, x in enumerate(rows[t], start=1):
            out.append(dict(ensemble=label, N=N, w=w, epsilon=eps, t=t, z=z, x=x))
    return {"profiles": out}


def point_thresholds(dd, label):
    bp = de_core.bp_threshold(dd)
    area = potential.area_threshold(dd)
    star = None
    grid = np.linspace(bp, area, 41)[1:-1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        five = [e for e in grid if len(de_core.find_fixed_points(dd, e)) >= 5]
        if five:
            lo = max([e for e in grid if e < five[0]], default=bp)
            star = de_core.fixed_point_count_transition(dd, lo, five[0])
    return {"thresholds": [dict(ensemble=label, eps_bp=bp, eps_area=area, eps_star=star)]}


def point_fixed_points(dd, label, eps):
    fps = de_core.find_fixed_points(dd, eps)
    return {"fixed_points": [dict(ensemble=label, epsilon=eps, x=x, stability=s) for x, s in fps.points]}


def point_potential(dd, label, eps, n_points=1001):
    c = potential.potential_curve(dd, eps, n_points)
    return {"potential_curve": [dict(ensemble=label, epsilon=eps, x=x, U=u) for x, u in c.samples]}


def point_montecarlo(dd, N, w, kind, h, mc: MonteCarloSpec, seed):
    ch = ChannelModel.from_entropy(kind, h)
    res = run_montecarlo(dd, N, w, mc.n, ch, mc.instance_count, seed, mc.I, mc.max_iters)
    return {"montecarlo": [res.row()]}


def _run_point(job):
    key, fn, args = job
    try:
        return key, fn(*args), None
    except Exception as exc:  # recorded per grid point, the sweep continues
        return key, None, f"{type(exc).__name__}: {exc}"


# orchestration ---------------------------------------------------------------

@dataclass
class ExperimentResult:
    files: dict[str, str]
    failures: list[dict]
    manifest: dict

    @property
    def ok(self) -> bool:
        return not self.failures


def _mc_seed(base: int, *key) -> int:
    return int(np.random.SeedSequence([base, *key]).generate_state(1, dtype=np.uint64)[0] >> 1)


def build_jobs(cfg: ExperimentConfig) -> list:
    dds = cfg.resolved_ensembles()
    jobs = []
    tasks = set(cfg.tasks)
    regime = {}
    if cfg.wave_regime_only or "thresholds" in tasks:
        for i, dd in enumerate(dds):
            regime[i] = (de_core.bp_threshold(dd), potential.area_threshold(dd))
    for i, dd in enumerate(dds):
        label = dd.label()
        if "thresholds" in tasks:
            jobs.append(((0, i), point_thresholds, (dd, label)))
        eps_grid = list(cfg.epsilon_grid)
        if cfg.wave_regime_only:
            lo, hi = regime[i]
            eps_grid = [e for e in eps_grid if lo < e < hi]
        for k, e in enumerate(cfg.epsilon_grid):
            if "fixed_points" in tasks:
                jobs.append(((1, i, k), point_fixed_points, (dd, label, e)))
            if "potential_curve" in tasks:
                jobs.append(((2, i, k), point_potential, (dd, label, e)))
        for j, (N, w) in enumerate(cfg.coupling):
            for k, e in enumerate(eps_grid):
                if "profiles" in tasks:
                    jobs.append(((3, i, j, k), point_profiles, (dd, label, N or 100, w, e, cfg.profile_iters)))
                sb = [t for t in ("speed", "bounds") if t in tasks]
                if sb:
                    jobs.append(((4, i, j, k), point_speed_bounds,
                                 (dd, label, N, w, e, sb, cfg.I_values, cfg.alpha, cfg.lb_variant)))
            if "montecarlo" in tasks:
                mc = cfg.montecarlo
                for c, kind in enumerate(mc.channels):
                    grid = cfg.entropy_grid or eps_grid
                    for k, h in enumerate(grid):
                        seed = _mc_seed(mc.base_seed, i, j, c, k)
                        jobs.append(((5, i, j, c, k), point_montecarlo,
                                     (dd, N or 100, w, kind, h, mc, seed)))
    return jobs


def _render(rows: list[dict], fmt: str, manifest_ref: str, fields: tuple) -> str:
    if fmt == "json":
        clean = [{k: (float(v) if isinstance(v, np.floating) else v) for k, v in r.items()} for r in rows]
        return json.dumps(clean, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# manifest: {manifest_ref}\n")
    wr = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: _fmt(r[k]) for k in fields})
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, output_dir: Optional[str] = None) -> ExperimentResult:
    t0 = time.time()
    out_dir = Path(output_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    work = build_jobs(cfg)
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_point, work))
    else:
        results = [_run_point(j) for j in work]
    results.sort(key=lambda r: r[0])

    by_task: dict[str, list] = {t: [] for t in cfg.tasks}
    failures = []
    for key, res, err in results:
        if err is not None:
            failures.append({"key": list(key), "error": err})
            log.warning("grid point %s failed: %s", key, err)
            continue
        for task, rows in res.items():
            if task in by_task:
                by_task[task].extend(rows)

    files = {}
    for task, rows in by_task.items():
        path = out_dir / f"{task}.{cfg.output_format}"
        path.write_text(_render(rows, cfg.output_format, MANIFEST, TASK_FIELDS[task]))
        files[task] = str(path)
    manifest = {
        "name": cfg.name,
        "config": cfg.to_dict(),
        "version": __version__,
        "backend": kernels.BACKEND,
        "wall_time_s": round(time.time() - t0, 3),
        "seeds": {"montecarlo_base_seed": cfg.montecarlo.base_seed if cfg.montecarlo else None},
        "files": {k: Path(v).name for k, v in files.items()},
        "failures": failures,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (out_dir / MANIFEST).write_text(json.dumps(manifest, indent=1) + "\n")
    return ExperimentResult(files, failures, manifest)
