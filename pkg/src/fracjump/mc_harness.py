"""Deterministic Monte Carlo experiment runner.

Reproduces the size/power/robustness experiments as CSV artifacts: empirical
size over (H, n) grids, power against fixed or shrinking jump sizes, the
null distribution of the normalized statistic, robustness of the Hurst
estimator under jumps, and jump-time localization error.

Every replication draws from its own stream derived from (master seed,
experiment id, cell id, rep id), and replications are processed in fixed-size
chunks, so outputs are byte-identical regardless of worker count.  Each
reported rate ships with its binomial standard error sqrt(r (1 - r) / reps).
"""
from __future__ import annotations

import hashlib
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .hurst import filtered_hurst_estimate, hurst_estimate
from .jump_test import test_jumps, test_positive_jumps
from .randpath import simulate_fbm_many, sine_volatility

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "run",
    "run_size",
    "run_power",
    "run_power_gamma",
    "run_null_dist",
    "run_hurst_robust",
    "run_localization",
    "binomial_stderr",
]

EXPERIMENTS = (
    "size",
    "power",
    "power-gamma",
    "null-dist",
    "hurst-robust",
    "localization",
)
_EXPERIMENT_IDS = {name: i + 1 for i, name in enumerate(EXPERIMENTS)}

# Replications are simulated in fixed chunks of this many paths; the chunk
# boundaries depend only on rep ids, never on the worker count.
_CHUNK = 64


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and protocol of one experiment run."""

    experiment: str
    n_list: tuple[int, ...]
    hurst_list: tuple[float, ...]
    p: float = 0.9
    alpha: float = 0.05
    reps: int = 500
    jump_sizes: tuple[float, ...] = ()
    gamma_list: tuple[float, ...] = ()
    master_seed: int = 0
    out_dir: str = "."
    volatility: str = ""
    filtered: bool = False
    max_jumps: int = 10
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "hurst_list", tuple(float(h) for h in self.hurst_list))
        object.__setattr__(self, "jump_sizes", tuple(float(s) for s in self.jump_sizes))
        object.__setattr__(self, "gamma_list", tuple(float(g) for g in self.gamma_list))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.n_list or not self.hurst_list:
            raise ConfigError("n_list and hurst_list must be nonempty")
        if any(n < 8 for n in self.n_list):
            raise ConfigError("every n must be >= 8")
        if any(not 0.0 < h < 1.0 for h in self.hurst_list):
            raise ConfigError("every Hurst exponent must lie in (0, 1)")
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p must lie in (0, 1], got {self.p}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.reps < 100:
            raise ConfigError(f"reps must be >= 100, got {self.reps}")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        needs_sizes = {"power", "hurst-robust", "localization"}
        if self.experiment in needs_sizes and not self.jump_sizes:
            raise ConfigError(f"{self.experiment} requires jump_sizes")
        if self.experiment == "power-gamma":
            if not self.gamma_list:
                raise ConfigError("power-gamma requires gamma_list")
            if any(g <= 0.0 for g in self.gamma_list):
                raise ConfigError("every gamma must be positive")
        if not self.volatility:
            # The null-calibration protocols use the time-varying volatility;
            # the one-jump protocols reproduce the reference tables with a
            # constant unit volatility.
            default = "sine" if self.experiment in {"size", "null-dist"} else "unit"
            object.__setattr__(self, "volatility", default)
        if self.volatility not in {"sine", "unit"}:
            raise ConfigError(f"volatility must be 'sine' or 'unit', got {self.volatility!r}")

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        """Parse a flat key=value config (one pair per line, # comments)."""
        fields = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            fields[key] = value
        known_lists = {"n_list", "hurst_list", "jump_sizes", "gamma_list"}
        kwargs = {}
        for key, value in fields.items():
            if key in known_lists:
                items = [v for v in (s.strip() for s in value.split(",")) if v]
                kwargs[key] = tuple(float(v) for v in items)
            elif key in {"reps", "master_seed", "max_jumps", "workers"}:
                kwargs[key] = int(value)
            elif key in {"p", "alpha"}:
                kwargs[key] = float(value)
            elif key == "filtered":
                kwargs[key] = value.lower() in {"1", "true", "yes"}
            elif key in {"experiment", "out_dir", "volatility"}:
                kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        kwargs.update(overrides)
        return cls(**kwargs)

    def canonical_text(self) -> str:
        lines = [
            f"experiment={self.experiment}",
            "n_list=" + ",".join(str(n) for n in self.n_list),
            "hurst_list=" + ",".join(_fmt(h) for h in self.hurst_list),
            f"p={_fmt(self.p)}",
            f"alpha={_fmt(self.alpha)}",
            f"reps={self.reps}",
            "jump_sizes=" + ",".join(_fmt(s) for s in self.jump_sizes),
            "gamma_list=" + ",".join(_fmt(g) for g in self.gamma_list),
            f"master_seed={self.master_seed}",
            f"volatility={self.volatility}",
            f"filtered={self.filtered}",
            f"max_jumps={self.max_jumps}",
        ]
        return "\n".join(lines) + "\n"


def binomial_stderr(rate: float, reps: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / reps)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def _rep_streams(master_seed: int, exp_id: int, cell_id: int, rep: int):
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(exp_id, cell_id, rep))
    tau_ss, path_ss = ss.spawn(2)
    return tau_ss, int(path_ss.generate_state(1, np.uint64)[0])


def _chunk_paths(n: int, hurst: float, master_seed: int, exp_id: int, cell_id: int,
                 lo: int, hi: int, volatility: str = "sine"):
    """Per-rep uniform jump indices and jump-free paths for reps [lo, hi)."""
    taus = np.empty(hi - lo, dtype=np.int64)
    seeds = []
    for rep in range(lo, hi):
        tau_ss, path_seed = _rep_streams(master_seed, exp_id, cell_id, rep)
        taus[rep - lo] = np.random.default_rng(tau_ss).integers(1, n)
        seeds.append(path_seed)
    fbm = simulate_fbm_many(n, hurst, seeds)
    if volatility == "unit":
        return taus, fbm
    grid = np.arange(n + 1, dtype=float) / n
    sig = sine_volatility(grid)
    y = np.zeros_like(fbm)
    np.cumsum(sig[:-1] * np.diff(fbm, axis=1), axis=1, out=y[:, 1:])
    return taus, y


def _with_jump(y_row: np.ndarray, u: int, size: float) -> np.ndarray:
    x = y_row.copy()
    x[u:] += size
    return x


def _chunk_records(task) -> tuple:
    """Compute one chunk of replications; pure function of the task tuple."""
    kind, master_seed, exp_id, cell_id, params, lo, hi = task
    n = params["n"]
    hurst = params["hurst"]
    p = params["p"]
    alpha = params["alpha"]
    size = params.get("jump_size", 0.0)
    taus, y = _chunk_paths(n, hurst, master_seed, exp_id, cell_id, lo, hi,
                           params["volatility"])

    records = []
    for i in range(hi - lo):
        u = int(taus[i])
        if kind == "reject":
            x = _with_jump(y[i], u, size) if size != 0.0 else y[i]
            report = test_positive_jumps(x, p=p, alpha=alpha)
            records.append((int(report.reject),))
        elif kind == "null-stat":
            z_null = test_positive_jumps(y[i], p=p, alpha=alpha).normalized
            if size != 0.0:
                x = _with_jump(y[i], u, size)
                z_alt = test_positive_jumps(x, p=p, alpha=alpha).normalized
                records.append((z_null, z_alt))
            else:
                records.append((z_null,))
        elif kind == "hurst":
            x = _with_jump(y[i], u, size) if size != 0.0 else y[i]
            h_hat = hurst_estimate(x).h_hat
            if params["filtered"]:
                report, _ = filtered_hurst_estimate(
                    x, p=p, alpha=alpha, max_jumps=params["max_jumps"]
                )
                records.append((h_hat, report.h_hat))
            else:
                records.append((h_hat,))
        elif kind == "localize":
            x = _with_jump(y[i], u, size) if size != 0.0 else y[i]
            report = test_jumps(x, p=p, alpha=alpha)
            records.append((u, report.argmax_j, int(report.reject)))
        else:
            raise ConfigError(f"unknown chunk kind {kind!r}")
    return cell_id, lo, records


def _collect(cfg: ExperimentConfig, kind: str, cells: list[dict]) -> list[list[tuple]]:
    """Run all (cell, chunk) tasks and return per-cell records ordered by rep."""
    exp_id = _EXPERIMENT_IDS[cfg.experiment]
    tasks = []
    for cell_id, params in enumerate(cells):
        for lo in range(0, cfg.reps, _CHUNK):
            hi = min(lo + _CHUNK, cfg.reps)
            tasks.append((kind, cfg.master_seed, exp_id, cell_id, params, lo, hi))
    results: dict[tuple[int, int], list[tuple]] = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for cell_id, lo, records in pool.map(_chunk_records, tasks, chunksize=1):
                results[(cell_id, lo)] = records
    else:
        for task in tasks:
            cell_id, lo, records = _chunk_records(task)
            results[(cell_id, lo)] = records
    per_cell: list[list[tuple]] = []
    for cell_id in range(len(cells)):
        merged: list[tuple] = []
        for lo in range(0, cfg.reps, _CHUNK):
            merged.extend(results[(cell_id, lo)])
        per_cell.append(merged)
    return per_cell


def _cell_params(cfg: ExperimentConfig, **extra) -> dict:
    base = {"p": cfg.p, "alpha": cfg.alpha, "filtered": cfg.filtered,
            "max_jumps": cfg.max_jumps, "volatility": cfg.volatility}
    base.update(extra)
    return base


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_size(cfg: ExperimentConfig) -> list[Path]:
    """Empirical rejection rate of the positive-jump test on jump-free paths."""
    cells = [
        _cell_params(cfg, n=n, hurst=h, jump_size=0.0)
        for h in cfg.hurst_list
        for n in cfg.n_list
    ]
    per_cell = _collect(cfg, "reject", cells)
    rows = []
    for params, records in zip(cells, per_cell):
        rate = sum(r[0] for r in records) / cfg.reps
        rows.append((params["hurst"], params["n"], cfg.reps, cfg.p, rate,
                     binomial_stderr(rate, cfg.reps)))
    path = _write_csv(_out_dir(cfg) / "size.csv",
                      ["H", "n", "reps", "p", "rejection_rate", "mc_stderr"], rows)
    return [path]


def run_power(cfg: ExperimentConfig) -> list[Path]:
    """Power against one fixed-size jump at a uniform grid time.

    A zero jump size runs the null protocol, so that row reproduces the size.
    """
    cells = [
        _cell_params(cfg, n=n, hurst=h, jump_size=s)
        for h in cfg.hurst_list
        for n in cfg.n_list
        for s in cfg.jump_sizes
    ]
    per_cell = _collect(cfg, "reject", cells)
    rows = []
    for params, records in zip(cells, per_cell):
        rate = sum(r[0] for r in records) / cfg.reps
        rows.append((params["hurst"], params["n"], params["jump_size"], cfg.reps,
                     cfg.p, rate, binomial_stderr(rate, cfg.reps)))
    path = _write_csv(_out_dir(cfg) / "power.csv",
                      ["H", "n", "jump_size", "reps", "p", "power", "mc_stderr"], rows)
    return [path]


def run_power_gamma(cfg: ExperimentConfig) -> list[Path]:
    """Power against shrinking jump sizes sqrt(2 log n) n^{-gamma}."""
    cells = []
    for h in cfg.hurst_list:
        for n in cfg.n_list:
            for g in cfg.gamma_list:
                size = math.sqrt(2.0 * math.log(n)) * float(n) ** (-g)
                cells.append(_cell_params(cfg, n=n, hurst=h, jump_size=size, gamma=g))
    per_cell = _collect(cfg, "reject", cells)
    rows = []
    for params, records in zip(cells, per_cell):
        rate = sum(r[0] for r in records) / cfg.reps
        rows.append((params["hurst"], params["n"], params["gamma"],
                     params["jump_size"], rate, binomial_stderr(rate, cfg.reps)))
    path = _write_csv(_out_dir(cfg) / "power_gamma.csv",
                      ["H", "n", "gamma", "jump_size", "power", "mc_stderr"], rows)
    return [path]


def run_null_dist(cfg: ExperimentConfig) -> list[Path]:
    """Raw normalized statistics per replication, one file per (H, n) cell.

    With a jump size configured, a second column holds the statistic on the
    same path with one uniformly-timed jump added.
    """
    size = cfg.jump_sizes[0] if cfg.jump_sizes else 0.0
    cells = [
        _cell_params(cfg, n=n, hurst=h, jump_size=size)
        for h in cfg.hurst_list
        for n in cfg.n_list
    ]
    per_cell = _collect(cfg, "null-stat", cells)
    out = _out_dir(cfg)
    paths = []
    for params, records in zip(cells, per_cell):
        header = ["null_stat", "alt_stat"] if size != 0.0 else ["null_stat"]
        name = f"null_dist_H{params['hurst']:g}_n{params['n']}.csv"
        paths.append(_write_csv(out / name, header, records))
    return paths


def run_hurst_robust(cfg: ExperimentConfig) -> list[Path]:
    """Hurst estimates under one uniformly-timed jump of each configured size."""
    n = cfg.n_list[0]
    cells = [
        _cell_params(cfg, n=n, hurst=h, jump_size=s)
        for h in cfg.hurst_list
        for s in cfg.jump_sizes
    ]
    per_cell = _collect(cfg, "hurst", cells)
    header = ["H", "jump_size", "rep", "h_hat"]
    if cfg.filtered:
        header.append("h_hat_filtered")
    rows = []
    for params, records in zip(cells, per_cell):
        for rep, rec in enumerate(records):
            rows.append((params["hurst"], params["jump_size"], rep) + rec)
    path = _write_csv(_out_dir(cfg) / "hurst_robust.csv", header, rows)
    return [path]


def run_localization(cfg: ExperimentConfig) -> list[Path]:
    """Jump-time estimation error per replication, with the test decision."""
    cells = [
        _cell_params(cfg, n=n, hurst=h, jump_size=s)
        for h in cfg.hurst_list
        for n in cfg.n_list
        for s in cfg.jump_sizes
    ]
    per_cell = _collect(cfg, "localize", cells)
    rows = []
    for params, records in zip(cells, per_cell):
        n = params["n"]
        for rep, (u, j_hat, rejected) in enumerate(records):
            rows.append((params["hurst"], n, params["jump_size"], rep, u / n,
                         j_hat / n, abs(j_hat - u), rejected))
    path = _write_csv(
        _out_dir(cfg) / "localization.csv",
        ["H", "n", "jump_size", "rep", "tau", "tau_hat",
         "abs_err_in_grid_units", "rejected"],
        rows,
    )
    return [path]


_RUNNERS = {
    "size": run_size,
    "power": run_power,
    "power-gamma": run_power_gamma,
    "null-dist": run_null_dist,
    "hurst-robust": run_hurst_robust,
    "localization": run_localization,
}


def run(cfg: ExperimentConfig) -> list[Path]:
    """Run the configured experiment, write its CSVs and a manifest."""
    outputs = _RUNNERS[cfg.experiment](cfg)
    text = cfg.canonical_text()
    manifest = "\n".join(
        [
            f"experiment = {cfg.experiment}",
            f"config_sha256 = {hashlib.sha256(text.encode()).hexdigest()}",
            f"master_seed = {cfg.master_seed}",
            f"fracjump_version = {__version__}",
            f"python_version = {sys.version.split()[0]}",
            f"numpy_version = {np.__version__}",
            "outputs = " + ",".join(p.name for p in outputs),
        ]
    )
    manifest_path = _out_dir(cfg) / "manifest.txt"
    manifest_path.write_text(manifest + "\n")
    return outputs + [manifest_path]
