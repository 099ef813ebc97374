"""Figure rendering for experiment outputs.

Consumes the CSV artifacts written by the experiment runner and renders one
PNG per table next to the delimited output: null-distribution histograms
against the Gumbel density, size and power curves with binomial error bars,
Hurst-robustness boxplots, and localization error histograms.
"""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_report"]

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.0),
        "figure.dpi": 120,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 9,
        "legend.fontsize": 8,
    }
)


def _read_csv(path: Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    cols = {name: np.array([float(r[i]) for r in rows]) for i, name in enumerate(header)}
    return cols


def _save(fig, out_path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def _gumbel_pdf(z: np.ndarray) -> np.ndarray:
    return np.exp(-z - np.exp(-z))


def plot_null_dist(csv_path: Path, out_path: Path) -> Path:
    cols = _read_csv(csv_path)
    fig, ax = plt.subplots()
    ax.hist(cols["null_stat"], bins=40, density=True, alpha=0.6, label="null")
    if "alt_stat" in cols:
        ax.hist(cols["alt_stat"], bins=40, density=True, alpha=0.6, label="with jump")
    z = np.linspace(-4.0, max(8.0, float(np.max(cols["null_stat"]))), 400)
    ax.plot(z, _gumbel_pdf(z), "k-", lw=1.2, label="Gumbel density")
    ax.set_xlabel("normalized statistic")
    ax.set_ylabel("density")
    ax.legend()
    ax.set_title(csv_path.stem.replace("_", " "))
    return _save(fig, out_path)


def plot_size(csv_path: Path, out_path: Path) -> Path:
    cols = _read_csv(csv_path)
    fig, ax = plt.subplots()
    for h in np.unique(cols["H"]):
        mask = cols["H"] == h
        order = np.argsort(cols["n"][mask])
        ax.errorbar(
            cols["n"][mask][order],
            cols["rejection_rate"][mask][order],
            yerr=2 * cols["mc_stderr"][mask][order],
            marker="o",
            capsize=3,
            label=f"H={h:g}",
        )
    ax.set_xlabel("n")
    ax.set_ylabel("empirical size")
    ax.legend()
    ax.set_title("rejection rate under the null")
    return _save(fig, out_path)


def plot_power(csv_path: Path, out_path: Path) -> Path:
    cols = _read_csv(csv_path)
    fig, ax = plt.subplots()
    for h in np.unique(cols["H"]):
        for n in np.unique(cols["n"]):
            mask = (cols["H"] == h) & (cols["n"] == n)
            if not mask.any():
                continue
            order = np.argsort(cols["jump_size"][mask])
            ax.errorbar(
                cols["jump_size"][mask][order],
                cols["power"][mask][order],
                yerr=2 * cols["mc_stderr"][mask][order],
                marker="o",
                capsize=3,
                label=f"H={h:g}, n={int(n)}",
            )
    ax.set_xlabel("jump size")
    ax.set_ylabel("empirical power")
    ax.set_ylim(0.0, 1.02)
    ax.legend()
    ax.set_title("power against fixed jump sizes")
    return _save(fig, out_path)


def plot_power_gamma(csv_path: Path, out_path: Path) -> Path:
    cols = _read_csv(csv_path)
    fig, ax = plt.subplots()
    for h in np.unique(cols["H"]):
        for n in np.unique(cols["n"]):
            mask = (cols["H"] == h) & (cols["n"] == n)
            if not mask.any():
                continue
            order = np.argsort(cols["gamma"][mask])
            ax.errorbar(
                cols["gamma"][mask][order],
                cols["power"][mask][order],
                yerr=2 * cols["mc_stderr"][mask][order],
                marker="o",
                capsize=3,
                label=f"H={h:g}, n={int(n)}",
            )
    ax.set_xlabel("gamma (jump size sqrt(2 log n) n^-gamma)")
    ax.set_ylabel("empirical power")
    ax.invert_xaxis()
    ax.set_ylim(0.0, 1.02)
    ax.legend()
    ax.set_title("power against shrinking jump sizes")
    return _save(fig, out_path)


def plot_hurst_robust(csv_path: Path, out_path: Path) -> Path:
    cols = _read_csv(csv_path)
    hs = np.unique(cols["H"])
    fig, axes = plt.subplots(1, len(hs), figsize=(4.0 * len(hs), 4.0), squeeze=False)
    for ax, h in zip(axes[0], hs):
        mask_h = cols["H"] == h
        sizes = np.unique(cols["jump_size"][mask_h])
        data = [cols["h_hat"][mask_h & (cols["jump_size"] == s)] for s in sizes]
        ax.boxplot(data, tick_labels=[f"{s:g}" for s in sizes], showfliers=False)
        ax.axhline(h, color="C0", lw=1.0, label="true H")
        ax.axhline(0.5, color="C3", lw=1.0, ls="--", label="1/2")
        ax.set_xlabel("jump size")
        ax.set_ylabel("estimated H")
        ax.set_title(f"H = {h:g}")
        ax.legend()
    return _save(fig, out_path)


def plot_localization(csv_path: Path, out_path: Path) -> Path:
    cols = _read_csv(csv_path)
    rejected = cols["rejected"] > 0.5
    errors = cols["abs_err_in_grid_units"][rejected]
    fig, ax = plt.subplots()
    if errors.size:
        top = int(errors.max())
        ax.hist(errors, bins=np.arange(-0.5, top + 1.5), rwidth=0.85)
    ax.set_xlabel("|index error| in grid units (rejecting reps)")
    ax.set_ylabel("count")
    ax.set_title("jump-time localization error")
    return _save(fig, out_path)


_FIXED = {
    "size.csv": plot_size,
    "power.csv": plot_power,
    "power_gamma.csv": plot_power_gamma,
    "hurst_robust.csv": plot_hurst_robust,
    "localization.csv": plot_localization,
}


def render_report(in_dir, out_dir=None) -> list[Path]:
    """Render figures for every known experiment CSV found in ``in_dir``."""
    in_dir = Path(in_dir)
    out = Path(out_dir) if out_dir is not None else in_dir
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for name, plotter in _FIXED.items():
        src = in_dir / name
        if src.exists():
            written.append(plotter(src, out / (src.stem + ".png")))
    for src in sorted(in_dir.glob("null_dist_*.csv")):
        written.append(plot_null_dist(src, out / (src.stem + ".png")))
    return written
