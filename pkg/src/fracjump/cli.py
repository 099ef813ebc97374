"""Command-line interface.

Subcommands cover the full workflow: ``simulate`` writes one sample path as
CSV, ``test``/``hurst``/``localize`` consume such a CSV, ``mc`` runs a Monte
Carlo experiment from a flat key=value config, and ``report`` renders figures
for an experiment output directory.
"""
from __future__ import annotations

import csv
from pathlib import Path

import click
import numpy as np

from .hurst import filtered_hurst_estimate, hurst_estimate
from .jump_test import test_jumps, test_positive_jumps
from .localize import sequential_detect
from .mc_harness import EXPERIMENTS, ExperimentConfig, run as run_experiment
from .randpath import JumpSpec, ProcessConfig, synthesize


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _read_x(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "x" not in reader.fieldnames:
            raise click.ClickException(f"{path} has no 'x' column")
        return np.array([float(row["x"]) for row in reader])


@click.group()
@click.version_option()
def main() -> None:
    """Jump tests and jump-robust Hurst inference for fractional processes."""


@main.command()
@click.option("--n", type=int, required=True, help="Number of grid steps.")
@click.option("--hurst", type=float, required=True, help="Hurst exponent in (0, 1).")
@click.option("--p", type=float, default=0.9, show_default=True,
              help="Power parameter; unused by synthesis, accepted so one flag "
                   "set drives all subcommands.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jump", "jumps", multiple=True, metavar="T:SIZE",
              help="Add a jump of SIZE at time T in (0, 1); repeatable.")
@click.option("--method", type=click.Choice(["cholesky", "circulant"]),
              default="cholesky", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def simulate(n, hurst, p, seed, jumps, method, out_path):
    """Simulate one observed path and write it as CSV (k,t,fbm,y,j,x)."""
    pairs = []
    for item in jumps:
        try:
            t_str, s_str = item.split(":", 1)
            pairs.append((float(t_str), float(s_str)))
        except ValueError as exc:
            raise click.ClickException(f"bad --jump {item!r}, expected T:SIZE") from exc
    config = ProcessConfig(n=n, hurst=hurst, seed=seed)
    bundle = synthesize(config, JumpSpec(tuple(pairs)), method=method)
    lines = ["k,t,fbm,y,j,x"]
    for k in range(n + 1):
        lines.append(
            f"{k},{_fmt(bundle.grid[k])},{_fmt(bundle.fbm[k])},"
            f"{_fmt(bundle.y[k])},{_fmt(bundle.j[k])},{_fmt(bundle.x[k])}"
        )
    Path(out_path).write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {out_path}")


@main.command("test")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--kind", type=click.Choice(["pos", "two"]), default="two",
              show_default=True, help="One-sided (positive jumps) or two-sided.")
@click.option("--p", type=float, default=0.9, show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--h-n", type=int, default=None,
              help="Block length; defaults to floor(n^(2/3)).")
def test_cmd(in_path, kind, p, alpha, h_n):
    """Run a Gumbel jump test on the x column of a simulate CSV."""
    x = _read_x(in_path)
    runner = test_positive_jumps if kind == "pos" else test_jumps
    report = runner(x, p=p, h_n=h_n, alpha=alpha)
    click.echo(
        f"{kind},{_fmt(report.raw_stat)},{_fmt(report.normalized)},"
        f"{_fmt(report.p_value)},{report.reject},{report.argmax_j}"
    )


@main.command("hurst")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--filter-jumps", is_flag=True, default=False,
              help="Detect jumps sequentially and exclude flagged increments.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--p", type=float, default=0.9, show_default=True)
@click.option("--h-n", type=int, default=None)
@click.option("--max-jumps", type=int, default=10, show_default=True)
def hurst_cmd(in_path, filter_jumps, alpha, p, h_n, max_jumps):
    """Estimate the Hurst exponent from the x column of a simulate CSV."""
    x = _read_x(in_path)
    if filter_jumps:
        report, detections = filtered_hurst_estimate(
            x, p=p, h_n=h_n, alpha=alpha, max_jumps=max_jumps
        )
        n_dropped = len(detections)
    else:
        report = hurst_estimate(x)
        n_dropped = 0
    click.echo(
        f"{_fmt(report.h_hat)},{_fmt(report.rv_lag1)},{_fmt(report.rv_lag2)},"
        f"{n_dropped}"
    )


@main.command("localize")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--p", type=float, default=0.9, show_default=True)
@click.option("--h-n", type=int, default=None)
@click.option("--max-jumps", type=int, default=10, show_default=True)
@click.option("--bonferroni", is_flag=True, default=False,
              help="Divide alpha by max-jumps per detection round.")
def localize_cmd(in_path, alpha, p, h_n, max_jumps, bonferroni):
    """Sequentially detect jumps; one line per detection."""
    x = _read_x(in_path)
    detections = sequential_detect(
        x, p=p, h_n=h_n, alpha=alpha, max_jumps=max_jumps, bonferroni=bonferroni
    )
    for det in detections:
        click.echo(
            f"{det.step},{det.index_j},{_fmt(det.tau_hat)},"
            f"{_fmt(det.size_hat)},{_fmt(det.normalized_stat)}"
        )
    if not detections:
        click.echo("no jumps detected", err=True)


@main.command("mc")
@click.option("--experiment", type=click.Choice(EXPERIMENTS), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Flat key=value config file.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--workers", type=int, default=1, show_default=True)
def mc_cmd(experiment, config_path, out_dir, workers):
    """Run a Monte Carlo experiment; writes CSVs plus manifest.txt."""
    text = Path(config_path).read_text()
    cfg = ExperimentConfig.from_text(
        text, experiment=experiment, out_dir=out_dir, workers=workers
    )
    for path in run_experiment(cfg):
        click.echo(f"wrote {path}")


@main.command("report")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False),
              required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Defaults to the input directory.")
def report_cmd(in_dir, out_dir):
    """Render PNG figures for the experiment CSVs in a directory."""
    from .figures import render_report

    written = render_report(in_dir, out_dir)
    if not written:
        raise click.ClickException(f"no known experiment CSVs in {in_dir}")
    for path in written:
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
