"""Jump-time estimation and the sequential top-down multi-jump detector.

A jump at time tau contaminates exactly the two second-order increments with
indices j* = ceil(tau n) and j* + 1, so the argmax of the standardized
absolute second-order increments recovers the jump time up to O(1/n), and
peeling off the two flagged indices per round separates multiple jumps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EstimationError
from .jump_test import gumbel_quantile, norm_sequences, standardized_ratios
from .stats_core import (
    _block_sum_bounds,
    block_partition,
    default_bandwidth,
    gaussian_abs_moment,
    increments,
)

__all__ = ["LocatedJump", "locate_jump", "sequential_detect"]


@dataclass(frozen=True)
class LocatedJump:
    """One detected jump: grid time, index, signed size estimate, round."""

    tau_hat: float
    index_j: int
    size_hat: float
    step: int
    normalized_stat: float


def locate_jump(x: np.ndarray, p: float = 0.9, h_n: int | None = None) -> LocatedJump:
    """Argmax of the standardized absolute second-order increments.

    The index is exactly the two-sided test's argmax and may land on either
    member of the contaminated pair {j*, j*+1}; the size estimate is read off
    the left member, whose signed increment carries the jump's sign.  The
    argmax always exists, so callers must gate on a test decision to use this
    as a detector.
    """
    x = np.asarray(x, dtype=float)
    n = x.size - 1
    ratios = np.abs(standardized_ratios(x, p, h_n))
    i = int(np.argmax(ratios))
    norm = norm_sequences(n)
    z = norm.c_n * (float(ratios[i]) - norm.d_n)
    values = np.diff(x, n=2)
    neighbours = [k for k in (i - 1, i + 1) if 0 <= k < ratios.size]
    left = i
    if neighbours:
        left = min(i, max(neighbours, key=lambda k: ratios[k]))
    return LocatedJump(
        tau_hat=(i + 2) / n,
        index_j=i + 2,
        size_hat=float(values[left]),
        step=1,
        normalized_stat=z,
    )


def sequential_detect(
    x: np.ndarray,
    p: float = 0.9,
    h_n: int | None = None,
    alpha: float = 0.05,
    max_jumps: int = 10,
    bonferroni: bool = False,
) -> list[LocatedJump]:
    """Detect up to ``max_jumps`` jumps by repeated testing and peeling.

    Each round runs the two-sided Gumbel test on the surviving second-order
    increments: block averages are recomputed over the surviving indices with
    correspondingly reduced counts, and the normalizing sequences use the
    surviving effective sample size, so the first round is exactly the plain
    two-sided test.  On rejection the argmax index j* is recorded and indices
    {j*, j*+1} are removed before the next round.  ``bonferroni`` divides the
    level by ``max_jumps`` to bound the overall false-detection rate.
    """
    if max_jumps < 1:
        raise ConfigError(f"max_jumps must be >= 1, got {max_jumps}")
    x = np.asarray(x, dtype=float)
    n = x.size - 1
    if h_n is None:
        h_n = default_bandwidth(n)
    level = alpha / max_jumps if bonferroni else alpha
    threshold = gumbel_quantile(level)

    inc2 = increments(x, 2)
    values = inc2.values
    abs_p = np.abs(values) ** p
    owner = block_partition(n, h_n)
    m = n // h_n
    c_p = gaussian_abs_moment(p)
    lo, hi = _block_sum_bounds(m, h_n)

    keep = np.ones(values.size, dtype=bool)
    detections: list[LocatedJump] = []
    for step in range(1, max_jumps + 1):
        n_eff = n - int((~keep).sum())
        if n_eff < 8:
            raise EstimationError("too few surviving increments to keep testing")
        cs = np.concatenate(([0.0], np.cumsum(np.where(keep, abs_p, 0.0))))
        ck = np.concatenate(([0], np.cumsum(keep.astype(np.int64))))
        sums = cs[hi + 1] - cs[lo]
        kept_counts = ck[hi + 1] - ck[lo]
        if np.any(kept_counts == 0):
            bad = int(np.nonzero(kept_counts == 0)[0][0]) + 1
            raise EstimationError(f"block {bad} lost all of its increments")
        if np.any(sums <= 0.0):
            bad = int(np.nonzero(sums <= 0.0)[0][0]) + 1
            raise EstimationError(f"block {bad} has zero power variation")
        avg = sums / ((kept_counts + 1) * c_p)

        ratios = np.abs(values) / avg[owner - 1] ** (1.0 / p)
        ratios[~keep] = -np.inf
        i = int(np.argmax(ratios))
        norm = norm_sequences(n_eff)
        z = norm.c_n * (float(ratios[i]) - norm.d_n)
        if z < threshold:
            break
        # A jump contaminates the pair {j*, j*+1} with opposite signs, and
        # the argmax may land on either member.  The companion is the
        # surviving neighbour with the larger ratio; the left member is j*
        # and its signed increment estimates the jump size.
        neighbours = [k for k in (i - 1, i + 1) if 0 <= k < keep.size and keep[k]]
        pair = [i]
        if neighbours:
            pair.append(max(neighbours, key=lambda k: ratios[k]))
        left = min(pair)
        j_star = left + 2
        detections.append(
            LocatedJump(
                tau_hat=j_star / n,
                index_j=j_star,
                size_hat=float(values[left]),
                step=step,
                normalized_stat=z,
            )
        )
        for k in pair:
            keep[k] = False
    return detections
