"""Increment transforms, Gaussian constants, block conventions, and the
block-wise power-variation spot-volatility estimator.

All inference routines in this package standardize second-order increments

    D2[j] = x[j] - 2 x[j-1] + x[j-2],    j = 2, ..., n,

by local block averages of |D2|^p with a small power p <= 1, which makes the
normalization robust to additive jumps without knowing the Hurst exponent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, DomainError, EstimationError

__all__ = [
    "IncrementSeries",
    "BlockVolEstimates",
    "increments",
    "gaussian_abs_moment",
    "second_diff_var",
    "second_diff_autocov",
    "default_bandwidth",
    "block_partition",
    "spot_vol_blocks",
]


@dataclass(frozen=True)
class IncrementSeries:
    """First- or second-order differences of a path sampled on {k/n}.

    ``values[i]`` holds the increment with index j = i + order, so order-1
    series run over j = 1..n and order-2 series over j = 2..n.
    """

    order: int
    values: np.ndarray
    n: int

    @property
    def j_indices(self) -> np.ndarray:
        return np.arange(self.order, self.n + 1)


@dataclass(frozen=True)
class BlockVolEstimates:
    """Per-block unscaled power-variation averages.

    ``unscaled[k-1]`` is  (1/h_n) C_p^{-1} sum |D2[i]|^p  over the block-k
    index range i = (k-1)h_n + 2 .. k h_n.  ``scaled_for_h`` multiplies by
    n^{pH} when a Hurst exponent was supplied, which turns the averages into
    estimates of C_H^{p/2} sigma^p at the block endpoints.
    """

    h_n: int
    m: int
    p: float
    n: int
    unscaled: np.ndarray
    scaled_for_h: np.ndarray | None = None


def increments(path: np.ndarray, order: int) -> IncrementSeries:
    """First (order=1) or second (order=2) differences of a grid path."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    path = np.asarray(path, dtype=float)
    if path.ndim != 1 or path.size < order + 1:
        raise ContractError(
            f"path of length {path.size} too short for order-{order} increments"
        )
    values = np.diff(path, n=order)
    return IncrementSeries(order=order, values=values, n=path.size - 1)


def gaussian_abs_moment(p: float) -> float:
    """p-th absolute moment of a standard normal, 2^{p/2} Gamma((p+1)/2) / sqrt(pi)."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    return 2.0 ** (p / 2.0) * math.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi)


def second_diff_var(hurst: float) -> float:
    """Variance 4 - 2^{2H} of unit-spacing second-order fBm increments."""
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    return 4.0 - 2.0 ** (2.0 * hurst)


def second_diff_autocov(k: int, hurst: float) -> float:
    """Autocovariance at lag k of unit-spacing second-order fBm increments.

    rho(k) = (4|k+1|^{2H} + 4|k-1|^{2H} - 6|k|^{2H} - |k+2|^{2H} - |k-2|^{2H}) / 2,
    with rho(0) = 4 - 2^{2H} and squared decay rho(k)^2 ~ k^{4H-8}.
    """
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    if k < 0:
        raise DomainError(f"lag must be >= 0, got {k}")
    tw = 2.0 * hurst

    def a(x: int) -> float:
        return abs(float(x)) ** tw

    return 0.5 * (4.0 * a(k + 1) + 4.0 * a(k - 1) - 6.0 * a(k) - a(k + 2) - a(k - 2))


def default_bandwidth(n: int) -> int:
    """Exact floor(n^(2/3)), computed in integer arithmetic."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    k = round((n * n) ** (1.0 / 3.0))
    while (k + 1) ** 3 <= n * n:
        k += 1
    while k > 0 and k ** 3 > n * n:
        k -= 1
    return k


def _check_bandwidth(n: int, h_n: int) -> int:
    if h_n < 3 or h_n >= n:
        raise ConfigError(f"bandwidth h_n={h_n} must satisfy 3 <= h_n < n={n}")
    return n // h_n


def block_partition(n: int, h_n: int) -> np.ndarray:
    """Block id k for every second-order index j = 2..n (entry j-2).

    Block 1 owns j in [2, h_n); block k in 2..m owns j in [(k-1)h_n, k h_n);
    the residual indices j in [m h_n, n] are mapped to block m, so every j
    has a well-defined denominator block.  m = floor(n / h_n).
    """
    m = _check_bandwidth(n, h_n)
    j = np.arange(2, n + 1)
    return np.minimum(j // h_n + 1, m)


def _block_sum_bounds(m: int, h_n: int) -> tuple[np.ndarray, np.ndarray]:
    # Offsets into the order-2 value array (index j-2) of the block-k
    # summation range i = (k-1)h_n + 2 .. k h_n, i.e. h_n - 1 terms each.
    k = np.arange(1, m + 1)
    lo = (k - 1) * h_n
    hi = k * h_n - 2  # inclusive
    return lo, hi


def spot_vol_blocks(
    inc2: IncrementSeries,
    h_n: int,
    p: float,
    hurst: float | None = None,
) -> BlockVolEstimates:
    """Block averages of |D2|^p over i = (k-1)h_n+2 .. k h_n, for k = 1..m.

    Each average is divided by h_n (not the h_n - 1 term count) and by the
    Gaussian moment C_p.  Raises EstimationError when a block sum vanishes,
    which happens exactly for locally affine paths.
    """
    if inc2.order != 2:
        raise ContractError("spot_vol_blocks requires order-2 increments")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    m = _check_bandwidth(inc2.n, h_n)
    c_p = gaussian_abs_moment(p)

    abs_p = np.abs(inc2.values) ** p
    cs = np.concatenate(([0.0], np.cumsum(abs_p)))
    lo, hi = _block_sum_bounds(m, h_n)
    sums = cs[hi + 1] - cs[lo]
    if np.any(sums <= 0.0):
        bad = int(np.nonzero(sums <= 0.0)[0][0]) + 1
        raise EstimationError(f"block {bad} has zero power variation (constant path?)")
    unscaled = sums / (h_n * c_p)

    scaled = None
    if hurst is not None:
        if not 0.0 < hurst < 1.0:
            raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
        scaled = float(inc2.n) ** (p * hurst) * unscaled
    return BlockVolEstimates(
        h_n=h_n, m=m, p=p, n=inc2.n, unscaled=unscaled, scaled_for_h=scaled
    )
