"""Exact simulation of fractional Brownian motion and synthesis of the
observed process x = y + j on the grid {k/n}.

The driving noise is fractional Gaussian noise (fGn) generated from the
Cholesky factor of its exact covariance matrix, so sample paths are exact in
distribution.  The smooth component is the pathwise integral of a volatility
function against the fBm, discretized with left-point sums, and a cadlag
step function of jumps is added on top.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import ConfigError, ContractError, DomainError, SimulationError

__all__ = [
    "sine_volatility",
    "ProcessConfig",
    "JumpSpec",
    "PathBundle",
    "fgn_autocov",
    "grid_index",
    "simulate_fbm",
    "simulate_fbm_many",
    "integral_process",
    "add_jumps",
    "synthesize",
    "cache_stats",
    "clear_cache",
]


def sine_volatility(t):
    """Volatility 1 - 0.2 sin(3 pi t / 4), Lipschitz on [0, 1], range [0.8, 1]."""
    return 1.0 - 0.2 * np.sin(0.75 * np.pi * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ProcessConfig:
    """Sampling configuration for one path of the observation model.

    n grid steps give observations at k/n for k = 0..n.  ``sigma_fn`` must be
    positive and bounded on the grid; ``alpha_holder`` is its declared Holder
    regularity in (0, 1].  ``oversample`` > 1 simulates the driving fBm on a
    finer grid before building the integral, for discretization sensitivity
    checks only.
    """

    n: int
    hurst: float
    sigma_fn: Callable = sine_volatility
    alpha_holder: float = 1.0
    seed: int = 0
    oversample: int = 1

    def __post_init__(self) -> None:
        if self.n < 8:
            raise ConfigError(f"n must be >= 8, got {self.n}")
        if not 0.0 < self.hurst < 1.0:
            raise DomainError(f"hurst must lie in (0, 1), got {self.hurst}")
        if not 0.0 < self.alpha_holder <= 1.0:
            raise ConfigError(
                f"alpha_holder must lie in (0, 1], got {self.alpha_holder}"
            )
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.oversample < 1:
            raise ConfigError(f"oversample must be >= 1, got {self.oversample}")
        sig = self.sigma_on_grid()
        if not np.all(np.isfinite(sig)) or sig.min() <= 0.0:
            raise ConfigError("sigma_fn must be positive and finite on the grid")

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.n + 1, dtype=float) / self.n

    def sigma_on_grid(self, grid: np.ndarray | None = None) -> np.ndarray:
        g = self.grid if grid is None else grid
        sig = np.asarray(self.sigma_fn(g), dtype=float)
        if sig.ndim == 0:
            sig = np.full(g.shape, float(sig))
        if sig.shape != g.shape:
            raise ContractError("sigma_fn must map the grid to an equal-length array")
        return sig


def grid_index(tau: float, n: int) -> int:
    """Smallest k with k/n >= tau; equals ceil(tau * n) in exact arithmetic.

    Float-guarded so that grid-valued tau = u/n maps to u exactly.
    """
    if not 0.0 < tau < 1.0:
        raise DomainError(f"jump time must lie in (0, 1), got {tau}")
    j = math.ceil(tau * n)
    while j > 0 and (j - 1) / n >= tau:
        j -= 1
    while j <= n and j / n < tau:
        j += 1
    return j


@dataclass(frozen=True)
class JumpSpec:
    """Finite list of (time, size) pairs defining a cadlag pure-jump path.

    Times must be strictly inside (0, 1) and sizes nonzero.  A jump at tau
    first affects grid index grid_index(tau, n); two jumps may not share a
    grid cell.
    """

    jumps: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        norm = tuple((float(t), float(s)) for t, s in self.jumps)
        object.__setattr__(self, "jumps", norm)
        for tau, size in norm:
            if not 0.0 < tau < 1.0:
                raise ConfigError(f"jump time must lie in (0, 1), got {tau}")
            if size == 0.0 or not math.isfinite(size):
                raise ConfigError(f"jump size must be nonzero and finite, got {size}")

    def __len__(self) -> int:
        return len(self.jumps)

    def grid_indices(self, n: int) -> list[int]:
        idx = [grid_index(tau, n) for tau, _ in self.jumps]
        if len(set(idx)) != len(idx):
            raise ConfigError("two jumps fall in the same grid cell")
        return idx


@dataclass(frozen=True)
class PathBundle:
    """Aligned sample paths on the grid {k/n}: driver, smooth part, jumps, sum."""

    grid: np.ndarray
    fbm: np.ndarray
    y: np.ndarray
    j: np.ndarray
    x: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.size - 1


def fgn_autocov(k: int, hurst: float) -> float:
    """Autocovariance (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2 of unit-spacing
    fBm increments at lag k."""
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    if k < 0:
        raise DomainError(f"lag must be >= 0, got {k}")
    tw = 2.0 * hurst
    return 0.5 * (
        abs(k + 1.0) ** tw - 2.0 * abs(float(k)) ** tw + abs(k - 1.0) ** tw
    )


# Cholesky factors of the unit-spacing fGn covariance, keyed by (n, H).
# Computed once per key; safe for concurrent readers.
_FACTORS: dict[tuple[int, float], np.ndarray] = {}
_FACTORS_LOCK = threading.Lock()
_CACHE_HITS = 0
_CACHE_MISSES = 0


def _fgn_cholesky(n: int, hurst: float) -> np.ndarray:
    global _CACHE_HITS, _CACHE_MISSES
    key = (n, float(hurst))
    factor = _FACTORS.get(key)
    if factor is not None:
        _CACHE_HITS += 1
        return factor
    with _FACTORS_LOCK:
        factor = _FACTORS.get(key)
        if factor is not None:
            _CACHE_HITS += 1
            return factor
        lags = np.arange(n)
        row = 0.5 * (
            (lags + 1.0) ** (2 * hurst)
            - 2.0 * lags ** (2 * hurst)
            + np.abs(lags - 1.0) ** (2 * hurst)
        )
        cov = scipy.linalg.toeplitz(row)
        try:
            factor = scipy.linalg.cholesky(cov, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise SimulationError(
                f"fGn covariance factorization failed for n={n}, H={hurst}: {exc}"
            ) from exc
        _CACHE_MISSES += 1
        _FACTORS[key] = factor
        return factor


def cache_stats() -> dict[str, int]:
    """Hit/miss counters of the Cholesky factor cache."""
    return {"hits": _CACHE_HITS, "misses": _CACHE_MISSES, "entries": len(_FACTORS)}


def clear_cache() -> None:
    global _CACHE_HITS, _CACHE_MISSES
    with _FACTORS_LOCK:
        _FACTORS.clear()
        _CACHE_HITS = 0
        _CACHE_MISSES = 0


def _fgn_circulant(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    # Circulant embedding of the fGn covariance; exact when all embedding
    # eigenvalues are nonnegative, which holds for fGn across H in (0, 1).
    lags = np.arange(n + 1)
    row = 0.5 * (
        (lags + 1.0) ** (2 * hurst)
        - 2.0 * lags ** (2 * hurst)
        + np.abs(lags - 1.0) ** (2 * hurst)
    )
    circ = np.concatenate([row, row[-2:0:-1]])
    eig = np.fft.fft(circ).real
    if eig.min() < -1e-8 * eig.max():
        raise SimulationError(
            f"circulant embedding not nonnegative definite for n={n}, H={hurst}"
        )
    eig = np.clip(eig, 0.0, None)
    m = circ.size
    # proper complex Gaussian: Re fft(sqrt(lam/M) (Z + iZ')) has covariance gamma
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(eig / m) * z)
    return w.real[:n]


def simulate_fbm(config: ProcessConfig, method: str = "cholesky") -> np.ndarray:
    """One sample path of B^H at k/n, k = 0..n, exact in distribution.

    The unit-spacing fGn vector is L z with z iid standard normal and L the
    lower Cholesky factor of the fGn covariance; the cumulative sum is then
    scaled by n^{-H} via self-similarity.  ``method="circulant"`` swaps in an
    FFT-based generator with the same distribution, useful for large n.
    """
    rng = np.random.default_rng(config.seed)
    n, hurst = config.n, config.hurst
    if method == "cholesky":
        fgn = _fgn_cholesky(n, hurst) @ rng.standard_normal(n)
    elif method == "circulant":
        fgn = _fgn_circulant(n, hurst, rng)
    else:
        raise ConfigError(f"unknown simulation method {method!r}")
    path = np.empty(n + 1)
    path[0] = 0.0
    np.cumsum(fgn, out=path[1:])
    path[1:] *= float(n) ** (-hurst)
    return path


def simulate_fbm_many(
    n: int, hurst: float, seeds: Sequence[int], method: str = "cholesky"
) -> np.ndarray:
    """Batch of fBm paths, one row per seed, each drawn from its own stream.

    Row i equals the path of seed i in distribution and is a deterministic
    function of (n, hurst, seeds[i]) alone, so results do not depend on how
    a caller chunks the batch across workers.
    """
    if not 0.0 < hurst < 1.0:
        raise DomainError(f"hurst must lie in (0, 1), got {hurst}")
    noise = np.empty((n, len(seeds)))
    for i, seed in enumerate(seeds):
        noise[:, i] = np.random.default_rng(int(seed)).standard_normal(n)
    if method == "cholesky":
        fgn = _fgn_cholesky(n, hurst) @ noise
    elif method == "circulant":
        fgn = np.empty_like(noise)
        for i, seed in enumerate(seeds):
            fgn[:, i] = _fgn_circulant(n, hurst, np.random.default_rng(int(seed)))
    else:
        raise ConfigError(f"unknown simulation method {method!r}")
    paths = np.zeros((len(seeds), n + 1))
    np.cumsum(fgn.T, axis=1, out=paths[:, 1:])
    paths[:, 1:] *= float(n) ** (-hurst)
    return paths


def integral_process(config: ProcessConfig, fbm: np.ndarray) -> np.ndarray:
    """Left-point Riemann-Stieltjes sums of sigma against the fBm increments."""
    fbm = np.asarray(fbm, dtype=float)
    if fbm.shape != (config.n + 1,):
        raise ContractError(
            f"fbm has length {fbm.size}, expected n+1 = {config.n + 1}"
        )
    sig = config.sigma_on_grid()
    y = np.empty(config.n + 1)
    y[0] = 0.0
    np.cumsum(sig[:-1] * np.diff(fbm), out=y[1:])
    return y


def add_jumps(
    y: np.ndarray,
    spec: JumpSpec,
    n: int,
    fbm: np.ndarray | None = None,
) -> PathBundle:
    """Overlay the step function of ``spec`` on y and assemble the bundle.

    A jump (tau, size) raises the path by size at every grid point k/n >= tau.
    When the driving fBm is not supplied (unit-volatility callers), the y path
    is stored in its place.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (n + 1,):
        raise ContractError(f"y has length {y.size}, expected n+1 = {n + 1}")
    j = np.zeros(n + 1)
    for idx, (_, size) in zip(spec.grid_indices(n), spec.jumps):
        j[idx:] += size
    x = y + j
    grid = np.arange(n + 1, dtype=float) / n
    fbm_arr = y if fbm is None else np.asarray(fbm, dtype=float)
    if fbm_arr.shape != (n + 1,):
        raise ContractError("fbm has wrong length for the bundle")
    return PathBundle(grid=grid, fbm=fbm_arr, y=y, j=j, x=x)


def synthesize(
    config: ProcessConfig,
    spec: JumpSpec | None = None,
    method: str = "cholesky",
) -> PathBundle:
    """Simulate the full observation bundle: fBm driver, integral, jumps.

    With oversample = m > 1 the driver and the integral are built on the
    m-times finer grid and subsampled back, leaving the fBm marginals exact
    and shrinking the integral discretization error.
    """
    spec = JumpSpec() if spec is None else spec
    if config.oversample == 1:
        fbm = simulate_fbm(config, method=method)
        y = integral_process(config, fbm)
        return add_jumps(y, spec, config.n, fbm=fbm)

    m = config.oversample
    fine = ProcessConfig(
        n=config.n * m,
        hurst=config.hurst,
        sigma_fn=config.sigma_fn,
        alpha_holder=config.alpha_holder,
        seed=config.seed,
    )
    fbm_fine = simulate_fbm(fine, method=method)
    y_fine = integral_process(fine, fbm_fine)
    return add_jumps(y_fine[::m], spec, config.n, fbm=fbm_fine[::m])
