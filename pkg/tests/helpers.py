"""Shared Monte Carlo plumbing for the test suite.

Paths are generated in chunks through the public batch API with per-rep
seeds derived from a test-local seed sequence, so every MC test is fully
reproducible and independent of chunking.
"""
from __future__ import annotations

import numpy as np

from fracjump import simulate_fbm_many, sine_volatility


def rep_seeds(reps: int, seed: int, tag: int = 0) -> list[int]:
    out = []
    for rep in range(reps):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(tag, rep))
        out.append(int(ss.generate_state(1, np.uint64)[0]))
    return out


def fbm_paths(n: int, hurst: float, reps: int, seed: int, tag: int = 0,
              chunk: int = 256):
    """Yield (rep_offset, paths) chunks of fBm sample paths."""
    seeds = rep_seeds(reps, seed, tag)
    for lo in range(0, reps, chunk):
        yield lo, simulate_fbm_many(n, hurst, seeds[lo:lo + chunk])


def model_paths(n: int, hurst: float, reps: int, seed: int, tag: int = 0,
                volatility: str = "sine", chunk: int = 256):
    """Yield chunks of jump-free observation paths (sigma applied)."""
    grid = np.arange(n + 1, dtype=float) / n
    sig = sine_volatility(grid)
    for lo, fbm in fbm_paths(n, hurst, reps, seed, tag, chunk):
        if volatility == "unit":
            yield lo, fbm
        else:
            y = np.zeros_like(fbm)
            np.cumsum(sig[:-1] * np.diff(fbm, axis=1), axis=1, out=y[:, 1:])
            yield lo, y


def uniform_grid_taus(n: int, reps: int, seed: int, tag: int = 1) -> np.ndarray:
    """Per-rep jump indices drawn uniformly on {1, ..., n-1}."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(tag,)))
    return rng.integers(1, n, size=reps)


def add_jump_at(path: np.ndarray, u: int, size: float) -> np.ndarray:
    x = path.copy()
    x[u:] += size
    return x
