"""Jump detection, jump-robust Hurst inference, and jump localization for
high-frequency observations of fractional processes with additive jumps."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    EstimationError,
    FracjumpError,
    SimulationError,
)
from .hurst import (
    HurstReport,
    filtered_hurst_estimate,
    hurst_estimate,
    hurst_estimate_excluding,
    scaled_realized_variance,
)
from .jump_test import (
    GumbelNorm,
    TestReport,
    gumbel_pvalue,
    gumbel_quantile,
    norm_sequences,
    r_statistic,
    t_statistic,
    test_jumps,
    test_positive_jumps,
)
from .localize import LocatedJump, locate_jump, sequential_detect
from .randpath import (
    JumpSpec,
    PathBundle,
    ProcessConfig,
    add_jumps,
    fgn_autocov,
    grid_index,
    integral_process,
    simulate_fbm,
    simulate_fbm_many,
    sine_volatility,
    synthesize,
)
from .stats_core import (
    BlockVolEstimates,
    IncrementSeries,
    block_partition,
    default_bandwidth,
    gaussian_abs_moment,
    increments,
    second_diff_autocov,
    second_diff_var,
    spot_vol_blocks,
)

__all__ = [
    "__version__",
    "FracjumpError", "DomainError", "ContractError", "ConfigError",
    "SimulationError", "EstimationError",
    "ProcessConfig", "JumpSpec", "PathBundle", "sine_volatility",
    "fgn_autocov", "grid_index", "simulate_fbm", "simulate_fbm_many",
    "integral_process", "add_jumps", "synthesize",
    "IncrementSeries", "BlockVolEstimates", "increments",
    "gaussian_abs_moment", "second_diff_var", "second_diff_autocov",
    "default_bandwidth", "block_partition", "spot_vol_blocks",
    "GumbelNorm", "TestReport", "gumbel_quantile", "gumbel_pvalue",
    "norm_sequences", "t_statistic", "r_statistic",
    "test_positive_jumps", "test_jumps",
    "HurstReport", "hurst_estimate", "hurst_estimate_excluding",
    "filtered_hurst_estimate", "scaled_realized_variance",
    "LocatedJump", "locate_jump", "sequential_detect",
]
