import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from fracjump import (
    ConfigError,
    ContractError,
    DomainError,
    EstimationError,
    block_partition,
    default_bandwidth,
    gaussian_abs_moment,
    increments,
    second_diff_autocov,
    second_diff_var,
    spot_vol_blocks,
)
from helpers import add_jump_at, model_paths, uniform_grid_taus


def path_with_constant_second_diffs(n: int, c: float) -> np.ndarray:
    # x[0] = x[1] = 0 and D2[j] = c for all j
    return np.concatenate(([0.0, 0.0], np.cumsum(np.cumsum(np.full(n - 1, c)))))


class TestIncrements:
    def test_first_order(self):
        inc = increments(np.array([0.0, 1.0, 2.0, 3.0]), 1)
        assert inc.order == 1 and inc.n == 3
        np.testing.assert_array_equal(inc.values, [1.0, 1.0, 1.0])
        np.testing.assert_array_equal(inc.j_indices, [1, 2, 3])

    def test_second_order_kills_linear(self):
        inc = increments(np.array([0.0, 1.0, 2.0, 3.0]), 2)
        np.testing.assert_array_equal(inc.values, [0.0, 0.0])

    def test_jump_signature(self):
        d = 0.37
        inc = increments(np.array([0.0, 0.0, d, d]), 2)
        np.testing.assert_array_equal(inc.values, [d, -d])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=60))
    def test_second_equals_diff_of_first(self, vals):
        path = np.array(vals)
        d1 = increments(path, 1).values
        d2 = increments(path, 2).values
        np.testing.assert_array_equal(d2, np.diff(d1))

    def test_too_short(self):
        with pytest.raises(ContractError):
            increments(np.array([0.0, 1.0]), 2)
        with pytest.raises(DomainError):
            increments(np.zeros(5), 3)


class TestGaussianAbsMoment:
    def test_p_one_closed_form(self):
        assert gaussian_abs_moment(1.0) == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-12)

    def test_small_p_limit(self):
        assert gaussian_abs_moment(1e-9) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("p", [0.5, 0.9, 1.0])
    def test_against_quadrature(self, p):
        oracle, _ = quad(
            lambda x: abs(x) ** p * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
            -12, 12, epsabs=1e-13, epsrel=1e-13, limit=300,
        )
        assert gaussian_abs_moment(p) == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, -0.2, 1.0001])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            gaussian_abs_moment(p)


def fbm_cov(t: float, s: float, hurst: float) -> float:
    return 0.5 * (t ** (2 * hurst) + s ** (2 * hurst) - abs(t - s) ** (2 * hurst))


def second_diff_autocov_brute(k: int, hurst: float) -> float:
    # directly from the fBm covariance at integer times
    j = 50
    w = {j + k: 1.0, j + k - 1: -2.0, j + k - 2: 1.0}
    v = {j: 1.0, j - 1: -2.0, j - 2: 1.0}
    return sum(a * b * fbm_cov(ti, si, hurst) for ti, a in w.items() for si, b in v.items())


class TestSecondDiffConstants:
    def test_var_brownian(self):
        assert second_diff_var(0.5) == 2.0

    def test_var_rough(self):
        assert second_diff_var(0.3) == pytest.approx(2.484283433489602, abs=1e-12)

    def test_var_smooth_limit(self):
        assert second_diff_var(1.0 - 1e-7) < 1e-5

    def test_autocov_brownian(self):
        assert second_diff_autocov(1, 0.5) == pytest.approx(-1.0, abs=1e-12)
        assert second_diff_autocov(2, 0.5) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("hurst", np.linspace(0.1, 0.9, 17))
    def test_lag_zero_is_variance(self, hurst):
        assert second_diff_autocov(0, hurst) == pytest.approx(
            second_diff_var(hurst), abs=1e-12
        )

    @pytest.mark.parametrize("hurst", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("k", [0, 1, 2, 3, 7])
    def test_against_brute_force(self, k, hurst):
        assert second_diff_autocov(k, hurst) == pytest.approx(
            second_diff_autocov_brute(k, hurst), abs=1e-9
        )

    @pytest.mark.parametrize("hurst", [0.3, 0.7])
    def test_squared_autocov_summable(self, hurst):
        def tail_sum(k_max):
            return sum(second_diff_autocov(k, hurst) ** 2 for k in range(k_max))

        # partial sums settle, and the decay constant rho(k)^2 / k^{4H-8}
        # stabilizes for large lags
        assert tail_sum(400) - tail_sum(200) < 1e-6
        c200 = second_diff_autocov(200, hurst) ** 2 / 200.0 ** (4 * hurst - 8)
        c400 = second_diff_autocov(400, hurst) ** 2 / 400.0 ** (4 * hurst - 8)
        assert c400 == pytest.approx(c200, rel=0.2)

    def test_domain(self):
        with pytest.raises(DomainError):
            second_diff_var(1.0)
        with pytest.raises(DomainError):
            second_diff_autocov(1, 0.0)
        with pytest.raises(DomainError):
            second_diff_autocov(-1, 0.5)


class TestBandwidth:
    @pytest.mark.parametrize("n,expected", [(500, 62), (1000, 100), (1500, 131),
                                            (2000, 158), (2500, 184)])
    def test_reference_values(self, n, expected):
        assert default_bandwidth(n) == expected

    @given(st.integers(min_value=8, max_value=10 ** 7))
    def test_exact_floor(self, n):
        h = default_bandwidth(n)
        assert h ** 3 <= n * n < (h + 1) ** 3


class TestBlockPartition:
    def test_example_n10_h3(self):
        blocks = block_partition(10, 3)
        expected = {2: 1, 3: 2, 4: 2, 5: 2, 6: 3, 7: 3, 8: 3, 9: 3, 10: 3}
        for j, k in expected.items():
            assert blocks[j - 2] == k

    def test_example_n8_h4(self):
        blocks = block_partition(8, 4)
        expected = {2: 1, 3: 1, 4: 2, 5: 2, 6: 2, 7: 2, 8: 2}
        for j, k in expected.items():
            assert blocks[j - 2] == k

    @given(st.integers(min_value=8, max_value=4000))
    @settings(max_examples=60)
    def test_total_partition(self, n):
        h_n = max(3, default_bandwidth(n))
        blocks = block_partition(n, h_n)
        m = n // h_n
        assert blocks.shape == (n - 1,)
        assert blocks.min() >= 1 and blocks.max() <= m
        # full blocks follow the display exactly
        for k in range(2, m + 1):
            j_lo, j_hi = (k - 1) * h_n, min(k * h_n - 1, n)
            assert np.all(blocks[j_lo - 2:j_hi - 1] == k)

    def test_bandwidth_errors(self):
        with pytest.raises(ConfigError):
            block_partition(10, 2)
        with pytest.raises(ConfigError):
            block_partition(10, 10)


class TestSpotVolBlocks:
    def test_constant_increments_identity(self):
        n, h_n, p, c = 43, 10, 0.9, 0.7
        inc2 = increments(path_with_constant_second_diffs(n, c), 2)
        bve = spot_vol_blocks(inc2, h_n, p)
        expected = c ** p * (h_n - 1) / (h_n * gaussian_abs_moment(p))
        assert bve.m == 4
        np.testing.assert_allclose(bve.unscaled, expected, rtol=1e-13)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(3)
        path = np.cumsum(rng.standard_normal(200))
        lam, p = 3.7, 0.9
        a = spot_vol_blocks(increments(path, 2), 20, p).unscaled
        b = spot_vol_blocks(increments(lam * path, 2), 20, p).unscaled
        np.testing.assert_allclose(b, lam ** p * a, rtol=1e-12)

    def test_scaled_for_h(self):
        inc2 = increments(path_with_constant_second_diffs(30, 1.1), 2)
        bve = spot_vol_blocks(inc2, 5, 0.9, hurst=0.4)
        np.testing.assert_allclose(
            bve.scaled_for_h, 30.0 ** (0.9 * 0.4) * bve.unscaled, rtol=1e-14
        )
        assert spot_vol_blocks(inc2, 5, 0.9).scaled_for_h is None

    def test_degenerate_block_is_error(self):
        affine = 0.5 * np.arange(30.0) + 1.0
        with pytest.raises(EstimationError):
            spot_vol_blocks(increments(affine, 2), 5, 0.9)

    def test_contract_errors(self):
        with pytest.raises(ContractError):
            spot_vol_blocks(increments(np.arange(20.0), 1), 5, 0.9)
        inc2 = increments(np.arange(20.0) ** 2, 2)
        with pytest.raises(DomainError):
            spot_vol_blocks(inc2, 5, 1.5)
        with pytest.raises(ConfigError):
            spot_vol_blocks(inc2, 2, 0.9)

    def test_consistency_unit_vol(self):
        # block averages scaled by n^{pH} estimate C_H^{p/2} sigma^p; with
        # sigma == 1 and p = 1 the target is sqrt(4 - 2^{2H})
        n, hurst, p, reps = 2000, 0.3, 1.0, 200
        h_n = default_bandwidth(n)
        target = math.sqrt(second_diff_var(hurst))
        means = []
        for _, paths in model_paths(n, hurst, reps, seed=101, volatility="unit"):
            for row in paths:
                bve = spot_vol_blocks(increments(row, 2), h_n, p, hurst=hurst)
                means.append(bve.scaled_for_h.mean())
        assert np.mean(means) == pytest.approx(target, rel=0.05)

    def test_jump_robustness_improves_with_n(self):
        # a huge jump at a uniform time perturbs the unscaled block averages
        # less and less as n grows
        p, delta, reps = 0.9, 5.0, 40
        worst = []
        for n in (500, 1000, 2000):
            h_n = default_bandwidth(n)
            taus = uniform_grid_taus(n, reps, seed=77 + n)
            devs = []
            for lo, paths in model_paths(n, 0.3, reps, seed=55 + n):
                for i, row in enumerate(paths):
                    clean = spot_vol_blocks(increments(row, 2), h_n, p).unscaled
                    jumped = spot_vol_blocks(
                        increments(add_jump_at(row, int(taus[lo + i]), delta), 2),
                        h_n, p,
                    ).unscaled
                    devs.append(np.max(np.abs(jumped - clean)))
            worst.append(np.mean(devs))
        assert worst[0] > worst[1] > worst[2]
