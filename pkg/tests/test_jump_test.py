import inspect
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracjump import (
    EstimationError,
    JumpSpec,
    ProcessConfig,
    gumbel_pvalue,
    gumbel_quantile,
    norm_sequences,
    r_statistic,
    synthesize,
    t_statistic,
)
from fracjump import test_jumps as two_sided_test
from fracjump import test_positive_jumps as positive_test
from fracjump.errors import DomainError
from helpers import model_paths


class TestGumbelQuantile:
    def test_reference_values(self):
        assert gumbel_quantile(0.05) == pytest.approx(2.9701952490421637, abs=1e-12)
        assert gumbel_quantile(0.5) == pytest.approx(0.36651292058166435, abs=1e-12)
        assert gumbel_quantile(1.0 - math.exp(-1.0)) == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_cdf_roundtrip(self, alpha):
        q = gumbel_quantile(alpha)
        assert math.exp(-math.exp(-q)) == pytest.approx(1.0 - alpha, abs=1e-12)
        assert gumbel_pvalue(q) == pytest.approx(alpha, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.5])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            gumbel_quantile(alpha)

    @given(st.floats(-3.0, 30.0), st.floats(1e-4, 5.0))
    def test_pvalue_strictly_decreasing(self, z, step):
        # restricted to where the double-precision CDF is not saturated
        assert gumbel_pvalue(z + step) < gumbel_pvalue(z)


class TestNormSequences:
    def test_reference_n2000(self):
        norm = norm_sequences(2000)
        assert norm.a_n == pytest.approx(3.8989492070408103, abs=1e-12)
        assert norm.b_n == pytest.approx(3.3142671568546596, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 10, 500, 4096])
    def test_two_sided_uses_doubled_count(self, n):
        assert norm_sequences(n).c_n == norm_sequences(2 * n).a_n
        assert norm_sequences(n).d_n == norm_sequences(2 * n).b_n

    def test_positive(self):
        norm = norm_sequences(2)
        assert norm.a_n > 0 and norm.c_n > 0
        with pytest.raises(DomainError):
            norm_sequences(1)


def simulated_x(n=512, hurst=0.3, seed=0, jumps=()):
    cfg = ProcessConfig(n=n, hurst=hurst, seed=seed)
    return synthesize(cfg, JumpSpec(tuple(jumps))).x


class TestStatistics:
    def test_affine_path_degenerate(self):
        x = 0.25 * np.arange(64.0)
        with pytest.raises(EstimationError):
            t_statistic(x, p=0.9)

    @pytest.mark.parametrize("lam", [1e-3, 7.3, 1e4])
    def test_scale_invariance(self, lam):
        x = simulated_x(seed=4)
        t0, j0 = t_statistic(x, p=0.9)
        t1, j1 = t_statistic(lam * x, p=0.9)
        assert j0 == j1
        assert t1 == pytest.approx(t0, rel=1e-12)
        r0, _ = r_statistic(x, p=0.9)
        r1, _ = r_statistic(lam * x, p=0.9)
        assert r1 == pytest.approx(r0, rel=1e-12)

    def test_scale_invariance_unit_vol_p1(self):
        x = simulated_x(seed=11, hurst=0.5)
        assert t_statistic(x, p=1.0)[0] == pytest.approx(
            t_statistic(5.5 * x, p=1.0)[0], rel=1e-12
        )

    @pytest.mark.parametrize("seed", range(8))
    def test_r_dominates_t(self, seed):
        x = simulated_x(seed=seed)
        assert r_statistic(x, p=0.9)[0] >= t_statistic(x, p=0.9)[0]

    def test_sign_flip_leaves_r_unchanged(self):
        x = simulated_x(seed=21, jumps=[(0.4, 1.2)])
        r0, j0 = r_statistic(x, p=0.9)
        r1, j1 = r_statistic(-x, p=0.9)
        assert r0 == r1 and j0 == j1

    def test_negative_jump_hits_both_tests(self):
        # a negative jump flips sign across the contaminated pair, so the
        # one-sided statistic sees a positive spike at j*+1 and rejects too;
        # the documented negative-jump route (testing -x) fires as well
        r_rejects = t_rejects = mirrored = 0
        for seed in range(100):
            x = simulated_x(n=1000, seed=3000 + seed, jumps=[(0.5, -5.0)])
            r_rejects += two_sided_test(x, p=0.9).reject
            t_rejects += positive_test(x, p=0.9).reject
            mirrored += positive_test(-x, p=0.9).reject
            assert r_statistic(x, p=0.9)[0] >= t_statistic(x, p=0.9)[0]
        assert r_rejects == 100
        assert t_rejects == 100
        assert mirrored == 100

    def test_argmax_tie_breaks_to_smaller_index(self):
        x = np.zeros(17)
        x[5:] += 1.0
        x[9:] += 1.0
        _, j = r_statistic(x, p=0.9, h_n=12)
        assert j == 5

    def test_statistics_take_no_hurst(self):
        for fn in (t_statistic, r_statistic, positive_test, two_sided_test):
            assert "hurst" not in inspect.signature(fn).parameters


class TestDecisions:
    @pytest.mark.parametrize("seed", range(6))
    def test_report_coherence(self, seed):
        x = simulated_x(seed=seed)
        for runner, kind in ((positive_test, "positive-jumps"),
                             (two_sided_test, "two-sided")):
            rep = runner(x, p=0.9, alpha=0.05)
            assert rep.kind == kind
            assert rep.reject == (rep.normalized >= gumbel_quantile(0.05))
            assert rep.p_value == pytest.approx(gumbel_pvalue(rep.normalized), abs=1e-15)
            assert rep.reject == (rep.p_value <= 0.05 + 1e-12)
            assert 2 <= rep.argmax_j <= 512

    def test_obvious_jump_detected(self):
        x = simulated_x(n=1000, hurst=0.7, seed=1, jumps=[(0.62, 0.5)])
        rep = positive_test(x, p=0.9)
        assert rep.reject
        assert abs(rep.argmax_j - 620) <= 1

    def test_two_sided_size_stays_below_008(self):
        # empirical size bound at alpha = 0.05 across small-to-desk n
        reps = 400
        for n in (500, 1000, 2000):
            rejections = 0
            for _, chunk in model_paths(n, 0.3, reps, seed=140 + n):
                for row in chunk:
                    rejections += two_sided_test(row, p=0.9, alpha=0.05).reject
            assert rejections / reps < 0.08
