"""Effective random walk: increment law, exit times, ladders, time change."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prudentwalk import effective, stats
from prudentwalk.effective import (
    EffectiveWalkPath,
    HatPath,
    LAW,
    effective_index_of_time,
    exit_time,
    exit_time_pmf_exact,
    exit_time_pmf_table,
    hat_path,
    increment_pmf,
    ladder_decompose,
    microscopic_time,
    microscopic_times,
    sample_exit_times,
    sample_increments,
    simulate_effective_walk,
)
from prudentwalk.rng import rng_from_seed


def path_of(values):
    return EffectiveWalkPath(np.asarray(values, dtype=np.int64))


class TestIncrementLaw:
    def test_pmf_values(self):
        assert increment_pmf(0) == Fraction(1, 3)
        assert increment_pmf(1) == Fraction(1, 6)
        assert increment_pmf(-2) == Fraction(1, 12)

    def test_symmetry(self):
        for k in range(0, 12):
            assert increment_pmf(k) == increment_pmf(-k)

    def test_normalization_up_to_tail(self):
        total = sum(increment_pmf(k) for k in range(-40, 41))
        assert 1 - total == Fraction(1, 3) * Fraction(1, 2) ** 39  # two tails of (1/2)^40 each... checked exactly
        assert abs(float(1 - total)) < 2.0 * 0.5**40

    def test_mean_abs_and_second_moment(self):
        partial = sum(abs(k) * increment_pmf(k) for k in range(-128, 129))
        assert abs(float(Fraction(4, 3) - partial)) < 1e-30
        assert LAW.mean_abs() == Fraction(4, 3)
        assert LAW.second_moment() == Fraction(4)
        assert abs(float(LAW.second_moment_by_summation() - LAW.second_moment())) < 1e-30

    def test_variance_differs_from_two(self):
        # the computed variance is 4 and is what diagnostics must use
        assert LAW.variance() == Fraction(4)
        assert LAW.variance() != Fraction(2)


class TestSampler:
    def test_empirical_zero_frequency(self):
        rng = rng_from_seed(10)
        draws = sample_increments(rng, 1_000_000)
        assert abs((draws == 0).mean() - 1 / 3) < 0.002

    def test_empirical_mean_and_abs_mean(self):
        rng = rng_from_seed(11)
        draws = sample_increments(rng, 1_000_000)
        assert abs(draws.mean()) < 0.005
        assert abs(np.abs(draws).mean() - 4 / 3) < 0.005

    def test_pmf_match_chi_square(self):
        rng = rng_from_seed(12)
        draws = sample_increments(rng, 200_000)
        m = 12
        clipped = np.clip(draws, -m - 1, m + 1)
        counts = np.bincount(clipped + m + 1, minlength=2 * m + 3)
        probs = np.array(
            [float(increment_pmf(k)) for k in range(-m, m + 1)]
        )
        mid = counts[1:-1]
        tail = counts[0] + counts[-1]
        c, p = stats.pool_tail(mid, probs, tail_count=int(tail), tail_prob=1 - probs.sum())
        _, pval = stats.chi_square(c, p / p.sum())
        assert pval > 0.01


class TestWalkSimulation:
    def test_zero_steps(self):
        path = simulate_effective_walk(0, rng_from_seed(0))
        assert path.values.tolist() == [0]

    def test_determinism(self):
        a = simulate_effective_walk(5_000, rng_from_seed(42))
        b = simulate_effective_walk(5_000, rng_from_seed(42))
        assert np.array_equal(a.values, b.values)

    def test_diffusive_envelope(self):
        # sigma^2 = 4, so max|S_k| over 1e6 steps is far below 10^3.5 whp
        path = simulate_effective_walk(1_000_000, rng_from_seed(13))
        assert np.abs(path.values).max() < 10**3.5


class TestExitTimes:
    def test_exact_table_width_one_is_geometric(self):
        table = exit_time_pmf_table(1, 12)
        for m, p in enumerate(table, start=1):
            assert p == Fraction(1, 3) ** (m - 1) * Fraction(2, 3)
        assert exit_time_pmf_exact(1, 3) == Fraction(2, 27)

    def test_exact_one_step_width_two(self):
        assert exit_time_pmf_exact(2, 1) == Fraction(1, 2)

    def test_exact_tables_sum_to_one(self):
        for width in (1, 2, 3, 5):
            total = sum(exit_time_pmf_table(width, 200))
            assert float(1 - total) < 1e-6

    def test_range_validation(self):
        with pytest.raises(ValueError):
            exit_time_pmf_exact(0, 1)
        with pytest.raises(ValueError):
            exit_time_pmf_exact(31, 1)
        with pytest.raises(ValueError):
            exit_time_pmf_exact(3, 201)

    @pytest.mark.parametrize("width", [1, 2, 3, 5, 10])
    def test_sampled_exit_law_matches_oracle(self, width):
        rng = rng_from_seed(100 + width)
        times, sides = sample_exit_times(width, 100_000, rng)
        assert (sides != 0).all()
        m_max = 150
        probs = np.array([float(p) for p in exit_time_pmf_table(width, m_max)])
        counts = np.bincount(np.minimum(times, m_max + 1), minlength=m_max + 2)[1 : m_max + 1]
        tail = int((times > m_max).sum())
        c, p = stats.pool_tail(counts, probs, tail, 1 - probs.sum())
        _, pval = stats.chi_square(c, p / p.sum())
        assert pval > 0.01

    def test_exit_sides(self):
        rng = rng_from_seed(7)
        out = exit_time(1, rng)
        assert out.exit_side in ("below", "above")
        assert (out.final_value < 0) == (out.exit_side == "below")
        assert (out.final_value >= 1) == (out.exit_side == "above")

    def test_one_sided_censoring(self):
        rng = rng_from_seed(8)
        seen_censored = False
        for _ in range(200):
            out = exit_time(math.inf, rng, cap=16)
            if out.censored:
                seen_censored = True
                assert out.exit_time == 16 and out.exit_side == "censored"
            else:
                assert out.exit_side == "below" and out.final_value < 0
        assert seen_censored

    def test_one_sided_survival_decay(self):
        """P(eta_inf >= n) ~ n^{-1/2}: log-log slope within [-0.6, -0.4]."""
        rng = rng_from_seed(9)
        times, sides = sample_exit_times(math.inf, 150_000, rng, cap=10_000)
        grid = np.array([100, 200, 400, 800, 1600, 3200, 6400, 10_000])
        surv = np.array([(times >= g).mean() for g in grid])
        slope, _ = stats.loglog_slope(grid, surv)
        assert -0.6 <= slope <= -0.4


class TestLadders:
    def test_overshoot_fixture(self):
        lad = ladder_decompose(path_of([0, -2]))
        assert lad.ladder_times.tolist() == [0, 1]
        assert lad.overshoots.tolist() == [0, 1]

    def test_no_overshoot_fixture(self):
        lad = ladder_decompose(path_of([0, -1]))
        assert lad.overshoots.tolist() == [0, 0]

    def test_alternation_and_signs(self):
        path = simulate_effective_walk(200_000, rng_from_seed(21))
        lad = ladder_decompose(path)
        k = np.arange(1, lad.count() + 1)
        signed = np.where(k % 2 == 1, 1, -1) * lad.overshoots[1:]
        assert (signed >= 0).all()
        assert (np.diff(lad.ladder_times) > 0).all()

    def test_overshoot_geometric_half(self):
        rng = rng_from_seed(22)
        absd = []
        for _ in range(400):
            path = simulate_effective_walk(10_000, rng)
            lad = ladder_decompose(path)
            absd.append(np.abs(lad.overshoots[1:]))
        absd = np.concatenate(absd)
        assert absd.size > 25_000
        m = 25
        probs = np.array([0.5 ** (j + 1) for j in range(m + 1)])
        counts = np.bincount(np.minimum(absd, m + 1), minlength=m + 2)[: m + 1]
        c, p = stats.pool_tail(counts, probs, int((absd > m).sum()), 1 - probs.sum())
        _, pval = stats.chi_square(c, p / p.sum())
        assert pval > 0.01


class TestHatPath:
    def test_prefix_before_first_ladder(self):
        path = path_of([0, 2, 1, 3])
        hat = hat_path(path)
        assert np.array_equal(hat.values, path.values)

    def test_first_ladder_value(self):
        hat = hat_path(path_of([0, -2, -5]))
        assert hat.values[1] == -1

    def test_anchoring_on_random_paths(self):
        for seed in range(5):
            path = simulate_effective_walk(100_000, rng_from_seed(30 + seed))
            hat = hat_path(path)
            lad = hat.ladders
            at = hat.values[lad.ladder_times]
            expect = np.where(np.arange(lad.count() + 1) % 2 == 0, 0, -1)
            assert np.array_equal(at, expect)

    @given(st.lists(st.integers(-6, 6), min_size=0, max_size=60))
    @settings(max_examples=60, deadline=None)
    def test_hat_identity_pointwise(self, increments):
        values = np.concatenate([[0], np.cumsum(np.asarray(increments, dtype=np.int64))])
        path = EffectiveWalkPath(values)
        hat = hat_path(path)
        lad = hat.ladders
        for n in range(values.shape[0]):
            corr = sum(
                int(d) for tau, d in zip(lad.ladder_times, lad.overshoots) if tau <= n
            )
            assert hat.values[n] == values[n] + corr


class TestTimeChange:
    def test_hand_example(self):
        hat = HatPath(np.array([0, 2, -1], dtype=np.int64))
        assert microscopic_time(hat, 2) == 7
        assert microscopic_time(hat, 0) == 0

    def test_index_of_time(self):
        hat = HatPath(np.array([0, 2, -1], dtype=np.int64))
        assert effective_index_of_time(hat, 0) == 0
        assert effective_index_of_time(hat, 4) == 2
        with pytest.raises(ValueError):
            effective_index_of_time(hat, 8)

    def test_infimum_consistency(self):
        path = simulate_effective_walk(5_000, rng_from_seed(31))
        hat = hat_path(path)
        times = microscopic_times(hat)
        for t in rng_from_seed(3).integers(0, int(times[-1]) + 1, 50):
            n = effective_index_of_time(hat, int(t))
            assert times[n] >= t
            assert n == 0 or times[n - 1] < t

    def test_ratio_converges_to_seven_thirds(self):
        devs = []
        for seed in range(10):
            path = simulate_effective_walk(1_000_000, rng_from_seed(40 + seed))
            hat = hat_path(path)
            devs.append(abs(microscopic_time(hat, 1_000_000) / 1_000_000 - 7 / 3))
        assert max(devs) < 0.01
