"""Excursion codec: hat paths <-> corner-model lattice trajectories."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prudentwalk import codec, effective, walk2d
from prudentwalk.codec import (
    MalformedExcursionError,
    parse_corner_excursion,
    parse_corner_path,
    split_hat_excursions,
    unfold_hat_path,
)
from prudentwalk.effective import EffectiveWalkPath, HatPath, hat_path, microscopic_times
from prudentwalk.lattice import LatticePath
from prudentwalk.rng import rng_from_seed


def hat_of(values):
    return HatPath(np.asarray(values, dtype=np.int64))


def random_hat(seed, n):
    path = effective.simulate_effective_walk(n, rng_from_seed(seed))
    return hat_path(path)


class TestUnfold:
    def test_trivial_hat(self):
        res = unfold_hat_path(hat_of([0]))
        assert res.path.sites.tolist() == [[0, 0]]
        assert res.cut_index == 0

    def test_spec_excursion(self):
        """hat [0, 2, -1] spans 7 lattice steps: the arrival step east,
        a run of two away from the frontier, another east advance, and a
        closing run of three that crosses the old frontier by one."""
        res = unfold_hat_path(hat_of([0, 2, -1]), first_step="horizontal")
        assert len(res.path) == 7
        assert res.complete
        expected = [[0, 0], [1, 0], [1, -1], [1, -2], [2, -2], [2, -1], [2, 0], [2, 1]]
        assert res.path.sites.tolist() == expected

    def test_length_is_time_change_per_excursion(self):
        h = hat_of([0, 2, -1])
        assert len(unfold_hat_path(h).path) == int(microscopic_times(h)[-1])

    def test_incomplete_tail_is_cut(self):
        res = unfold_hat_path(hat_of([0, 1, 3]))
        assert res.cut_index == 0
        assert not res.complete
        assert res.path.sites.tolist() == [[0, 0]]

    def test_multi_excursion_length(self):
        # K complete excursions share K-1 boundary steps with one forced opener
        h = random_hat(5, 500)
        res = unfold_hat_path(h)
        windows, cut = split_hat_excursions(h.values)
        t = int(microscopic_times(h)[cut])
        assert len(res.path) == t - (len(windows) - 1)

    def test_vertical_orientation_transposes(self):
        h = hat_of([0, 2, -1])
        a = unfold_hat_path(h, first_step="horizontal").path.sites
        b = unfold_hat_path(h, first_step="vertical").path.sites
        assert np.array_equal(a[:, ::-1], b)

    def test_rejects_unknown_orientation(self):
        with pytest.raises(ValueError):
            unfold_hat_path(hat_of([0, -1]), first_step="diagonal")


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(12))
    def test_parse_inverts_unfold(self, seed):
        h = random_hat(seed, 600)
        res = unfold_hat_path(h)
        values, first_step, consumed = parse_corner_path(res.path)
        assert first_step == "horizontal"
        assert consumed == len(res.path)
        assert np.array_equal(values, h.values[: res.cut_index + 1])

    def test_parse_inverts_unfold_vertical(self):
        h = random_hat(99, 400)
        res = unfold_hat_path(h, first_step="vertical")
        values, first_step, consumed = parse_corner_path(res.path)
        assert first_step == "vertical"
        assert np.array_equal(values, h.values[: res.cut_index + 1])

    @pytest.mark.parametrize("seed", range(8))
    def test_corner_simulation_round_trips(self, seed):
        cp = walk2d.simulate(4000, seed=seed, variant="corner")
        values, first_step, consumed = parse_corner_path(cp)
        rebuilt = unfold_hat_path(values, first_step=first_step)
        assert np.array_equal(rebuilt.path.sites, cp.sites[: consumed + 1])

    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=80))
    @settings(max_examples=80, deadline=None)
    def test_property_round_trip(self, increments):
        values = np.concatenate([[0], np.cumsum(np.asarray(increments, dtype=np.int64))])
        h = hat_path(EffectiveWalkPath(values))
        res = unfold_hat_path(h)
        parsed, _, _ = parse_corner_path(res.path)
        assert np.array_equal(parsed, h.values[: res.cut_index + 1])


class TestLegality:
    @pytest.mark.parametrize("seed", range(4))
    def test_unfolded_path_obeys_corner_rule(self, seed):
        h = random_hat(200 + seed, 800)
        res = unfold_hat_path(h)
        path = LatticePath(res.path.sites, variant="corner")
        r = walk2d.replay_check(path)
        assert r["illegal_steps"] == 0
        assert r["mismatches"] == 0

    def test_large_hat_oracle_replay(self):
        h = random_hat(300, 10_000)
        res = unfold_hat_path(h)
        path = LatticePath(res.path.sites, variant="corner")
        r = walk2d.replay_check_fast(path)
        assert r["illegal_steps"] == 0 and r["mismatches"] == 0


class TestSingleExcursion:
    def test_spec_excursion_to_effective(self):
        segment = unfold_hat_path(hat_of([0, 2, -1])).path.sites
        assert parse_corner_excursion(segment).tolist() == [0, 2, -1]

    def test_degenerate_single_step_closing(self):
        segment = unfold_hat_path(hat_of([0, -1])).path.sites
        values = parse_corner_excursion(segment)
        assert values.tolist() == [0, -1]
        assert len(values) - 1 == 1

    def test_horizontal_kind(self):
        # second excursion of a two-excursion hat, extracted with its arrival step
        h = hat_of([0, -1, -3, 0])
        res = unfold_hat_path(h)
        windows, _ = split_hat_excursions(h.values)
        # lattice boundaries: excursion k spans (t_{k-1}, t_k] sharing one step
        t_bounds = [0]
        total = 1
        times = microscopic_times(h)
        for i, (a, b) in enumerate(windows):
            seg_len = int(times[b] - times[a]) - (1 if i else 0)
            total += seg_len
            t_bounds.append(total - 1)
        segment = res.path.sites[t_bounds[1] - 1 : t_bounds[2] + 1]
        values = parse_corner_excursion(segment)
        assert values.tolist() == [-1, -3, 0]

    def test_malformed_reports_step_index(self):
        bad = np.array([[0, 0], [1, 0], [0, 0]])  # west step inside a width push
        with pytest.raises(MalformedExcursionError) as ei:
            parse_corner_excursion(bad)
        assert ei.value.step_index == 1

    def test_unclosed_segment_rejected(self):
        bad = np.array([[0, 0], [1, 0], [1, -1]])
        with pytest.raises(MalformedExcursionError):
            parse_corner_excursion(bad)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_corner_excursions_round_trip(self, seed):
        """Excursions cut out of real corner walks parse to hat excursions."""
        cp = walk2d.simulate(2000, seed=seed, variant="corner")
        values, first_step, consumed = parse_corner_path(cp)
        windows, cut = split_hat_excursions(values)
        if not windows:
            pytest.skip("no complete excursion in this walk")
        times = microscopic_times(HatPath(values))
        t_hi = 1
        for i, (a, b) in enumerate(windows[:4]):
            seg_len = int(times[b] - times[a])
            t_lo = t_hi - 1
            t_hi = t_lo + seg_len
            segment = cp.sites[t_lo : t_hi + 1]
            parsed = parse_corner_excursion(segment)
            assert parsed.tolist() == values[a : b + 1].tolist()
