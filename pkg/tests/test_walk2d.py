"""2D walk engines: step rule, index vs referee, excursions, coupling."""

import numpy as np
import pytest

from prudentwalk import _kernels, effective, stats, walk2d
from prudentwalk.lattice import LatticePath
from prudentwalk.rng import replica_rng, rng_from_seed
from prudentwalk.walk2d import (
    CouplingState,
    Walk2DEngine,
    WalkState,
    allowed_directions,
    couple_corner_to_prudent,
    detect_crossing,
    excursion_decompose,
    naive_allowed_directions,
    replay_check,
    replay_check_fast,
    sample_corner_excursions,
    settled_quadrant,
    simulate,
    step,
    summary_quadrant,
)

E, W, N, S = (1, 0), (-1, 0), (0, 1), (0, -1)


def path_of(sites, variant="prudent"):
    return LatticePath(np.asarray(sites, dtype=np.int64), variant=variant)


class TestAllowedDirections:
    def test_origin_all_four(self):
        state = WalkState(rng=rng_from_seed(0))
        assert allowed_directions(state) == frozenset((E, W, N, S))
        assert naive_allowed_directions([(0, 0)]) == frozenset((E, W, N, S))

    def test_after_one_step(self):
        assert naive_allowed_directions([(0, 0), (1, 0)]) == frozenset((E, N, S))

    def test_hook_blocks_two(self):
        sites = [(0, 0), (1, 0), (1, 1), (0, 1)]
        # south blocked by the origin, east blocked by (1, 1)
        assert naive_allowed_directions(sites) == frozenset((W, N))

    def test_corner_obstacle(self):
        allowed = naive_allowed_directions([(0, 0), (1, 0)], obstacle=True)
        assert allowed == frozenset((E, N, S))

    def test_corner_origin_two(self):
        assert naive_allowed_directions([(0, 0)], obstacle=True) == frozenset((E, N))

    def test_state_matches_naive_along_a_run(self):
        state = WalkState(rng=rng_from_seed(5), variant="corner", first_step="east")
        for _ in range(400):
            fast = allowed_directions(state)
            ref = naive_allowed_directions(state.sites, state.position, obstacle=True)
            assert fast == ref
            step(state)


class TestStep:
    def test_uniform_at_origin(self):
        counts = {d: 0 for d in (E, W, N, S)}
        for seed in range(8):
            rng = rng_from_seed(seed)
            for _ in range(12_500):
                state = WalkState(rng=rng, first_step=None)
                step(state)
                counts[state.position] = counts.get(state.position, 0) + 1
        for d in (E, W, N, S):
            assert abs(counts[d] / 100_000 - 0.25) < 0.01

    def test_uniform_over_three_after_first(self):
        counts = {}
        rng = rng_from_seed(9)
        for _ in range(100_000):
            state = WalkState(rng=rng)
            step(state)
            step(state)
            counts[state.position] = counts.get(state.position, 0) + 1
        for pos in ((2, 0), (1, 1), (1, -1)):
            assert abs(counts[pos] / 100_000 - 1 / 3) < 0.01

    def test_python_state_matches_kernel_stream(self):
        """Same generator state gives the same walk in both engines."""
        n = 3_000
        kp = simulate(n, seed=rng_from_seed(77))
        state = WalkState(rng=rng_from_seed(77))
        for _ in range(n):
            step(state)
        assert np.array_equal(np.asarray(state.sites), kp.sites)


class TestSimulate:
    def test_forced_first_step(self):
        p = simulate(1, seed=1)
        assert p.sites.tolist() == [[0, 0], [1, 0]]

    def test_determinism(self):
        a = simulate(5_000, seed=123)
        b = simulate(5_000, seed=123)
        assert np.array_equal(a.sites, b.sites)

    def test_boundary_trace_proxy(self):
        """At least 99% (here: all) of sites sit on the running rectangle
        boundary, the quantitative stand-in for the long-runs picture."""
        p = simulate(50_000, seed=3)
        assert p.meta["boundary_violations"] == 0
        assert p.meta["min_allowed"] >= 2

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            simulate(0, seed=1)
        with pytest.raises(ValueError):
            simulate(10, seed=1, variant="hexagonal")


class TestIndexVsOracle:
    @pytest.mark.parametrize("variant", ["prudent", "corner"])
    def test_replay_medium(self, variant):
        p = simulate(20_000, seed=31, variant=variant)
        r = replay_check_fast(p)
        assert r["mismatches"] == 0
        assert r["illegal_steps"] == 0
        assert r["boundary_violations"] == 0
        assert r["min_allowed"] >= (2 if variant == "prudent" else 1)

    def test_python_and_kernel_replay_agree(self):
        p = simulate(2_000, seed=32)
        assert replay_check(p) == replay_check_fast(p)


class TestExcursions:
    def test_first_height_growth(self):
        p = path_of([(0, 0), (1, 0), (1, 1)])
        x, y, *_ = walk2d._rect_series(p.sites)
        H = np.maximum.accumulate(p.sites[:, 1]) - np.minimum.accumulate(p.sites[:, 1]) + 1
        assert H[2] > H[1]  # U_0 = 1

    def test_rejects_vertical_start(self):
        with pytest.raises(ValueError):
            excursion_decompose(path_of([(0, 0), (0, 1)]))

    def test_displacements_positive_and_windows_tile(self):
        p = simulate(50_000, seed=40)
        recs = excursion_decompose(p)
        assert len(recs) >= 2
        for r in recs:
            assert r.displacement >= 1
            assert r.wall_length >= 1
        for a, b in zip(recs, recs[1:]):
            assert a.end == b.start
            assert {a.kind, b.kind} == {"vertical", "horizontal"}

    def test_kernel_matches_python(self):
        n = 30_000
        eng = Walk2DEngine(n)
        path, _ = eng.run_path(replica_rng(8, 0), n)
        recs_py = excursion_decompose(LatticePath(path.astype(np.int64)))
        recs_k, _ = eng.run_excursions(replica_rng(8, 0), n)
        assert len(recs_py) == recs_k.shape[0]
        for r, row in zip(recs_py, recs_k):
            kind = 0 if r.kind == "vertical" else 1
            assert (kind, r.start, r.end, r.displacement, r.wall_length, int(r.crossed)) == tuple(row)

    def test_conditional_law_small_walls(self):
        eng = Walk2DEngine(1_000)
        disps = {2: [], 3: []}
        for r in range(4_000):
            recs, _ = eng.run_excursions(replica_rng(41, r), 1_000)
            for row in recs:
                w = int(row[_kernels.E_WALL])
                if w in disps:
                    disps[w].append(int(row[_kernels.E_DISP]))
        for wall, sample in disps.items():
            sample = np.asarray(sample)
            probs = np.array([float(p) for p in effective.exit_time_pmf_table(wall, 150)])
            counts = np.bincount(np.minimum(sample, 151), minlength=152)[1:151]
            c, p = stats.pool_tail(counts, probs, int((sample > 150).sum()), 1 - probs.sum())
            _, pval = stats.chi_square(c, p / p.sum())
            assert pval > 0.01, (wall, pval)


class TestCrossing:
    def test_same_wall_not_crossed(self):
        # stays on the bottom row while pushing east
        p = path_of([(0, 0), (1, 0), (1, 1)])
        recs = excursion_decompose(p)
        assert recs == [] or not recs[0].crossed

    def test_hand_built_crossing(self):
        # second vertical excursion runs straight across a height-2 rectangle
        sites = [(0, 0), (1, 0), (1, 1), (2, 1), (2, 0), (2, -1), (3, -1)]
        p = path_of(sites)
        recs = excursion_decompose(p)
        vertical = [r for r in recs if r.kind == "vertical"]
        assert len(vertical) == 2
        assert not vertical[0].crossed
        assert vertical[1].crossed
        assert detect_crossing(p, vertical[1])

    def test_crossing_rate_decays(self):
        eng = Walk2DEngine(100_000)
        crossed = np.zeros(17, dtype=np.int64)
        seen = np.zeros(17, dtype=np.int64)
        for r in range(600):
            recs, _ = eng.run_excursions(replica_rng(55, r), 100_000, max_records=34)
            for k in range(min(recs.shape[0] // 2, 17)):
                seen[k] += 1
                crossed[k] += int(recs[2 * k, _kernels.E_CROSSED] or recs[2 * k + 1, _kernels.E_CROSSED])
        early = crossed[1:5].sum() / seen[1:5].sum()
        late = crossed[12:17].sum() / seen[12:17].sum()
        assert late < early


class TestQuadrant:
    def test_monotone_staircase(self):
        sites = [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)]
        assert settled_quadrant(path_of(sites)) == 1

    def test_two_step_default(self):
        assert settled_quadrant(path_of([(0, 0), (1, 0)])) == 1

    def test_summary_agrees_with_path(self):
        eng = Walk2DEngine(20_000)
        for r in range(30):
            path, summary = eng.run_path(replica_rng(66, r), 20_000)
            assert summary_quadrant(summary) == settled_quadrant(
                LatticePath(path.astype(np.int64))
            )

    @pytest.mark.slow
    def test_stability(self):
        """The label at 1e5 steps usually equals the label at 1e6.

        The measured stability rate is ~0.95; the gate carries Monte
        Carlo slack (binomial sd at 100 seeds is ~0.02).
        """
        eng = Walk2DEngine(1_000_000)
        stable = 0
        n_seeds = 100
        for r in range(n_seeds):
            path, _ = eng.run_path(replica_rng(67, r), 1_000_000)
            lp = LatticePath(path.astype(np.int64))
            early = settled_quadrant(LatticePath(lp.sites[:100_001]))
            if early == settled_quadrant(lp):
                stable += 1
        assert stable >= 0.90 * n_seeds


class TestCoupling:
    def test_pass_through_when_no_dip(self):
        exc = np.array([0, 0, -2], dtype=np.int64)  # never above 0: dip 0 <= H_0
        out, state = couple_corner_to_prudent([exc])
        assert not out[0].truncated
        assert out[0].displacement == 2
        assert state.widths == [2]

    def test_truncation_fixture(self):
        """Dip of 3 against accumulated height 1 cuts at first depth 2."""
        v1 = np.array([0, -1], dtype=np.int64)
        h1 = np.array([0, -1], dtype=np.int64)
        v2 = np.array([0, 1, 2, 3, -1], dtype=np.int64)
        out, _ = couple_corner_to_prudent([v1, h1, v2])
        third = out[2]
        assert third.truncated
        assert third.displacement == 2
        assert third.values.tolist() == [0, 1, 2]

    def test_rejects_malformed(self):
        with pytest.raises(ValueError):
            couple_corner_to_prudent([np.array([0, 1, 1], dtype=np.int64)])

    def test_chain_matches_op(self):
        """The lazy displacement chain equals the op applied to full excursions."""
        rng = rng_from_seed(70)
        excs = sample_corner_excursions(rng, 60)
        out, _ = couple_corner_to_prudent(excs)
        acc_h = 0
        acc_w = 0
        for i, o in enumerate(out):
            vals = np.asarray(excs[i])
            limit = acc_h if o.kind == "vertical" else acc_w
            over = np.nonzero(vals >= limit + 1)[0]
            expect = int(over[0]) if over.size else vals.shape[0] - 1
            assert o.displacement == expect
            if o.kind == "vertical":
                acc_w += o.displacement
            else:
                acc_h += o.displacement

    def test_triple_law_matches_direct(self):
        n_direct = 4_000
        eng = Walk2DEngine(16_000)
        direct = np.zeros((n_direct, 3), dtype=np.int64)
        for r in range(n_direct):
            length = 1_000
            while True:
                recs, _ = eng.run_excursions(replica_rng(71, r), length, max_records=4)
                if recs.shape[0] >= 3:
                    break
                length *= 4
            direct[r] = recs[:3, _kernels.E_DISP]
        coupled = np.zeros((80_000, 3), dtype=np.int64)
        _kernels.coupled_displacement_chain(rng_from_seed(72), 80_000, 3, coupled)
        clip = 6
        def cells(t):
            t = np.minimum(t, clip)
            flat = ((t[:, 0] - 1) * clip + (t[:, 1] - 1)) * clip + (t[:, 2] - 1)
            return np.bincount(flat, minlength=clip**3)
        obs, ref = cells(direct), cells(coupled)
        probs = ref / ref.sum()
        obs_p, probs_p = stats.pool_sparse_cells(obs, probs)
        _, pval = stats.chi_square(obs_p, probs_p / probs_p.sum())
        assert pval > 0.01

    def test_eventual_coupling(self):
        """Truncations beyond pair 64 are rare across seeds."""
        flags = np.zeros(128, dtype=np.int64)
        late = 0
        n_seeds = 200
        for r in range(n_seeds):
            _kernels.coupling_truncation_events(replica_rng(73, r), 128, flags)
            if flags[64:].any():
                late += 1
        assert late / n_seeds <= 0.05
