import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fungisynth.lifecycle import (
    JitterLaw,
    LifecycleParams,
    Spore,
    TransitionClock,
    WorldState,
    advance_frame,
    growth_factor,
    initialize_spores,
    jitter_spores,
    round_half_away,
    simulate_lifecycle,
    spore_size,
    target_counts,
    transition_ratio,
)
from fungisynth.stochastics import derive_stream


class TestTransitionRatio:
    def test_endpoints(self):
        assert transition_ratio(0, 100) == 0.0
        assert transition_ratio(99, 100) == 1.0

    def test_midpoint(self):
        assert transition_ratio(50, 101) == 0.5

    @pytest.mark.parametrize("i,N", [(0, 1), (-1, 10), (10, 10)])
    def test_rejects_bad_input(self, i, N):
        with pytest.raises(ValueError):
            transition_ratio(i, N)

    @given(st.integers(2, 5000))
    def test_monotone(self, N):
        ts = [transition_ratio(i, N) for i in range(0, N, max(1, N // 50))]
        assert ts == sorted(ts)


def test_round_half_away():
    assert [round_half_away(v) for v in (0.5, 1.5, 2.5, 2.4999, -0.5, -1.5)] == [1, 2, 3, 2, -1, -2]


class TestInitialize:
    def test_empty(self):
        w = initialize_spores(0, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))
        assert w.spores == () and w.anchors == () and w.clock.frame_index == 0

    def test_positions_in_bounds(self):
        w = initialize_spores(200, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))
        assert len(w.spores) == 200
        assert all(0.1 <= s.x <= 0.9 and 0.1 <= s.y <= 0.9 for s in w.spores)
        assert [s.id for s in w.spores] == list(range(200))

    def test_mean_position(self):
        w = initialize_spores(10_000, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))
        xs = np.array([s.x for s in w.spores])
        ys = np.array([s.y for s in w.spores])
        assert abs(xs.mean() - 0.5) < 0.01 and abs(ys.mean() - 0.5) < 0.01

    def test_rejects_bounds_outside_unit_square(self):
        with pytest.raises(ValueError):
            initialize_spores(5, (-0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))


def _world(*spores, frame=0, N=10):
    return WorldState(tuple(spores), (), TransitionClock(frame, N), len(spores))


class TestJitter:
    def test_zero_range_is_identity(self):
        w = initialize_spores(20, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))
        assert jitter_spores(w, derive_stream(1, "j"), half_range=0.0) == w

    def test_displacement_bounded(self):
        w = initialize_spores(500, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))
        moved = jitter_spores(w, derive_stream(1, "j"))
        for a, b in zip(w.spores, moved.spores):
            assert a.id == b.id
            assert abs(a.x - b.x) <= 0.01 and abs(a.y - b.y) <= 0.01

    def test_clamps_at_edge(self, stub):
        w = _world(Spore(0, 0.0005, 0.5, 0.01))
        moved = jitter_spores(w, stub(frac=0.0))  # draws -0.01 on both axes
        assert moved.spores[0].x == 0.0
        assert moved.spores[0].y == pytest.approx(0.49)

    def test_normal_law_option(self):
        w = initialize_spores(2000, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"))
        moved = jitter_spores(w, derive_stream(1, "j"), law=JitterLaw.NORMAL, sigma=0.003)
        dx = np.array([b.x - a.x for a, b in zip(w.spores, moved.spores)])
        assert abs(dx.std() - 0.003) < 0.0003
        assert np.abs(dx).max() > 0.01 * 0.5


class TestTargetCounts:
    def test_start(self):
        assert target_counts(0.0, 200) == (200, 0, 0)

    def test_end_all_mycelium(self):
        assert target_counts(1.0, 200, c_M=2.0) == (0, 0, 200)

    def test_quarter(self):
        s, h, m = target_counts(0.25, 200)
        assert (s, m) == (150, 0) and h == 50

    def test_rejects_T_out_of_range(self):
        with pytest.raises(ValueError):
            target_counts(1.01, 10)

    @settings(max_examples=300)
    @given(st.floats(0, 1), st.integers(0, 5000), st.floats(0, 5), st.floats(0, 5))
    def test_sum_and_sign(self, T, S0, c_H, c_M):
        counts = target_counts(T, S0, c_H, c_M)
        assert sum(counts) == S0 and min(counts) >= 0
        assert counts[0] == round_half_away(S0 * (1 - T))

    @given(st.integers(2, 300), st.integers(0, 1000))
    def test_monotone_in_T(self, N, S0):
        prev = None
        for i in range(N):
            c = target_counts(i / (N - 1), S0)
            if prev:
                assert c[0] <= prev[0] and c[2] >= prev[2]
            prev = c


class TestEasing:
    def test_spore_size(self):
        assert spore_size(0.0, 0.01, 0.001) == 0.01
        assert spore_size(1.0, 0.01, 0.001) == 0.001
        assert spore_size(0.5, 0.01, 0.001) == pytest.approx(0.0025)

    def test_growth_factor(self):
        assert growth_factor(0.5) == 0.0
        assert growth_factor(0.2) == 0.0
        assert growth_factor(1.0) == 1.0
        assert growth_factor(0.75) == pytest.approx(0.25)


def _run(S0, N, seed=3, **kw):
    return list(simulate_lifecycle(LifecycleParams(initial_spores=S0, **kw), N, seed))


class TestAdvance:
    def test_two_frames_convert_everything(self):
        states = _run(10, 2)
        assert states[1].counts() == (0, 0, 10)

    def test_rejects_skipped_frame(self):
        w = initialize_spores(5, (0.1, 0.9, 0.1, 0.9), derive_stream(1, "i"), total_frames=10)
        with pytest.raises(ValueError):
            advance_frame(w, TransitionClock(2, 10), derive_stream(1, "a"))

    def test_trajectory_exact(self):
        states = _run(200, 100)
        for st_ in states:
            assert len(st_.spores) == round_half_away(200 * (1 - st_.T))

    def test_replay(self):
        assert _run(50, 30, seed=8) == _run(50, 30, seed=8)
        assert _run(50, 30, seed=8) != _run(50, 30, seed=9)

    def test_anchor_origin_is_spore_position_at_conversion(self):
        states = _run(40, 20)
        for prev, cur in zip(states, states[1:]):
            before = {s.id: s for s in prev.spores}
            for a in cur.anchors:
                if a.birth_frame == cur.clock.frame_index:
                    # conversion happens before that frame's jitter
                    assert (a.x, a.y) == (before[a.id].x, before[a.id].y)
                    assert a.parent_spore_id == a.id

    def test_spore_sizes_follow_easing(self):
        p = LifecycleParams(initial_spores=20)
        for st_ in simulate_lifecycle(p, 11, 2):
            expected = spore_size(st_.T, p.initial_spore_radius, p.min_spore_radius)
            assert all(s.size == expected for s in st_.spores)

    def test_mycelium_promotion_prefers_oldest(self):
        states = _run(100, 40)
        for prev, cur in zip(states, states[1:]):
            newly = [a for a in cur.mycelia if a.id in {h.id for h in prev.hyphae}]
            remaining = cur.hyphae
            if newly and remaining:
                assert max(a.birth_frame for a in newly) <= min(a.birth_frame for a in remaining)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 120), st.integers(2, 40), st.integers(0, 2**32))
    def test_population_invariants(self, S0, N, seed):
        states = _run(S0, N, seed)
        assert len(states) == N
        last_rank = {}
        prev = prev_state = None
        for st_ in states:
            counts = st_.counts()
            assert sum(counts) == S0
            ids = [s.id for s in st_.spores] + [a.id for a in st_.anchors]
            assert sorted(ids) == list(range(S0))
            assert all(0.0 <= s.x <= 1.0 and 0.0 <= s.y <= 1.0 and s.size > 0 for s in st_.spores)
            if st_.T <= 0.5:
                assert counts[2] == 0
            for ent, stage in st_.stage_of().items():
                assert stage.rank >= last_rank.get(ent, 0)
                last_rank[ent] = stage.rank
            if prev is not None:
                assert counts[0] <= prev[0] and counts[2] >= prev[2]
                moved = {s.id: s for s in st_.spores}
                for s in prev_state.spores:
                    if s.id in moved:
                        assert abs(moved[s.id].x - s.x) <= 0.01 + 1e-15
                        assert abs(moved[s.id].y - s.y) <= 0.01 + 1e-15
            prev, prev_state = counts, st_
