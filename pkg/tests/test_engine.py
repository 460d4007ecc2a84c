"""Flat network stepping, trajectory records, cluster partition, steps_to_target."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfon import (
    ConfigurationError,
    ExternalReference,
    LeaderReference,
    LocalReference,
    NetworkState,
    TrajectoryRecord,
    detect_consensus_partition,
    run_bcfon,
    step_bcfon,
    steps_to_target,
)


def ref_step_flat(centers, sigmas, d, b):
    """Per-agent reference stepper, local scheme; mirrors the definition, not the code."""
    n = len(centers)
    out_c, out_s = [], []
    for i in range(n):
        ids = []
        for j in range(n):
            ssum = sigmas[i] + sigmas[j]
            if ssum == 0.0:
                close = 1.0 if centers[i] == centers[j] else 0.0
            else:
                close = math.exp(-(((centers[i] - centers[j]) / ssum) ** 2))
            if close >= d:
                ids.append(j)
        mean_c = sum(centers[j] for j in ids) / len(ids)
        mean_s = sum(sigmas[j] for j in ids) / len(ids)
        out_c.append(mean_c)
        out_s.append(mean_s + b * abs(centers[i] - mean_c))
    return out_c, out_s


class TestStep:
    def test_two_agent_merge(self):
        # (0, 2) and (2, 2) are mutually close at d = 0.6; both land on the mean
        state = NetworkState([0.0, 2.0], [2.0, 2.0], 0.6, 0.5)
        out = step_bcfon(state)
        assert out.centers.tolist() == [1.0, 1.0]
        assert out.sigmas.tolist() == [2.5, 2.5]

    def test_isolated_agents_hold_state(self):
        state = NetworkState([0.0, 100.0], [1.0, 1.0], 0.99, 0.5)
        out = step_bcfon(state)
        assert out.centers.tolist() == [0.0, 100.0]
        assert out.sigmas.tolist() == [1.0, 1.0]  # u = 0 when the reference is the agent itself

    def test_leader_scheme_rejected(self):
        state = NetworkState([0.0], [1.0], 0.5, 0.5)
        with pytest.raises(ConfigurationError):
            step_bcfon(state, LeaderReference())

    def test_external_reference(self):
        state = NetworkState([0.0, 4.0], [1.0, 1.0], 0.99, 0.5)
        out = step_bcfon(state, ExternalReference(lambda t, i: float(t + i)), t=3)
        assert out.centers.tolist() == [0.0, 4.0]
        # u_i = 0.5 * |center_i - (3 + i)|
        assert out.sigmas.tolist() == [2.5, 1.0]

    def test_external_signal_must_be_finite(self):
        state = NetworkState([0.0], [1.0], 0.5, 0.5)
        with pytest.raises(ConfigurationError):
            step_bcfon(state, ExternalReference(lambda t, i: float("nan")))
        with pytest.raises(ConfigurationError):
            step_bcfon(state, ExternalReference(lambda t, i: None))

    def test_external_signal_exception_wrapped(self):
        state = NetworkState([0.0], [1.0], 0.5, 0.5)

        def broken(t, i):
            raise KeyError("no value")

        with pytest.raises(ConfigurationError, match="t=0, agent=0"):
            step_bcfon(state, ExternalReference(broken))

    @given(n=st.integers(1, 8), seed=st.integers(0, 2**32), d=st.floats(0.0, 1.0))
    @settings(max_examples=60)
    def test_matches_reference_stepper(self, n, seed, d):
        rng = np.random.default_rng(seed)
        state = NetworkState(rng.uniform(-5, 5, n), rng.uniform(0.1, 2.0, n), d, 0.3)
        out = step_bcfon(state)
        ref_c, ref_s = ref_step_flat(state.centers.tolist(), state.sigmas.tolist(), d, 0.3)
        # summation order may differ from the reference loop by a few ulp
        np.testing.assert_allclose(out.centers, ref_c, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(out.sigmas, ref_s, rtol=1e-12, atol=1e-12)

    @given(n=st.integers(1, 10), seed=st.integers(0, 2**32))
    @settings(max_examples=40)
    def test_centers_stay_in_hull(self, n, seed):
        rng = np.random.default_rng(seed)
        state = NetworkState(rng.uniform(-5, 5, n), rng.uniform(0.1, 2.0, n), 0.4, 0.3)
        out = step_bcfon(state)
        lo, hi = state.centers.min(), state.centers.max()
        pad = 1e-12 * max(1.0, abs(lo), abs(hi))
        assert out.centers.min() >= lo - pad
        assert out.centers.max() <= hi + pad


class TestRun:
    def test_record_shape_and_initial_row(self):
        state = NetworkState([0.0, 2.0], [2.0, 2.0], 0.6, 0.5)
        record = run_bcfon(state, 5)
        assert record.n_samples == 6
        assert record.n_agents == 2
        assert record.times.tolist() == [0, 1, 2, 3, 4, 5]
        assert np.array_equal(record.centers[0], state.centers)
        assert np.array_equal(record.sigmas[0], state.sigmas)
        assert record.levels is None and record.groups is None

    def test_zero_steps(self):
        state = NetworkState([1.0], [1.0], 0.5, 0.5)
        record = run_bcfon(state, 0)
        assert record.n_samples == 1

    def test_negative_steps_rejected(self):
        state = NetworkState([1.0], [1.0], 0.5, 0.5)
        with pytest.raises(ValueError):
            run_bcfon(state, -1)

    def test_t0_offsets_times_and_signal(self):
        seen = []

        def signal(t, i):
            seen.append(t)
            return 0.0

        state = NetworkState([1.0], [1.0], 0.5, 0.5)
        record = run_bcfon(state, 3, ExternalReference(signal), t0=7)
        assert record.times.tolist() == [7, 8, 9, 10]
        assert seen == [7, 8, 9]

    def test_run_matches_repeated_steps(self):
        state = NetworkState([0.0, 1.0, 5.0], [1.0, 1.0, 1.0], 0.5, 0.2)
        record = run_bcfon(state, 4)
        cur = state
        for k in range(1, 5):
            cur = step_bcfon(cur)
            assert np.array_equal(record.centers[k], cur.centers)
            assert np.array_equal(record.sigmas[k], cur.sigmas)

    def test_index_of_and_select_agents(self):
        state = NetworkState([0.0, 1.0, 5.0], [1.0, 1.0, 1.0], 0.5, 0.2)
        record = run_bcfon(state, 4)
        assert record.index_of(3) == 3
        with pytest.raises(KeyError):
            record.index_of(99)
        sub = record.select_agents([2, 0])
        assert sub.n_agents == 2
        assert np.array_equal(sub.centers[:, 0], record.centers[:, 2])


class TestStepsToTarget:
    def test_first_recorded_hit(self):
        record = TrajectoryRecord(
            times=np.arange(3),
            centers=np.array([[0.0, 20.0], [9.0, 11.0], [9.95, 10.05]]),
            sigmas=np.zeros((3, 2)),
        )
        # spread0 = 20, so the window is |center - 10| < 0.2
        assert steps_to_target(record, 10.0) == 2
        assert steps_to_target(record, 10.0, fraction=0.1) == 1
        assert steps_to_target(record, 10.0, fraction=1e-4) is None


class TestClusterPartition:
    def test_interval_clusters(self):
        centers = [1.0, 1.1, 5.0, 5.05, -3.0]
        blocks = detect_consensus_partition(centers, 0.5)
        assert [b.tolist() for b in blocks] == [[4], [0, 1], [2, 3]]

    def test_zero_gap_groups_exact_equals(self):
        blocks = detect_consensus_partition([2.0, 2.0, 3.0], 0.0)
        assert [b.tolist() for b in blocks] == [[0, 1], [2]]

    def test_accepts_state(self):
        state = NetworkState([4.0, 0.0], [1.0, 1.0], 0.5, 0.5)
        blocks = detect_consensus_partition(state, 1.0)
        assert [b.tolist() for b in blocks] == [[1], [0]]

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            detect_consensus_partition([], 0.5)
        with pytest.raises(ValueError):
            detect_consensus_partition([1.0], -0.5)
        with pytest.raises(ValueError):
            detect_consensus_partition([1.0], float("nan"))

    @given(seed=st.integers(0, 2**32), gap=st.floats(0.0, 5.0))
    @settings(max_examples=40)
    def test_partition_covers_everyone_once(self, seed, gap):
        rng = np.random.default_rng(seed)
        centers = rng.uniform(-10, 10, 30)
        blocks = detect_consensus_partition(centers, gap)
        all_ids = np.sort(np.concatenate(blocks))
        assert np.array_equal(all_ids, np.arange(30))
        # adjacent clusters really are separated by more than gap
        reps = [centers[b].max() for b in blocks]
        lows = [centers[b].min() for b in blocks]
        for k in range(len(blocks) - 1):
            assert lows[k + 1] - reps[k] > gap
