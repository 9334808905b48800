import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sicr.descriptor import (
    CLOSE_HIGH,
    CLOSE_LOW,
    Descriptor,
    DescriptorParams,
    RATIO_CLAMP,
    build_descriptor,
    cap_ratio,
    closeness_sweep,
    describe_all,
    extremum_ratios,
    find_shape_extrema,
    inclusive_range,
    is_close,
    slope_ratio,
)
from sicr.errors import DescriptorError
from sicr.scale_space import Keypoint, keypoints_for
from sicr.signal import Signal, SynthSpec, synth_event


def kp(pos):
    return Keypoint(pos, 1, 2.0, 0.5, "maximum")


def wedge_train(slopes, n_flank=30, start=0.0):
    """Alternating up/down linear flanks; slopes are (left, right) magnitudes per cap."""
    x = [start]
    up = True
    for left, right in slopes:
        for s in (left, right):
            step = s if up else -s
            x.extend(x[-1] + step * np.arange(1, n_flank + 1))
            up = not up
    return np.asarray(x)


class TestShapeExtrema:
    def test_ramp_has_none(self):
        assert find_shape_extrema(np.arange(100.0)) == []

    def test_sine(self):
        x = np.sin(2 * np.pi * np.arange(1000) / 200)
        ex = find_shape_extrema(x)
        # brute-force: local maxima/minima of the sampled sine
        brute = [i for i in range(1, 999) if (x[i] - x[i - 1]) * (x[i + 1] - x[i]) < 0]
        assert [e.index for e in ex] == brute
        expect = np.arange(50, 1000, 100)
        assert np.all(np.abs(np.array([e.index for e in ex]) - expect[:len(ex)]) <= 1)
        assert len(ex) == 10
        kinds = [e.kind for e in ex]
        assert kinds == ["peak", "valley"] * 5

    def test_spike_rejected(self):
        x = np.exp(-0.5 * ((np.arange(300) - 150) / 30.0) ** 2)
        x[80:83] += [0.1, 0.3, 0.1]
        ex = find_shape_extrema(x)
        assert [(e.index, e.kind) for e in ex] == [(150, "peak")]
        assert ex[0].left_run >= 20 and ex[0].right_run >= 20

    def test_run_lengths_counted_in_steps(self):
        x = np.concatenate([np.arange(21.0), 20 - np.arange(1, 21.0)])
        (e,) = find_shape_extrema(x)
        assert (e.index, e.left_run, e.right_run) == (20, 20, 20)
        # 19 falling steps, then a rise: one step short on the right
        short = np.concatenate([x[:-1], x[-2] + np.arange(1, 6.0)])
        assert find_shape_extrema(short) == []

    def test_single_plateau_absorbed_longer_breaks(self):
        up = np.arange(25.0)
        down = 24 - np.arange(1, 25.0)
        one = np.concatenate([up[:10], [up[9]], up[10:], down])
        assert [e.kind for e in find_shape_extrema(one)] == ["peak"]
        two = np.concatenate([up[:10], [up[9], up[9]], up[10:], down])
        # run restarts after the 2-sample plateau: 15 steps < 20
        assert find_shape_extrema(two) == []

    def test_too_short(self):
        with pytest.raises(DescriptorError):
            find_shape_extrema(np.zeros(40))


class TestRatios:
    def test_symmetric_peak_and_valley(self):
        x = wedge_train([(1.0, 1.0), (1.0, 1.0)])
        assert extremum_ratios(x, 30, True, 4, 5) == [1.0] * 4
        assert extremum_ratios(x, 60, False, 4, 5) == [-1.0] * 4

    def test_asymmetric_peak(self):
        x = wedge_train([(2.0, 0.5)])
        # right slope -0.5 over left slope 2 -> -0.25, made positive at a peak
        assert extremum_ratios(x, 30, True, 4, 5) == [0.25] * 4

    def test_out_of_bounds(self):
        x = wedge_train([(1.0, 1.0)])
        assert extremum_ratios(x, 10, True, 4, 5) is None

    def test_flat_left_clamp(self):
        assert slope_ratio(0.0, -2.0, True) == RATIO_CLAMP
        assert slope_ratio(0.0, 2.0, False) == RATIO_CLAMP
        assert slope_ratio(-0.0, 2.0, False) == -RATIO_CLAMP


class TestBuildDescriptor:
    def setup_method(self):
        self.x = wedge_train([(1.0, 1.0)] * 6)
        self.ex = find_shape_extrema(self.x)

    def test_length_and_order(self):
        assert [e.index for e in self.ex] == [30, 60, 90, 120, 150, 180, 210, 240, 270, 300, 330]
        d = build_descriptor(self.x, self.ex, kp(100))
        assert d.values.size == 16
        assert d.extrema_indices == (60, 90, 120, 150)
        assert d.values.tolist() == [-1.0] * 4 + [1.0] * 4 + [-1.0] * 4 + [1.0] * 4

    def test_keypoint_on_extremum_excluded(self):
        d = build_descriptor(self.x, self.ex, kp(120))
        assert d.extrema_indices == (60, 90, 150, 180)

    def test_insufficient_context(self):
        assert build_descriptor(self.x, self.ex, kp(40)) is None

    def test_n_m_shapes(self):
        p = DescriptorParams(n_extrema=2, m_segments=3)
        d = build_descriptor(self.x, self.ex, kp(100), p)
        assert d.values.size == 6

    def test_position_outside(self):
        with pytest.raises(DescriptorError):
            build_descriptor(self.x, self.ex, kp(10_000))

    def test_json_round_trip(self):
        d = build_descriptor(self.x, self.ex, kp(100))
        back = Descriptor.from_dict(json.loads(json.dumps(d.to_dict())))
        assert back.to_dict() == d.to_dict()

    @pytest.mark.parametrize("bad", [dict(n_extrema=3), dict(n_extrema=0), dict(m_segments=0),
                                     dict(delta=0), dict(min_neighborhood=1)])
    def test_param_invariants(self, bad):
        with pytest.raises(DescriptorError):
            DescriptorParams(**bad)


def synth_signals(count=20):
    shapes = ("bump_train", "step_ramp", "damped_oscillation", "chirp_burst")
    return [synth_event(SynthSpec(i, shapes[i % 4], scale_factor=0.8 + 0.05 * i,
                                  noise_std=0.05, seed=100 + i), 900) for i in range(count)]


class TestDescribeAll:
    def test_constant_signal(self):
        sig = Signal(np.full(300, 4.0))
        assert describe_all(sig, keypoints_for(sig)) == []

    def test_bump_train_has_descriptors(self):
        sig = synth_event(SynthSpec(0, "bump_train"), 900)
        descs = describe_all(sig, keypoints_for(sig))
        assert descs
        assert all(d.values.size == 16 and np.all(np.isfinite(d.values)) for d in descs)
        pos = [d.keypoint.position for d in descs]
        assert pos == sorted(pos)

    def test_dedupe_one_per_window(self):
        sig = synth_event(SynthSpec(0, "bump_train"), 900)
        kps = keypoints_for(sig)
        full = describe_all(sig, kps, DescriptorParams(dedupe=False))
        dd = describe_all(sig, kps)
        assert len({d.extrema_indices for d in dd}) == len(dd)
        assert {d.extrema_indices for d in dd} == {d.extrema_indices for d in full}

    def test_peak_elements_nonnegative(self):
        for sig in synth_signals():
            for d in describe_all(sig, keypoints_for(sig)):
                assert d.values.size == 16
                for j, kind in enumerate(d.extrema_kinds):
                    if kind == "peak":
                        assert np.all(d.values[4 * j:4 * j + 4] >= 0)

    @pytest.mark.parametrize("transform", [lambda x: 0.1 * x, lambda x: 10.0 * x,
                                           lambda x: x + 7.5, lambda x: x - 42.0])
    def test_amplitude_and_offset_invariance(self, transform):
        for sig in synth_signals():
            base = describe_all(sig, keypoints_for(sig))
            moved = Signal(transform(sig.samples))
            other = describe_all(moved, keypoints_for(moved))
            assert [d.extrema_indices for d in base] == [d.extrema_indices for d in other]
            for a, b in zip(base, other):
                assert np.allclose(a.values, b.values, rtol=1e-12, atol=0)

    def test_smoothed_option(self):
        sig = synth_event(SynthSpec(0, "bump_train", noise_std=0.3, seed=3), 900)
        descs = describe_all(sig, keypoints_for(sig), DescriptorParams(extrema_sigma=2.0))
        assert all(d.values.size == 16 for d in descs)


class TestSweep:
    def test_counts(self):
        res = closeness_sweep()
        assert (res.close_cases, res.total_cases) == (33462, 47329)
        assert res.summary() == "close=33462 total=47329 fraction=0.7070"

    def test_theta1_count(self):
        assert inclusive_range(0.05, 0.005, 0.45).size == 81

    def test_range_semantics(self):
        assert inclusive_range(1.0, 0.5, 2.0).tolist() == [1.0, 1.5, 2.0]
        assert inclusive_range(1.25, 0.05, 1.0).size == 0

    def test_identity_dilation_is_close(self):
        r1 = cap_ratio(0.2 * math.pi, 0.3 * math.pi)
        assert is_close(cap_ratio(0.2 * math.pi, 0.3 * math.pi) / r1)
        assert is_close([CLOSE_LOW, CLOSE_HIGH]).all()
        assert not is_close([0.66, 1.51]).any()


def valley_cap(theta_left, theta_right, n=40):
    """Valley whose flanks make the given angles with the vertical."""
    left = 1.0 / math.tan(theta_left)
    right = 1.0 / math.tan(theta_right)
    i = np.arange(-n, n + 1, dtype=np.float64)
    return np.where(i < 0, -left * i, right * i)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 0.45), st.floats(0.0, 1.0), st.floats(1.25, 9.0))
def test_wedge_dilation_matches_sweep(t1f, t2frac, s):
    t1 = t1f * math.pi
    t2 = t1 + t2frac * (0.45 * math.pi - t1)
    assume(s * t2 <= 0.45 * math.pi)
    base = extremum_ratios(valley_cap(t1, t2), 40, False, 4, 5)
    dil = extremum_ratios(valley_cap(s * t1, s * t2), 40, False, 4, 5)
    predicted = cap_ratio(s * t1, s * t2) / cap_ratio(t1, t2)
    for a, b in zip(base, dil):
        assert b / a == pytest.approx(predicted, rel=1e-9)
    ratio = np.array(dil) / np.array(base)
    if is_close(predicted) and CLOSE_LOW * (1 + 1e-9) < predicted < CLOSE_HIGH * (1 - 1e-9):
        assert np.all(is_close(ratio))
