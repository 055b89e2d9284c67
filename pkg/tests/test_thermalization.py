"""Calibration inversion, change detection, vertex fits, region reports."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reskit.core import TimeSeries
from reskit.errors import (
    InsufficientData,
    InvariantViolation,
    NoChangeDetected,
    NoInteriorExtremum,
    NonMonotoneInput,
    OutOfRange,
)
from reskit.thermalization import (
    Calibration,
    RegionFailure,
    RegionMarks,
    build_calibration,
    detect_change_start,
    fit_asymmetric_parabola,
    frequency_to_temperature,
    pairwise_report,
)


def make_calibration(n=21, lo=0.30, hi=0.50):
    temps = np.linspace(lo, hi, n)
    freqs = 6e9 - 4e5 * (temps - lo) - 3e5 * (temps - lo) ** 2
    return build_calibration(zip(temps, freqs)), temps, freqs


class TestBuildCalibration:
    def test_passes_through_knots(self):
        cal, temps, freqs = make_calibration()
        for t, f in zip(temps, freqs):
            assert cal.frequency_at(float(t)) == pytest.approx(f, abs=1e-6)

    def test_valid_range_matches_knots(self):
        cal, temps, _ = make_calibration()
        assert cal.valid_range_k == (temps[0], temps[-1])

    def test_evaluation_outside_range_rejected(self):
        cal, _, _ = make_calibration()
        with pytest.raises(OutOfRange):
            cal.frequency_at(0.29)
        with pytest.raises(OutOfRange):
            cal.frequency_at(0.51)

    def test_too_few_points(self):
        with pytest.raises(InsufficientData):
            build_calibration([(0.3, 6e9), (0.4, 5.9e9), (0.5, 5.8e9)])

    def test_nonincreasing_temperature_names_offending_pair(self):
        points = [(0.30, 6e9), (0.35, 5.99e9), (0.35, 5.98e9), (0.5, 5.9e9)]
        with pytest.raises(NonMonotoneInput) as err:
            build_calibration(points)
        assert "points 1 and 2" in str(err.value)

    def test_nondecreasing_frequency_names_offending_pair(self):
        points = [(0.30, 6e9), (0.35, 5.99e9), (0.40, 5.995e9), (0.5, 5.9e9)]
        with pytest.raises(NonMonotoneInput) as err:
            build_calibration(points)
        assert "points 1 and 2" in str(err.value)

    def test_malformed_points_rejected(self):
        with pytest.raises(InvariantViolation):
            build_calibration([(0.3, 6e9, 1.0), (0.4, 5.9e9, 1.0)])


class TestInversion:
    def test_knot_frequencies_invert_exactly(self):
        cal, temps, freqs = make_calibration()
        for t, f in zip(temps, freqs):
            assert frequency_to_temperature(cal, float(f)) == float(t)

    def test_interior_roundtrip_under_tolerance(self):
        cal, _, _ = make_calibration()
        for t in (0.312, 0.377, 0.439, 0.481):
            f = cal.frequency_at(t)
            assert frequency_to_temperature(cal, f) == pytest.approx(
                t, abs=2e-5
            )

    def test_frequency_outside_interval_rejected(self):
        cal, _, freqs = make_calibration()
        with pytest.raises(OutOfRange):
            frequency_to_temperature(cal, freqs[0] + 1.0)
        with pytest.raises(OutOfRange):
            frequency_to_temperature(cal, freqs[-1] - 1.0)


def series(values):
    return TimeSeries.from_values(np.asarray(values, dtype=float))


class TestDetectChangeStart:
    def test_flat_then_decreasing(self):
        v = np.concatenate([np.zeros(30), -50.0 * np.arange(1, 31)])
        # Window means stay flat through index 25; the first window whose
        # mean already falls is the one starting at 25.
        assert detect_change_start(series(v), "decreasing") == 25

    def test_flat_then_increasing(self):
        v = np.concatenate([np.zeros(30), 50.0 * np.arange(1, 31)])
        assert detect_change_start(series(v), "increasing") == 25

    def test_single_spike_does_not_reset_detection(self):
        v = np.concatenate([np.zeros(30), -50.0 * np.arange(1, 31)])
        v[7] = 40.0  # one bad sample inside the flat head
        assert detect_change_start(series(v), "decreasing") == 25

    def test_window_size_sets_quantization(self):
        v = np.concatenate([np.zeros(30), -50.0 * np.arange(1, 31)])
        assert detect_change_start(series(v), "decreasing", window=3) == 27

    def test_monotone_from_start_returns_zero(self):
        v = -10.0 * np.arange(60, dtype=float)
        assert detect_change_start(series(v), "decreasing") == 0

    def test_wrong_final_direction_raises(self):
        v = np.concatenate([np.zeros(30), 50.0 * np.arange(1, 31)])
        with pytest.raises(NoChangeDetected):
            detect_change_start(series(v), "decreasing")

    def test_too_short_series(self):
        with pytest.raises(InsufficientData):
            detect_change_start(series(np.arange(10.0)), "decreasing")

    def test_bad_direction_rejected(self):
        with pytest.raises(InvariantViolation):
            detect_change_start(series(np.arange(60.0)), "sideways")

    @given(
        offset=st.floats(-1e6, 1e6),
        head=st.integers(2, 8),
    )
    @settings(max_examples=40, deadline=None)
    def test_translation_invariance(self, offset, head):
        v = np.concatenate(
            [np.zeros(5 * head), -50.0 * np.arange(1, 31)]
        )
        base = detect_change_start(series(v), "decreasing")
        shifted = detect_change_start(series(v + offset), "decreasing")
        assert shifted == base

    @given(head=st.integers(2, 8))
    @settings(max_examples=20, deadline=None)
    def test_negation_swaps_direction(self, head):
        v = np.concatenate([np.zeros(5 * head), -50.0 * np.arange(1, 31)])
        down = detect_change_start(series(v), "decreasing")
        up = detect_change_start(series(-v), "increasing")
        assert down == up


class TestAsymmetricParabola:
    def test_exact_symmetric_minimum(self):
        x = np.arange(21, dtype=float)
        v = 3.0 + 2.0 * (x - 9.3) ** 2
        vertex, value = fit_asymmetric_parabola(series(v), "minimum")
        assert vertex == pytest.approx(9.3, abs=1e-9)
        assert value == pytest.approx(3.0, abs=1e-9)

    def test_exact_asymmetric_maximum(self):
        x = np.arange(31, dtype=float)
        left = x < 14.25
        v = np.where(
            left,
            7.0 - 1.5 * (x - 14.25) ** 2,
            7.0 - 0.4 * (x - 14.25) ** 2,
        )
        vertex, value = fit_asymmetric_parabola(series(v), "maximum")
        assert vertex == pytest.approx(14.25, abs=1e-6)
        assert value == pytest.approx(7.0, abs=1e-6)

    @given(
        shift=st.floats(-1e5, 1e5),
        scale=st.floats(0.01, 100.0),
    )
    @settings(max_examples=30, deadline=None)
    def test_affine_invariance_of_vertex(self, shift, scale):
        x = np.arange(25, dtype=float)
        v = 5.0 + 1.7 * (x - 11.6) ** 2
        base, _ = fit_asymmetric_parabola(series(v), "minimum")
        moved, moved_value = fit_asymmetric_parabola(
            series(scale * v + shift), "minimum"
        )
        assert moved == pytest.approx(base, abs=1e-6)
        assert moved_value == pytest.approx(scale * 5.0 + shift, rel=1e-6,
                                            abs=1e-6)

    def test_edge_extremum_rejected(self):
        v = np.arange(20, dtype=float)  # minimum sits at the first sample
        with pytest.raises(NoInteriorExtremum):
            fit_asymmetric_parabola(series(v), "minimum")

    def test_too_few_points(self):
        v = np.array([3.0, 1.0, 0.5, 1.0, 3.0, 6.0])
        with pytest.raises(InsufficientData):
            fit_asymmetric_parabola(series(v), "minimum")

    def test_bad_kind_rejected(self):
        with pytest.raises(InvariantViolation):
            fit_asymmetric_parabola(series(np.zeros(10) + 1.0), "saddle")


def make_profile():
    """Piecewise series with a decrease onset, a minimum, an increase
    onset, and a maximum, one per report region."""
    flat = np.zeros(40)
    down = -30.0 * np.arange(1, 21, dtype=float)
    vee = np.concatenate([down, down[-1] + 25.0 * np.arange(1, 26)])
    flat2 = np.full(35, vee[-1])
    up = vee[-1] + 40.0 * np.arange(1, 21, dtype=float)
    hump = np.concatenate([up, up[-1] - 35.0 * np.arange(1, 26)])
    v = np.concatenate([flat, vee, flat2, hump])
    bounds = ((0, 60), (40, 85), (85, 140), (120, 165))
    return series(v), bounds


class TestPairwiseReport:
    def test_self_comparison_is_all_zero(self):
        s, bounds = make_profile()
        report = pairwise_report(s, s, bounds)
        assert len(report) == 4
        assert [m.region for m in report] == ["I", "II", "III", "IV"]
        for m in report:
            assert isinstance(m, RegionMarks)
            assert m.resonator_a_point == m.resonator_b_point
            assert m.difference == 0

    def test_region_failure_does_not_abort(self):
        s, bounds = make_profile()
        # Region II sliced where the series is flat: no interior minimum.
        bad_bounds = (bounds[0], (0, 30), bounds[2], bounds[3])
        report = pairwise_report(s, s, bad_bounds)
        assert isinstance(report[1], RegionFailure)
        assert report[1].region == "II"
        assert report[1].reason
        assert isinstance(report[0], RegionMarks)
        assert isinstance(report[2], RegionMarks)

    def test_wrong_region_count_rejected(self):
        s, bounds = make_profile()
        with pytest.raises(InvariantViolation):
            pairwise_report(s, s, bounds[:3])

    def test_unordered_regions_rejected(self):
        s, bounds = make_profile()
        with pytest.raises(InvariantViolation):
            pairwise_report(s, s, (bounds[1], bounds[0], bounds[2], bounds[3]))

    def test_marks_record_validates_difference(self):
        with pytest.raises(InvariantViolation):
            RegionMarks(
                region="I", resonator_a_point=5, resonator_b_point=3,
                difference=1,
            )

    def test_marks_record_validates_label(self):
        with pytest.raises(InvariantViolation):
            RegionMarks(
                region="V", resonator_a_point=5, resonator_b_point=3,
                difference=2,
            )
