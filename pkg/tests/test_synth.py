"""Synthetic-measurement generators: exactness, determinism, fixtures."""

import numpy as np
import pytest

from reskit.core import TimeSeries
from reskit.errors import InvariantViolation, NonMonotoneInput
from reskit.mattis_bardeen import model_complex_frequency
from reskit.resonance import model_s21
from reskit.stability import stability_sigma
from reskit.synth import (
    CANONICAL_REGION_BOUNDS,
    RNG_ALGORITHM,
    DeviceTruth,
    NoiseSpec,
    canonical_bath_profile,
    canonical_device_truth,
    gen_power_sweep,
    gen_temp_sweep,
    gen_thermal_response,
    gen_trace,
)
from reskit.thermalization import RegionMarks, pairwise_report
from reskit.tls import eval_tls_loss

GRID = np.linspace(6e9 - 2.7e5, 6e9 + 2.7e5, 801)
NBARS = np.logspace(-2, 6, 33)
TEMPS = np.round(np.arange(0.10, 0.5001, 0.01), 10)


class TestNoiselessExactness:
    def test_trace_equals_forward_model(self):
        truth = canonical_device_truth()
        trace = gen_trace(truth, GRID)
        assert np.array_equal(trace.s21, model_s21(truth.resonance, GRID))
        assert np.array_equal(trace.frequency_hz, GRID)

    def test_power_sweep_equals_loss_model(self):
        truth = canonical_device_truth()
        pts = gen_power_sweep(truth, NBARS)
        expected = eval_tls_loss(truth.tls, NBARS, truth.tls.temperature_k)
        assert [p.delta_i for p in pts] == list(expected)
        assert all(p.delta_i_sigma == 0.0 for p in pts)

    def test_temp_sweep_matches_thermal_model(self):
        truth = canonical_device_truth()
        pts = gen_temp_sweep(truth, TEMPS)
        for p in pts[::10]:
            z = model_complex_frequency(truth.mb, p.temperature_k)
            assert p.f_hz == pytest.approx(z.real, abs=1e-5)
            assert p.im_hz == pytest.approx(z.imag, abs=1e-8)

    def test_constant_bath_gives_constant_frequency(self):
        truth = canonical_device_truth()
        bath = TimeSeries.from_values(np.full(60, 0.42))
        out = gen_thermal_response(truth, bath)
        assert np.all(out.values == out.values[0])

    def test_tiny_time_constant_tracks_bath_exactly(self):
        # decay factor exp(-dt/tau) underflows to zero, so the device
        # temperature equals the bath sample by sample and the output is
        # piecewise constant across a bath step.
        truth = canonical_device_truth(thermal_tau_s=1e-12)
        step = np.concatenate([np.full(30, 0.43), np.full(30, 0.38)])
        out = gen_thermal_response(truth, TimeSeries.from_values(step))
        assert np.all(out.values[:30] == out.values[0])
        assert np.all(out.values[30:] == out.values[30])
        assert out.values[30] > out.values[0]  # colder device, higher f

    def test_step_response_lag_grows_with_time_constant(self):
        step = np.concatenate([np.full(30, 0.43), np.full(60, 0.38)])
        bath = TimeSeries.from_values(step)
        fast = gen_thermal_response(
            canonical_device_truth(thermal_tau_s=5.0), bath
        )
        slow = gen_thermal_response(
            canonical_device_truth(thermal_tau_s=40.0), bath
        )
        # Both devices start settled and rise toward the colder bath's
        # frequency, but at any instant after the step the slow device
        # has covered less of the way.
        assert fast.values[0] == slow.values[0]
        for k in (35, 45, 60, 89):
            assert slow.values[k] < fast.values[k]


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        noise = NoiseSpec(trace_rel=0.005, loss_rel=0.05,
                          temp_sweep_hz=50.0, thermal_hz=50.0)
        a = canonical_device_truth(seed=3, noise=noise)
        b = canonical_device_truth(seed=3, noise=noise)
        assert np.array_equal(gen_trace(a, GRID).s21, gen_trace(b, GRID).s21)
        assert [p.delta_i for p in gen_power_sweep(a, NBARS)] == \
               [p.delta_i for p in gen_power_sweep(b, NBARS)]
        assert [p.f_hz for p in gen_temp_sweep(a, TEMPS)] == \
               [p.f_hz for p in gen_temp_sweep(b, TEMPS)]
        bath = canonical_bath_profile()
        assert np.array_equal(
            gen_thermal_response(a, bath).values,
            gen_thermal_response(b, bath).values,
        )

    def test_different_seeds_differ(self):
        noise = NoiseSpec(trace_rel=0.005)
        a = canonical_device_truth(seed=0, noise=noise)
        b = canonical_device_truth(seed=1, noise=noise)
        assert not np.array_equal(
            gen_trace(a, GRID).s21, gen_trace(b, GRID).s21
        )

    def test_streams_are_operation_independent(self):
        # Drawing the trace stream must not perturb the power stream.
        noise = NoiseSpec(trace_rel=0.005, loss_rel=0.05)
        t1 = canonical_device_truth(seed=5, noise=noise)
        first = [p.delta_i for p in gen_power_sweep(t1, NBARS)]
        gen_trace(t1, GRID)
        second = [p.delta_i for p in gen_power_sweep(t1, NBARS)]
        assert first == second

    def test_rng_algorithm_label(self):
        assert RNG_ALGORITHM == "numpy-pcg64"


class TestNoiseScales:
    def test_trace_noise_amplitude(self):
        truth = canonical_device_truth(seed=2, noise=NoiseSpec(trace_rel=0.01))
        clean = model_s21(truth.resonance, GRID)
        resid = gen_trace(truth, GRID).s21 - clean
        sigma = truth.noise.trace_rel * truth.resonance.background.amplitude
        measured = np.std(np.concatenate([resid.real, resid.imag]))
        assert measured == pytest.approx(sigma, rel=0.1)

    def test_loss_noise_is_multiplicative(self):
        truth = canonical_device_truth(seed=2, noise=NoiseSpec(loss_rel=0.05))
        pts = gen_power_sweep(truth, NBARS)
        clean = eval_tls_loss(truth.tls, NBARS, truth.tls.temperature_k)
        log_resid = np.log([p.delta_i for p in pts] / clean)
        assert np.std(log_resid) == pytest.approx(0.05, rel=0.35)
        for p, c in zip(pts, clean):
            assert p.delta_i_sigma == pytest.approx(0.05 * p.delta_i)

    def test_negative_noise_rejected(self):
        with pytest.raises(InvariantViolation):
            NoiseSpec(trace_rel=-0.01)


class TestCanonicalFixtures:
    def test_bath_profile_shape_and_range(self):
        bath = canonical_bath_profile()
        assert len(bath) == 770
        assert np.all(np.diff(bath.time_s) == 1.0)
        assert bath.values[0] == 0.43
        assert float(bath.values.min()) == pytest.approx(0.38)
        assert float(bath.values.max()) == pytest.approx(0.4425)
        assert np.all((bath.values >= 0.30) & (bath.values <= 0.50))

    def test_region_bounds_tile_the_profile(self):
        bath = canonical_bath_profile()
        bounds = CANONICAL_REGION_BOUNDS
        assert len(bounds) == 4
        assert bounds[0][0] == 0
        assert bounds[-1][1] == len(bath)
        for (a, b), (c, d) in zip(bounds, bounds[1:]):
            assert a < b
            assert b == c

    def test_truth_time_constant_validated(self):
        with pytest.raises(InvariantViolation):
            canonical_device_truth(thermal_tau_s=0.0)


class TestThermalComparison:
    def test_equal_time_constants_give_zero_marks(self):
        bath = canonical_bath_profile()
        a = gen_thermal_response(
            canonical_device_truth(thermal_tau_s=40.0), bath
        )
        b = gen_thermal_response(
            canonical_device_truth(seed=1, thermal_tau_s=40.0), bath
        )
        report = pairwise_report(a, b, CANONICAL_REGION_BOUNDS)
        for m in report:
            assert isinstance(m, RegionMarks)
            assert m.difference == 0

    def test_slower_device_marks_later_everywhere(self):
        bath = canonical_bath_profile()
        a = gen_thermal_response(
            canonical_device_truth(thermal_tau_s=80.0), bath
        )
        b = gen_thermal_response(
            canonical_device_truth(thermal_tau_s=40.0), bath
        )
        report = pairwise_report(a, b, CANONICAL_REGION_BOUNDS)
        for m in report:
            assert isinstance(m, RegionMarks)
            assert m.difference >= 1

    def test_response_is_smooth_without_noise(self):
        bath = canonical_bath_profile()
        out = gen_thermal_response(
            canonical_device_truth(thermal_tau_s=40.0), bath
        )
        assert stability_sigma(out) > 0.0
        # one-sample steps stay below 1 kHz for this profile
        assert float(np.max(np.abs(np.diff(out.values)))) < 1e3


class TestInputValidation:
    def test_trace_grid_must_increase(self):
        truth = canonical_device_truth()
        with pytest.raises(NonMonotoneInput):
            gen_trace(truth, [6e9, 6e9 - 1e5, 6e9 + 1e5])

    def test_power_grid_must_be_positive(self):
        truth = canonical_device_truth()
        with pytest.raises(InvariantViolation):
            gen_power_sweep(truth, [0.0, 1.0, 10.0])

    def test_power_grid_must_increase(self):
        truth = canonical_device_truth()
        with pytest.raises(NonMonotoneInput):
            gen_power_sweep(truth, [1.0, 1.0, 10.0])

    def test_temp_grid_must_increase(self):
        truth = canonical_device_truth()
        with pytest.raises(NonMonotoneInput):
            gen_temp_sweep(truth, [0.3, 0.2, 0.4])
