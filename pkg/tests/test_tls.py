"""Saturable loss model: evaluation, outlier screening, fitting, summaries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reskit.core import TlsFit
from reskit.errors import (
    DegenerateSweep,
    EmptyCohort,
    InsufficientData,
    InvariantViolation,
    NonMonotoneInput,
)
from reskit.tls import (
    PHOTON_FLOOR,
    REASON_FLOOR,
    REASON_HIGH,
    REASON_LOW,
    PowerSweepPoint,
    cohort_medians,
    eval_tls_loss,
    filter_outliers,
    fit_power_sweep,
    summary_qi,
)

CANONICAL = TlsFit(
    delta_tls0=8e-6, n_c=10.0, beta=0.5, delta_other=4e-6,
    frequency_hz=6e9, temperature_k=0.1,
)


class TestEvalTlsLoss:
    # Reference values from mpmath at 30 significant digits:
    # occupancy tanh(hf/2kT) and the saturation root evaluated exactly
    # for the canonical parameter set.
    def test_known_value_at_1000_photons(self):
        assert eval_tls_loss(CANONICAL, 1000.0, 0.1) == pytest.approx(
            6.155569743632092e-06, rel=1e-14
        )

    def test_known_value_at_one_photon(self):
        assert eval_tls_loss(CANONICAL, 1.0, 0.1) == pytest.approx(
            1.0231504279293919e-05, rel=1e-14
        )

    def test_zero_photons_gives_unsaturated_loss(self):
        occ = np.tanh(
            6.62607015e-34 * 6e9 / (2 * 1.380649e-23 * 0.1)
        )
        assert eval_tls_loss(CANONICAL, 0.0, 0.1) == pytest.approx(
            8e-6 * occ + 4e-6, rel=1e-14
        )

    def test_scalar_in_scalar_out(self):
        out = eval_tls_loss(CANONICAL, 5.0, 0.1)
        assert isinstance(out, float)

    def test_array_matches_scalars(self):
        n = np.array([0.01, 1.0, 100.0])
        arr = eval_tls_loss(CANONICAL, n, 0.1)
        assert arr.shape == (3,)
        for k, nk in enumerate(n):
            assert arr[k] == eval_tls_loss(CANONICAL, float(nk), 0.1)

    @given(
        lo=st.floats(1e-3, 1e5),
        ratio=st.floats(1.01, 1e3),
        beta=st.floats(0.1, 1.0),
        nc=st.floats(0.1, 1e3),
    )
    @settings(max_examples=50, deadline=None)
    def test_monotone_decreasing_in_photon_number(self, lo, ratio, beta, nc):
        fit = TlsFit(
            delta_tls0=8e-6, n_c=nc, beta=beta, delta_other=4e-6,
            frequency_hz=6e9, temperature_k=0.1,
        )
        assert eval_tls_loss(fit, lo * ratio, 0.1) < eval_tls_loss(
            fit, lo, 0.1
        )

    @given(n=st.floats(0.0, 1e6), t_lo=st.floats(0.02, 0.3),
           factor=st.floats(1.1, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_warming_reduces_tls_term(self, n, t_lo, factor):
        assert eval_tls_loss(CANONICAL, n, t_lo * factor) < eval_tls_loss(
            CANONICAL, n, t_lo
        )

    def test_saturates_to_delta_other(self):
        assert eval_tls_loss(CANONICAL, 1e15, 0.1) == pytest.approx(
            4e-6, rel=1e-3
        )

    def test_rejects_negative_photon_number(self):
        with pytest.raises(InvariantViolation):
            eval_tls_loss(CANONICAL, -1.0, 0.1)

    def test_rejects_nonpositive_temperature(self):
        with pytest.raises(InvariantViolation):
            eval_tls_loss(CANONICAL, 1.0, 0.0)


def sweep_from(nbar, delta):
    return [PowerSweepPoint(n, d) for n, d in zip(nbar, delta)]


class TestFilterOutliers:
    def test_clean_sweep_keeps_everything(self):
        nbar = np.logspace(-2, 4, 10)
        delta = eval_tls_loss(CANONICAL, nbar, 0.1)
        rep = filter_outliers(sweep_from(nbar, delta))
        assert rep.kept == tuple(range(10))
        assert rep.dropped_low == ()
        assert rep.dropped_high == ()
        assert rep.window_floor == PHOTON_FLOOR

    def test_photon_floor_prefix_dropped(self):
        nbar = [2e-4, 6e-4, 0.01, 0.1, 1.0, 10.0]
        delta = [9e-6, 9e-6, 8e-6, 7e-6, 6e-6, 5e-6]
        rep = filter_outliers(sweep_from(nbar, delta))
        assert rep.dropped_low == ((0, REASON_FLOOR), (1, REASON_FLOOR))
        assert rep.kept == (2, 3, 4, 5)

    def test_low_end_dip_dropped(self):
        # First point sits 15% below its neighbor: a low-power anomaly.
        nbar = [0.01, 0.1, 1.0, 10.0, 100.0]
        delta = [0.85 * 9e-6, 9e-6, 8e-6, 7e-6, 6e-6]
        rep = filter_outliers(sweep_from(nbar, delta))
        assert rep.dropped_low == ((0, REASON_LOW),)
        assert rep.kept == (1, 2, 3, 4)

    def test_high_end_rise_dropped(self):
        nbar = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
        delta = [9e-6, 8e-6, 7e-6, 6e-6, 1.2 * 6e-6, 1.15 * 1.2 * 6e-6]
        rep = filter_outliers(sweep_from(nbar, delta))
        assert rep.dropped_high == ((5, REASON_HIGH), (4, REASON_HIGH))
        assert rep.kept == (0, 1, 2, 3)

    def test_all_three_screens_together(self):
        nbar = [2e-4, 6e-4, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0,
                100.0, 300.0]
        base = [10e-6, 9.9e-6, 9.6e-6, 9.3e-6, 9.0e-6, 8.6e-6, 8.3e-6]
        delta = [5e-6, 5e-6, 0.85 * 10e-6] + base + [
            1.2 * base[-1], 1.14 * 1.2 * base[-1]
        ]
        rep = filter_outliers(sweep_from(nbar, delta))
        assert rep.dropped_low == (
            (0, REASON_FLOOR), (1, REASON_FLOOR), (2, REASON_LOW),
        )
        assert rep.dropped_high == ((11, REASON_HIGH), (10, REASON_HIGH))
        assert rep.kept == (3, 4, 5, 6, 7, 8, 9)

    def test_idempotent_on_kept_set(self):
        nbar = [2e-4, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
        delta = [8e-6, 0.8 * 9e-6, 9e-6, 8e-6, 7e-6, 6e-6, 6.9e-6]
        rep = filter_outliers(sweep_from(nbar, delta))
        pts = sweep_from(nbar, delta)
        kept_pts = [pts[i] for i in rep.kept]
        rep2 = filter_outliers(kept_pts)
        assert rep2.kept == tuple(range(len(kept_pts)))
        assert rep2.dropped_low == ()
        assert rep2.dropped_high == ()

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_idempotence_property(self, data):
        n = data.draw(st.integers(6, 14))
        nbar = np.logspace(-4, 4, n)
        deltas = data.draw(
            st.lists(
                st.floats(1e-7, 1e-4, allow_nan=False),
                min_size=n, max_size=n,
            )
        )
        try:
            rep = filter_outliers(sweep_from(nbar, deltas))
        except InsufficientData:
            return
        kept_pts = [PowerSweepPoint(nbar[i], deltas[i]) for i in rep.kept]
        rep2 = filter_outliers(kept_pts)
        assert rep2.kept == tuple(range(len(kept_pts)))
        assert rep2.dropped_low == () and rep2.dropped_high == ()

    def test_rejects_unsorted_sweep(self):
        pts = sweep_from([1.0, 0.1, 10.0], [8e-6, 9e-6, 7e-6])
        with pytest.raises(NonMonotoneInput):
            filter_outliers(pts)

    def test_too_few_survivors(self):
        nbar = [1e-4, 2e-4, 3e-4, 1.0, 10.0, 100.0]
        delta = [9e-6] * 6
        with pytest.raises(InsufficientData):
            filter_outliers(sweep_from(nbar, delta))

    def test_report_partition_invariant_enforced(self):
        from reskit.tls import OutlierReport

        with pytest.raises(InvariantViolation):
            OutlierReport(kept=(0, 2), dropped_low=((3, REASON_LOW),))


class TestFitPowerSweep:
    def test_noiseless_roundtrip(self):
        nbar = np.logspace(-2, 6, 33)
        delta = eval_tls_loss(CANONICAL, nbar, 0.1)
        fit = fit_power_sweep(sweep_from(nbar, delta), 6e9, 0.1)
        assert fit.delta_tls0 == pytest.approx(8e-6, rel=1e-6)
        assert fit.n_c == pytest.approx(10.0, rel=1e-5)
        assert fit.beta == pytest.approx(0.5, rel=1e-5)
        assert fit.delta_other == pytest.approx(4e-6, rel=1e-6)
        assert fit.frequency_hz == 6e9
        assert fit.temperature_k == 0.1

    def test_uncertainty_keys_present(self):
        nbar = np.logspace(-2, 6, 33)
        rng = np.random.Generator(np.random.PCG64(11))
        delta = eval_tls_loss(CANONICAL, nbar, 0.1) * np.exp(
            0.05 * rng.standard_normal(nbar.size)
        )
        fit = fit_power_sweep(sweep_from(nbar, delta), 6e9, 0.1)
        for key in ("delta_tls0", "n_c", "beta", "delta_other"):
            assert key in fit.uncertainties
            assert np.isfinite(fit.uncertainties[key])

    def test_sigma_weighting_accepted(self):
        nbar = np.logspace(-2, 6, 25)
        delta = eval_tls_loss(CANONICAL, nbar, 0.1)
        pts = [
            PowerSweepPoint(n, d, delta_i_sigma=0.02 * d)
            for n, d in zip(nbar, delta)
        ]
        fit = fit_power_sweep(pts, 6e9, 0.1)
        assert fit.delta_tls0 == pytest.approx(8e-6, rel=1e-5)

    def test_degenerate_flat_sweep_rejected(self):
        nbar = np.logspace(-2, 4, 12)
        delta = 4e-6 * (1.0 + 0.01 * np.sin(np.arange(12)))
        with pytest.raises(DegenerateSweep):
            fit_power_sweep(sweep_from(nbar, delta), 6e9, 0.1)

    def test_too_few_points_rejected(self):
        nbar = [0.1, 1.0, 10.0]
        delta = [9e-6, 8e-6, 6e-6]
        with pytest.raises(InsufficientData):
            fit_power_sweep(sweep_from(nbar, delta), 6e9, 0.1)


class TestSummaries:
    def test_summary_qi_canonical_values(self):
        qi_low, qi_high = summary_qi(CANONICAL)
        # Reference values from mpmath at 30 significant digits.
        assert qi_low == pytest.approx(97737.33878250506, rel=1e-13)
        assert qi_high == pytest.approx(250000.0, rel=1e-14)

    def test_cohort_medians_odd_cohort(self):
        scales = (1.10, 1.05, 1.00, 0.95, 0.90)
        fits = [
            TlsFit(
                delta_tls0=s * 8e-6, n_c=10.0, beta=0.5,
                delta_other=s * 4e-6, frequency_hz=6e9, temperature_k=0.1,
            )
            for s in scales
        ]
        center_low, center_high = summary_qi(fits[2])
        med = cohort_medians([(f, "a") for f in fits])
        assert med["a"] == (center_low, center_high)

    def test_cohort_medians_groups_by_label(self):
        f1 = CANONICAL
        f2 = TlsFit(
            delta_tls0=4e-6, n_c=5.0, beta=0.4, delta_other=2e-6,
            frequency_hz=5e9, temperature_k=0.1,
        )
        med = cohort_medians([(f1, "x"), (f2, "y")])
        assert set(med) == {"x", "y"}
        assert med["x"] == summary_qi(f1)
        assert med["y"] == summary_qi(f2)

    def test_even_cohort_averages_central_pair(self):
        f1 = CANONICAL
        f2 = TlsFit(
            delta_tls0=8e-6, n_c=10.0, beta=0.5, delta_other=5e-6,
            frequency_hz=6e9, temperature_k=0.1,
        )
        med = cohort_medians([(f1, "a"), (f2, "a")])
        lows = sorted([summary_qi(f1)[0], summary_qi(f2)[0]])
        assert med["a"][0] == pytest.approx(0.5 * (lows[0] + lows[1]))

    def test_empty_cohort_rejected(self):
        with pytest.raises(EmptyCohort):
            cohort_medians([])
