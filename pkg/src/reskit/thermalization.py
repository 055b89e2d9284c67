"""Frequency-temperature calibration and thermal-response comparison.

Builds an invertible frequency versus temperature calibration from stepped
warm-up data, converts monitored frequencies back to device temperatures,
locates where a monitoring series starts to move, fits asymmetric-parabola
extrema, and reduces two interleaved monitoring series to integer
point-difference marks over four regions of interest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import least_squares

from .core import TimeSeries
from .errors import (
    InsufficientData,
    InvariantViolation,
    NoChangeDetected,
    NoInteriorExtremum,
    NonConvergence,
    NonMonotoneInput,
    OutOfRange,
)

REGION_LABELS = ("I", "II", "III", "IV")

_INVERT_TOL_K = 1e-5  # bisection stops below 0.01 mK
_MIN_CAL_POINTS = 4
_MIN_PARABOLA_POINTS = 7


@dataclass(frozen=True)
class Calibration:
    """Monotone frequency-temperature relation over a fitted range."""

    knots_temperature_k: np.ndarray
    knots_frequency_hz: np.ndarray
    interpolant: PchipInterpolator
    valid_range_k: tuple[float, float]

    def frequency_at(self, temperature_k):
        """Evaluate the calibrated frequency at in-range temperatures."""
        t = np.asarray(temperature_k, dtype=float)
        lo, hi = self.valid_range_k
        if np.any(t < lo) or np.any(t > hi):
            raise OutOfRange(
                f"temperature outside calibrated range [{lo}, {hi}] K"
            )
        out = self.interpolant(t)
        if np.isscalar(temperature_k):
            return float(out)
        return out


@dataclass(frozen=True)
class RegionMarks:
    """Integer point marks for one region of a two-resonator comparison."""

    region: str
    resonator_a_point: int
    resonator_b_point: int
    difference: int

    def __post_init__(self):
        if self.region not in REGION_LABELS:
            raise InvariantViolation(f"unknown region label {self.region!r}")
        if self.difference != self.resonator_a_point - self.resonator_b_point:
            raise InvariantViolation(
                "difference must equal resonator_a_point - resonator_b_point"
            )


@dataclass(frozen=True)
class RegionFailure:
    """Placeholder emitted when one region's analysis fails."""

    region: str
    reason: str


def build_calibration(points) -> Calibration:
    """Shape-preserving cubic through strictly ordered (T, f) pairs.

    The interpolant passes through every knot and preserves the strict
    decrease of frequency with temperature, so it is invertible on the
    calibrated range.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvariantViolation("calibration points must be (T, f) pairs")
    if pts.shape[0] < _MIN_CAL_POINTS:
        raise InsufficientData(
            f"need at least {_MIN_CAL_POINTS} calibration points, "
            f"got {pts.shape[0]}"
        )
    t = pts[:, 0]
    f = pts[:, 1]
    bad = np.flatnonzero(np.diff(t) <= 0.0)
    if bad.size:
        k = int(bad[0])
        raise NonMonotoneInput(
            f"temperatures must strictly increase; points {k} and {k + 1} "
            f"have T = {t[k]} and {t[k + 1]}"
        )
    bad = np.flatnonzero(np.diff(f) >= 0.0)
    if bad.size:
        k = int(bad[0])
        raise NonMonotoneInput(
            f"frequencies must strictly decrease; points {k} and {k + 1} "
            f"have f = {f[k]} and {f[k + 1]}"
        )
    interp = PchipInterpolator(t, f, extrapolate=False)
    return Calibration(
        knots_temperature_k=t.copy(),
        knots_frequency_hz=f.copy(),
        interpolant=interp,
        valid_range_k=(float(t[0]), float(t[-1])),
    )


def frequency_to_temperature(cal: Calibration, f_hz: float) -> float:
    """Invert the calibration by bisection to better than 0.01 mK."""
    f_knots = cal.knots_frequency_hz
    f_max = float(f_knots[0])
    f_min = float(f_knots[-1])
    if not f_min <= f_hz <= f_max:
        raise OutOfRange(
            f"frequency {f_hz} Hz outside calibrated interval "
            f"[{f_min}, {f_max}] Hz"
        )
    hit = np.flatnonzero(f_knots == f_hz)
    if hit.size:
        return float(cal.knots_temperature_k[hit[0]])
    lo, hi = cal.valid_range_k
    # Frequency decreases with T: f(lo) > f_hz > f(hi).
    while hi - lo > _INVERT_TOL_K:
        mid = 0.5 * (lo + hi)
        if float(cal.interpolant(mid)) > f_hz:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detect_change_start(
    series: TimeSeries, direction: str, window: int = 5
) -> int:
    """Index where a monitoring series starts moving in one direction.

    Averages consecutive non-overlapping windows and locates the longest
    suffix over which every difference of consecutive window means has the
    requested sign (negative for "decreasing", positive for "increasing").
    Returns the starting data index of the first window in that suffix.
    """
    if direction not in ("decreasing", "increasing"):
        raise InvariantViolation("direction must be decreasing or increasing")
    v = series.values
    n = v.size
    if window < 1:
        raise InvariantViolation("window must be positive")
    if n < 3 * window:
        raise InsufficientData(
            f"series of length {n} is shorter than 3 windows of {window}"
        )
    n_win = n // window
    means = v[: n_win * window].reshape(n_win, window).mean(axis=1)
    diffs = np.diff(means)
    if direction == "decreasing":
        good = diffs < 0.0
    else:
        good = diffs > 0.0
    if not good[-1]:
        raise NoChangeDetected(
            f"final window difference is not {direction}"
        )
    bad = np.flatnonzero(~good)
    first_good = int(bad[-1]) + 1 if bad.size else 0
    return first_good * window


def fit_asymmetric_parabola(series: TimeSeries, kind: str) -> tuple[float, float]:
    """Fit a shared-vertex piecewise quadratic and return (vertex, value).

    The two branches carry independent curvatures of the sign required by
    ``kind`` ("minimum" or "maximum") and meet at a continuous-valued vertex
    located in the series' index units.
    """
    if kind not in ("minimum", "maximum"):
        raise InvariantViolation("kind must be minimum or maximum")
    x = series.index.astype(float)
    v = series.values
    n = v.size
    if n < _MIN_PARABOLA_POINTS:
        raise InsufficientData(
            f"need at least {_MIN_PARABOLA_POINTS} points, got {n}"
        )
    sign = 1.0 if kind == "minimum" else -1.0
    w = sign * v
    interior_best = float(np.min(w[1:-1]))
    if w[0] <= interior_best or w[-1] <= interior_best:
        raise NoInteriorExtremum(
            f"series has no interior {kind}; its best value sits at an edge"
        )

    i0 = 1 + int(np.argmin(w[1:-1]))
    # Curvature scale from a plain quadratic through all points.
    coefs = np.polyfit(x, w, 2)
    a_scale = max(float(coefs[0]), 1e-12 * (np.max(w) - interior_best + 1e-30))

    # Parameters: [x0, c, ln a_left, ln a_right] in the sign-folded frame.
    def residuals(p):
        x0, c, ln_al, ln_ar = p
        a = np.where(x < x0, np.exp(ln_al), np.exp(ln_ar))
        return c + a * (x - x0) ** 2 - w

    p0 = np.array([x[i0], interior_best, np.log(a_scale), np.log(a_scale)])
    lower = [x[0], -np.inf, np.log(a_scale) - 30.0, np.log(a_scale) - 30.0]
    upper = [x[-1], np.inf, np.log(a_scale) + 30.0, np.log(a_scale) + 30.0]
    res = least_squares(
        residuals, p0, bounds=(lower, upper), x_scale="jac",
        xtol=1e-12, ftol=1e-12, gtol=None, max_nfev=2000,
    )
    if res.status <= 0:
        raise NonConvergence(
            f"asymmetric parabola fit did not converge: {res.message}"
        )
    x0, c = float(res.x[0]), float(res.x[1])
    return x0, sign * c


def _region_slice(series: TimeSeries, bounds) -> TimeSeries:
    start, stop = bounds
    mask = (series.index >= start) & (series.index < stop)
    if not np.any(mask):
        raise InsufficientData(
            f"series does not cover region [{start}, {stop})"
        )
    return TimeSeries(
        index=series.index[mask],
        time_s=series.time_s[mask],
        values=series.values[mask],
    )


def _region_point(series: TimeSeries, label: str, bounds) -> int:
    sub = _region_slice(series, bounds)
    if label == "I":
        return int(sub.index[detect_change_start(sub, "decreasing")])
    if label == "III":
        return int(sub.index[detect_change_start(sub, "increasing")])
    kind = "minimum" if label == "II" else "maximum"
    vertex, _ = fit_asymmetric_parabola(sub, kind)
    return int(round(vertex))


def pairwise_report(series_a: TimeSeries, series_b: TimeSeries, region_bounds):
    """Four-region point comparison of two interleaved monitoring series.

    Regions I and III mark where each series starts decreasing and
    increasing; regions II and IV mark fitted minimum and maximum vertices,
    rounded to the nearest point.  Differences are a minus b in shared point
    units.  A region whose analysis fails on either series contributes a
    RegionFailure entry instead of aborting the report.
    """
    bounds = list(region_bounds)
    if len(bounds) != 4:
        raise InvariantViolation("expected exactly four region intervals")
    starts = [b[0] for b in bounds]
    if starts != sorted(starts):
        raise InvariantViolation("regions must be ordered I through IV")
    report = []
    for label, b in zip(REGION_LABELS, bounds):
        try:
            pa = _region_point(series_a, label, b)
            pb = _region_point(series_b, label, b)
        except (
            InsufficientData,
            NoChangeDetected,
            NoInteriorExtremum,
            NonConvergence,
        ) as exc:
            report.append(RegionFailure(region=label, reason=str(exc)))
            continue
        report.append(
            RegionMarks(
                region=label,
                resonator_a_point=pa,
                resonator_b_point=pb,
                difference=pa - pb,
            )
        )
    return report
