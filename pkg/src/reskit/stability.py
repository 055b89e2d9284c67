"""Phase-monitoring stability analysis.

Calibrates the near-resonance phase versus frequency line of a fitted
trace, converts monitored phase excursions at a fixed readout point into
frequency shifts through that line, and summarizes frequency monitoring
series by their standard deviation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ComplexTrace, Geometry, ResonanceFit, TimeSeries
from .errors import (
    InsufficientData,
    InvariantViolation,
    OutOfLinearRange,
    WindowTooNarrow,
)

_MIN_WINDOW_POINTS = 8
_SLOPE_CONSISTENCY = 0.1


@dataclass(frozen=True)
class PhaseCalibration:
    """Linear phase-frequency relation close to resonance.

    ``slope`` is rad per Hz and stays within 10% of its ideal value
    2 q_total / f0 inside the fitted window; ``intercept`` is the phase at
    resonance including the trace's global phase offset.
    """

    slope: float
    intercept: float
    f0_hz: float
    q_total: float
    fit_window_hz: tuple[float, float]

    def __post_init__(self):
        ideal = 2.0 * self.q_total / self.f0_hz
        if abs(self.slope - ideal) / ideal >= _SLOPE_CONSISTENCY:
            raise InvariantViolation(
                f"phase slope {self.slope:.4e} rad/Hz deviates more than "
                f"{_SLOPE_CONSISTENCY:.0%} from 2 Q / f0 = {ideal:.4e}"
            )


def calibrate_phase(
    trace: ComplexTrace, fit: ResonanceFit, window_linewidths: float = 0.5
) -> PhaseCalibration:
    """Fit the phase versus frequency line inside a window around f0.

    The window spans ``window_linewidths`` resonance linewidths in total,
    f0/q_total each side being half a linewidth.  The phase fitted is that
    of the background-normalized resonator response, whose slope at
    resonance is 2 q_total / f0 regardless of coupling; the sign convention
    makes the slope positive.
    """
    f = trace.frequency_hz
    f0 = fit.f0_hz
    half_width = 0.5 * window_linewidths * f0 / fit.q_total
    mask = np.abs(f - f0) <= half_width
    if int(np.count_nonzero(mask)) < _MIN_WINDOW_POINTS:
        raise WindowTooNarrow(
            f"{int(np.count_nonzero(mask))} points inside "
            f"+/-{half_width:.1f} Hz; need {_MIN_WINDOW_POINTS}"
        )
    fw = f[mask]
    bg = fit.background
    bg_vals = bg.amplitude * np.exp(
        1j * (bg.phase_rad - 2.0 * np.pi * fw * bg.delay_s)
    )
    resonator = 1.0 - trace.s21[mask] / bg_vals
    if fit.geometry is Geometry.REFLECTION:
        resonator = resonator / 2.0
    theta = -np.unwrap(np.angle(resonator))
    slope, at_f0 = np.polyfit(fw - f0, theta, 1)
    return PhaseCalibration(
        slope=float(slope),
        intercept=float(at_f0 + bg.phase_rad),
        f0_hz=f0,
        q_total=fit.q_total,
        fit_window_hz=(float(f0 - half_width), float(f0 + half_width)),
    )


def phase_to_frequency_shift(cal: PhaseCalibration, delta_theta: float) -> float:
    """Convert a monitored phase excursion to a frequency shift in Hz.

    Valid only while the excursion stays inside the calibrated window,
    i.e. |delta_theta| at most slope times the window half-width.
    """
    lo, hi = cal.fit_window_hz
    max_theta = cal.slope * 0.5 * (hi - lo)
    if abs(delta_theta) > max_theta:
        raise OutOfLinearRange(
            f"|delta_theta| = {abs(delta_theta):.4e} rad exceeds the "
            f"calibrated linear range {max_theta:.4e} rad"
        )
    return delta_theta / cal.slope


def stability_sigma(series: TimeSeries) -> float:
    """Population standard deviation of a frequency monitoring series."""
    if len(series) < 2:
        raise InsufficientData("need at least 2 points for a deviation")
    return float(np.std(series.values))
