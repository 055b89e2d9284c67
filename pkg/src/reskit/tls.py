"""Photon-number dependence of the internal loss.

Evaluates and fits the saturable two-level-system loss model

    delta_i(n) = delta_tls0 * tanh(h f / (2 k T)) / sqrt(1 + (n / n_c)**beta)
                 + delta_other

against power sweeps of fitted internal loss, screens anomalous points at
the sweep edges before fitting, and reduces fits to the low-power and
high-power quality-factor summaries used for device comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import CONSTANTS, TlsFit
from .errors import (
    DegenerateSweep,
    EmptyCohort,
    InsufficientData,
    InvariantViolation,
    NonConvergence,
    NonMonotoneInput,
)

# Points below this mean photon number are excluded from fitting outright;
# resonance fits there sit at the noise floor of the readout chain.
PHOTON_FLOOR = 1e-3

# Tags recorded against dropped indices so reports can say why.
REASON_FLOOR = "below_photon_floor"
REASON_LOW = "dip_below_next"
REASON_HIGH = "rise_above_previous"

_DIP_RATIO = 0.9
_RISE_RATIO = 1.1
_MIN_FIT_POINTS = 4
_DEGENERATE_RANGE = 0.05


@dataclass(frozen=True)
class PowerSweepPoint:
    """Internal loss at one drive power, expressed as mean photon number."""

    n_bar: float
    delta_i: float
    delta_i_sigma: float = 0.0

    def __post_init__(self):
        if not self.n_bar > 0.0:
            raise InvariantViolation("n_bar must be positive")
        if not self.delta_i > 0.0:
            raise InvariantViolation("delta_i must be positive")
        if self.delta_i_sigma < 0.0:
            raise InvariantViolation("delta_i_sigma must be non-negative")


@dataclass(frozen=True)
class OutlierReport:
    """Partition of a power sweep into kept and dropped indices.

    Dropped entries are (index, reason) pairs; reasons are the module-level
    REASON_* tags.  window_floor records the minimum photon number admitted.
    """

    kept: tuple[int, ...]
    dropped_low: tuple[tuple[int, str], ...] = ()
    dropped_high: tuple[tuple[int, str], ...] = ()
    window_floor: float = PHOTON_FLOOR

    def __post_init__(self):
        seen = sorted(
            list(self.kept)
            + [i for i, _ in self.dropped_low]
            + [i for i, _ in self.dropped_high]
        )
        if seen != list(range(len(seen))):
            raise InvariantViolation(
                "kept and dropped indices must partition the input range"
            )


def filter_outliers(sweep) -> OutlierReport:
    """Screen a sorted power sweep for edge anomalies before fitting.

    Three screens run once, in order, all against original neighbor values:
    points below PHOTON_FLOOR are dropped; then, scanning up from the
    low-power end, leading points sitting more than 10% below their next
    neighbor are dropped until one does not; then, scanning down from the
    high-power end, trailing points more than 10% above their previous
    neighbor are dropped until one does not.  Only contiguous runs at the
    sweep edges can be removed, so reapplying the screen to its own kept
    set never drops anything.
    """
    pts = list(sweep)
    n_total = len(pts)
    nbar = np.array([p.n_bar for p in pts], dtype=float)
    if np.any(np.diff(nbar) < 0.0):
        raise NonMonotoneInput("power sweep must be sorted by increasing n_bar")
    delta = np.array([p.delta_i for p in pts], dtype=float)

    dropped_low = []
    dropped_high = []
    first = 0
    while first < n_total and nbar[first] < PHOTON_FLOOR:
        dropped_low.append((first, REASON_FLOOR))
        first += 1

    k = first
    while k + 1 < n_total and delta[k] < _DIP_RATIO * delta[k + 1]:
        dropped_low.append((k, REASON_LOW))
        k += 1
    low_end = k  # first surviving index

    k = n_total - 1
    while k - 1 >= low_end and delta[k] > _RISE_RATIO * delta[k - 1]:
        dropped_high.append((k, REASON_HIGH))
        k -= 1

    kept = tuple(range(low_end, k + 1))
    if len(kept) < _MIN_FIT_POINTS:
        raise InsufficientData(
            f"only {len(kept)} points survive outlier screening; "
            f"need at least {_MIN_FIT_POINTS}"
        )
    return OutlierReport(
        kept=kept,
        dropped_low=tuple(dropped_low),
        dropped_high=tuple(dropped_high),
        window_floor=PHOTON_FLOOR,
    )


def eval_tls_loss(fit: TlsFit, n_bar, temperature_k: float):
    """Evaluate the loss model at mean photon number n_bar and temperature.

    Accepts a scalar or array n_bar and returns the same shape.
    """
    n = np.asarray(n_bar, dtype=float)
    if np.any(n < 0.0):
        raise InvariantViolation("n_bar must be non-negative")
    if not temperature_k > 0.0:
        raise InvariantViolation("temperature_k must be positive")
    occ = math.tanh(
        CONSTANTS.h * fit.frequency_hz / (2.0 * CONSTANTS.k_b * temperature_k)
    )
    sat = np.sqrt(1.0 + (n / fit.n_c) ** fit.beta)
    out = fit.delta_tls0 * occ / sat + fit.delta_other
    if np.isscalar(n_bar):
        return float(out)
    return out


def fit_power_sweep(sweep, frequency_hz: float, temperature_k: float) -> TlsFit:
    """Least-squares fit of the loss model to an outlier-screened sweep.

    Residuals are formed on log(delta_i) so decades of loss weigh equally;
    when every point carries a positive uncertainty the residuals are
    additionally inverse-sigma weighted.  beta is squashed onto (0, 1]
    through a logistic transform and the other three parameters are fit in
    log space, so positivity holds by construction.
    """
    pts = list(sweep)
    if len(pts) < _MIN_FIT_POINTS:
        raise InsufficientData(
            f"need at least {_MIN_FIT_POINTS} points, got {len(pts)}"
        )
    nbar = np.array([p.n_bar for p in pts], dtype=float)
    delta = np.array([p.delta_i for p in pts], dtype=float)
    sigma = np.array([p.delta_i_sigma for p in pts], dtype=float)

    dyn = float(np.max(delta) / np.min(delta)) - 1.0
    if dyn < _DEGENERATE_RANGE:
        raise DegenerateSweep(
            f"loss dynamic range {dyn:.3%} is below {_DEGENERATE_RANGE:.0%}; "
            "saturable and constant terms are not separable"
        )

    occ = math.tanh(
        CONSTANTS.h * frequency_hz / (2.0 * CONSTANTS.k_b * temperature_k)
    )
    weights = np.ones_like(delta)
    if np.all(sigma > 0.0):
        weights = delta / sigma  # 1 / sigma of log(delta)

    log_delta = np.log(delta)
    log_n = np.log(nbar)

    # Parameters: [ln delta_tls0, ln n_c, beta logit, ln delta_other].
    def unpack(u):
        beta = 1.0 / (1.0 + math.exp(-u[2]))
        return math.exp(u[0]), math.exp(u[1]), beta, math.exp(u[3])

    def residuals(u):
        d0, nc, beta, dother = unpack(u)
        model = d0 * occ / np.sqrt(1.0 + np.exp(beta * (log_n - math.log(nc)))) \
            + dother
        return (np.log(model) - log_delta) * weights

    dother0 = 0.8 * float(np.min(delta))
    dtls0 = max(float(np.max(delta)) - dother0, 0.05 * float(np.max(delta))) / occ
    nc0 = math.exp(float(np.mean(log_n)))
    u0 = np.array([math.log(dtls0), math.log(nc0), 0.0, math.log(dother0)])
    lower = [math.log(1e-12), math.log(1e-6), -40.0, math.log(1e-12)]
    upper = [0.0, math.log(1e12), 40.0, 0.0]
    res = least_squares(
        residuals, np.clip(u0, lower, upper), bounds=(lower, upper),
        x_scale="jac", xtol=1e-12, ftol=1e-12, gtol=None, max_nfev=2000,
    )
    if res.status <= 0:
        raise NonConvergence(f"power-sweep fit did not converge: {res.message}")
    d0, nc, beta, dother = unpack(res.x)

    dof = max(res.fun.size - res.x.size, 1)
    s_sq = 2.0 * res.cost / dof
    cov = np.linalg.pinv(res.jac.T @ res.jac) * s_sq
    sig_u = np.sqrt(np.maximum(np.diag(cov), 0.0))
    uncertainties = {
        "delta_tls0": d0 * sig_u[0],
        "n_c": nc * sig_u[1],
        "beta": beta * (1.0 - beta) * sig_u[2],
        "delta_other": dother * sig_u[3],
    }
    return TlsFit(
        delta_tls0=d0,
        n_c=nc,
        beta=beta,
        delta_other=dother,
        frequency_hz=frequency_hz,
        temperature_k=temperature_k,
        uncertainties=uncertainties,
    )


def summary_qi(fit: TlsFit) -> tuple[float, float]:
    """Low-power and high-power internal quality factors of a fit.

    The low-power value inverts the full model at one photon and 100 mK;
    the high-power value inverts the saturated (power-independent) loss.
    """
    qi_low = 1.0 / eval_tls_loss(fit, 1.0, 0.1)
    qi_high = 1.0 / fit.delta_other
    return qi_low, qi_high


def cohort_medians(labeled_fits) -> dict[str, tuple[float, float]]:
    """Median (qi_low, qi_high) per cohort label.

    Takes (fit, label) pairs and returns {label: (median qi_low, median
    qi_high)} for every label present.  Medians of even-length cohorts are
    the mean of the two central values.
    """
    groups: dict[str, list[tuple[float, float]]] = {}
    for fit, label in labeled_fits:
        groups.setdefault(str(label), []).append(summary_qi(fit))
    if not groups:
        raise EmptyCohort("no fits supplied")
    out = {}
    for label in sorted(groups):
        lows = [q for q, _ in groups[label]]
        highs = [q for _, q in groups[label]]
        out[label] = (float(np.median(lows)), float(np.median(highs)))
    return out
