"""Temperature dependence of a superconducting resonator's complex frequency.

The chain goes: gap interpolation -> thermal complex conductivity (two
quadratures with inverse-square-root endpoint singularities) -> local-limit
surface impedance -> complex frequency shift, plus a digamma-bracket
two-level-system frequency pull. On top of the forward model sit the
temperature-sweep fit and the half-Qi temperature search.

All conductivities are reduced by the normal-state value (s1 = sigma1/sigma_n,
s2 = sigma2/sigma_n); the surface impedance returned here is correspondingly
in units of ohm * sqrt(sigma_n), and the geometric factor ``g_reduced``
absorbs the sqrt(sigma_n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .core import CONSTANTS, MbTempFit
from .errors import (
    GapClosed,
    InsufficientData,
    InvariantViolation,
    NoCrossing,
    NonConvergence,
    PhotonAboveGap,
    TemperatureAboveTc,
)
from .quadrature import tanh_sinh
from .special import complex_digamma

__all__ = [
    "ReducedConductivity",
    "TempSweepPoint",
    "fermi_occupation",
    "fit_temperature_sweep",
    "gap_energy_j",
    "half_qi_temperature",
    "model_complex_frequency",
    "sigma_ratios",
    "surface_impedance",
    "tls_frequency_shift",
]

# Multiple of k_B T beyond the gap edge at which the absorption integral is
# truncated; the integrand decays like exp(-E/kT), so the dropped tail is
# below e^-60 ~ 9e-27 of the integrand scale.
_TAIL_CUTOFF_KT = 60.0

_GAP_SLOPE = 1.74  # coefficient of the sqrt((Tc-T)/T) interpolation


@dataclass(frozen=True)
class ReducedConductivity:
    """Complex conductivity in units of the normal-state conductivity."""

    s1: float
    s2: float


@dataclass(frozen=True)
class TempSweepPoint:
    """One temperature point of a complex-frequency sweep.

    ``im_hz`` is the imaginary part of the complex resonant frequency,
    -f/(2 Qi), and is therefore non-positive for a physical resonator.
    """

    temperature_k: float
    f_hz: float
    im_hz: float

    def __post_init__(self):
        if not self.temperature_k > 0.0:
            raise InvariantViolation("temperature_k must be positive")
        if not self.f_hz > 0.0:
            raise InvariantViolation("f_hz must be positive")


def gap_energy_j(t_k: float, t_c_k: float, delta0_j: float) -> float:
    """Superconducting gap at temperature ``t_k`` via the tanh interpolation

        Delta(T) = Delta0 * tanh(1.74 * sqrt((Tc - T)/T)).

    Exactly zero at T = Tc; raises GapClosed above the transition.
    """
    if not t_c_k > 0.0 or not delta0_j > 0.0:
        raise InvariantViolation("t_c_k and delta0_j must be positive")
    if not t_k > 0.0:
        raise InvariantViolation("t_k must be positive")
    if t_k > t_c_k:
        raise GapClosed(f"temperature {t_k} K above transition {t_c_k} K")
    if t_k == t_c_k:
        return 0.0
    return delta0_j * math.tanh(_GAP_SLOPE * math.sqrt((t_c_k - t_k) / t_k))


def fermi_occupation(energy_j, t_k: float):
    """Fermi-Dirac occupation 1/(1 + exp(E/kT)), overflow-safe for any E/kT.

    Saturates to 0 or 1 where the exponential under/overflows.
    """
    if not t_k > 0.0:
        raise InvariantViolation("t_k must be positive")
    x = np.asarray(energy_j, dtype=float) / (CONSTANTS.k_b * t_k)
    out = np.empty_like(x)
    pos = x >= 0.0
    ex = np.exp(-np.abs(x))
    out[pos] = ex[pos] / (1.0 + ex[pos])
    out[~pos] = 1.0 / (1.0 + ex[~pos])
    if np.isscalar(energy_j):
        return float(out)
    return out


def _sigma_batch(omega_rad_s: float, temps_k: np.ndarray, t_c_k: float,
                 gap_ratio: float, rel_tol: float = 1e-8):
    """Reduced conductivities at one probe frequency over many temperatures.

    Returns (s1, s2) arrays. The integrals run in units of the thermal gap,
    which keeps every intermediate O(1).
    """
    if not omega_rad_s > 0.0:
        raise InvariantViolation("omega_rad_s must be positive")
    temps = np.asarray(temps_k, dtype=float)
    delta0 = 0.5 * gap_ratio * CONSTANTS.k_b * t_c_k
    gaps = np.array([gap_energy_j(float(t), t_c_k, delta0) for t in temps])
    photon = CONSTANTS.hbar * omega_rad_s
    if np.any(photon >= 2.0 * gaps):
        bad = temps[photon >= 2.0 * gaps]
        raise PhotonAboveGap(
            f"hbar*omega = {photon:.3e} J reaches the pair-breaking threshold "
            f"2*Delta(T) at T = {bad.tolist()} K"
        )
    w = photon / gaps                      # photon energy / gap
    tau = CONSTANTS.k_b * temps / gaps     # thermal energy / gap

    # Absorption part: integral from the gap edge upward, singular at the
    # lower endpoint, truncated where the occupation difference underflows.
    inv_tau = 1.0 / tau

    def integrand_s1(e, from_lo, _from_hi):
        occ = _fermi_reduced(e * inv_tau[:, None]) - _fermi_reduced(
            (e + w[:, None]) * inv_tau[:, None]
        )
        num = e * e + 1.0 + w[:, None] * e
        den = np.sqrt(from_lo * (from_lo + 2.0) * (from_lo + w[:, None])
                      * (e + w[:, None] + 1.0))
        return occ * num / den

    upper = 1.0 + _TAIL_CUTOFF_KT * tau
    i1, _ = tanh_sinh(integrand_s1, np.ones_like(tau), upper, rel_tol=rel_tol)

    # Reactive part: finite interval of width w below the gap edge, singular
    # at both endpoints.
    def integrand_s2(e, from_lo, from_hi):
        occ = np.tanh(0.5 * (e + w[:, None]) * inv_tau[:, None])
        num = e * e + 1.0 + w[:, None] * e
        # 1 + e rewritten against the lower endpoint so it stays accurate
        # when the photon energy approaches the pair-breaking threshold
        den = np.sqrt(from_hi * (from_lo + (2.0 - w[:, None])) * from_lo
                      * (e + w[:, None] + 1.0))
        return occ * num / den

    i2, _ = tanh_sinh(integrand_s2, 1.0 - w, np.ones_like(w), rel_tol=rel_tol)
    return 2.0 * i1 / w, i2 / w


def _fermi_reduced(x):
    """Occupation as a function of E/kT directly (arrays)."""
    out = np.empty_like(x)
    pos = x >= 0.0
    ex = np.exp(-np.abs(x))
    out[pos] = ex[pos] / (1.0 + ex[pos])
    out[~pos] = 1.0 / (1.0 + ex[~pos])
    return out


def sigma_ratios(omega_rad_s: float, t_k: float, t_c_k: float,
                 gap_ratio: float, rel_tol: float = 1e-8) -> ReducedConductivity:
    """Thermal complex conductivity (reduced by sigma_n) at one point.

    Valid below the pair-breaking threshold, hbar*omega < 2*Delta(T);
    raises PhotonAboveGap otherwise.
    """
    s1, s2 = _sigma_batch(omega_rad_s, np.array([t_k]), t_c_k, gap_ratio,
                          rel_tol=rel_tol)
    return ReducedConductivity(s1=float(s1[0]), s2=float(s2[0]))


def _surface_impedance_arrays(omega_rad_s: float, s1, s2):
    """Reduced surface resistance and reactance from reduced conductivities.

    The resistive part is rewritten as |s1| * sqrt(.../(|s|+s2)) to avoid the
    catastrophic cancellation in sqrt(s1^2+s2^2) - s2 when s1 << s2 (the
    usual regime deep in the superconducting state).
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    mag = np.hypot(s1, s2)
    if np.any(mag == 0.0):
        from .errors import DegenerateConductivity

        raise DegenerateConductivity("zero conductivity magnitude")
    scale = 0.5 * CONSTANTS.mu_0 * omega_rad_s
    mag2 = mag * mag
    plus = np.empty_like(mag)
    minus = np.empty_like(mag)
    nonneg = s2 >= 0.0
    plus[nonneg] = mag[nonneg] + s2[nonneg]
    minus[nonneg] = s1[nonneg] ** 2 / plus[nonneg]
    neg = ~nonneg
    minus[neg] = mag[neg] - s2[neg]
    plus[neg] = s1[neg] ** 2 / minus[neg]
    rs = np.sqrt(scale * minus / mag2)
    xs = -np.sqrt(scale * plus / mag2)
    return rs, xs


def surface_impedance(omega_rad_s: float, cond: ReducedConductivity) -> complex:
    """Local thick-film surface impedance Rs + i Xs in reduced units
    (ohm * sqrt(sigma_n)). Rs >= 0 and Xs <= 0 by construction."""
    if not omega_rad_s > 0.0:
        raise InvariantViolation("omega_rad_s must be positive")
    rs, xs = _surface_impedance_arrays(omega_rad_s, np.array([cond.s1]),
                                       np.array([cond.s2]))
    return complex(rs[0], xs[0])


def _tls_shift_curve(delta_tls0: float, omega_rad_s: float, temps_k,
                     f_ref_hz: float):
    """Fractional two-level-system frequency pull times f_ref, vectorized."""
    t = np.asarray(temps_k, dtype=float)
    x = CONSTANTS.hbar * omega_rad_s / (2.0 * np.pi * CONSTANTS.k_b * t)
    psi = complex_digamma(0.5 + 1j * np.abs(x))
    bracket = np.real(psi) - np.log(x)
    return f_ref_hz * (delta_tls0 / np.pi) * bracket


def tls_frequency_shift(delta_tls0: float, omega_rad_s: float, t_k: float,
                        f_ref_hz: float) -> float:
    """Two-level-system frequency shift at temperature ``t_k`` in Hz.

    The digamma bracket Re psi(1/2 + i hbar omega/(2 pi k T)) - ln(...) is a
    fractional shift and is scaled by the fixed reference frequency
    ``f_ref_hz``. Zero TLS loss gives exactly zero shift at any temperature.
    """
    if delta_tls0 < 0.0:
        raise InvariantViolation("delta_tls0 must be non-negative")
    if not (omega_rad_s > 0.0 and t_k > 0.0 and f_ref_hz > 0.0):
        raise InvariantViolation("omega_rad_s, t_k, f_ref_hz must be positive")
    if delta_tls0 == 0.0:
        return 0.0
    return float(_tls_shift_curve(delta_tls0, omega_rad_s, np.array([t_k]),
                                  f_ref_hz)[0])


def _model_curve(omega_rad_s: float, temps_k: np.ndarray, f_r: complex,
                 g_reduced: float, delta_tls0: float, t_c_k: float,
                 gap_ratio: float, rel_tol: float = 1e-8) -> np.ndarray:
    """Complex resonant frequency over a temperature array (internal)."""
    s1, s2 = _sigma_batch(omega_rad_s, temps_k, t_c_k, gap_ratio,
                          rel_tol=rel_tol)
    rs, xs = _surface_impedance_arrays(omega_rad_s, s1, s2)
    zs = rs + 1j * xs
    f_ref = omega_rad_s / (2.0 * np.pi)
    shift = _tls_shift_curve(delta_tls0, omega_rad_s, temps_k, f_ref) \
        if delta_tls0 > 0.0 else 0.0
    return f_r - 1j * g_reduced * zs + shift


def model_complex_frequency(fit: MbTempFit, t_k: float) -> complex:
    """Evaluate the fitted complex-frequency model at one temperature.

    Real part: resonant frequency in Hz; imaginary part: -f/(2 Qi). The
    two-level-system pull is referenced to the frequency frozen into
    ``fit.omega_rad_s``.
    """
    out = _model_curve(fit.omega_rad_s, np.array([float(t_k)]), fit.f_r_hz,
                       fit.g_reduced, fit.delta_tls0, fit.t_c_k, fit.gap_ratio)
    return complex(out[0])


_TC_INITIAL_K = 1.2      # starting transition-temperature estimate
_TC_MARGIN = 1.02        # optimizer keeps Tc this factor above the data
_MIN_POINTS = 8


def fit_temperature_sweep(
    points: Sequence[TempSweepPoint],
    rel_tol: float = 1e-8,
    max_nfev: int = 400,
) -> MbTempFit:
    """Fit the complex-frequency temperature model to a sweep.

    The probe frequency is frozen to 2*pi times the lowest-temperature
    measured frequency (it is also the reference for the TLS pull). Points
    at or above the running transition-temperature estimate are excluded
    with a TemperatureAboveTc warning and the fit is retried.

    Free parameters: complex base frequency, reduced conductance factor,
    TLS loss amplitude, transition temperature, gap ratio.
    """
    pts = sorted(points, key=lambda p: p.temperature_k)
    if len(pts) < _MIN_POINTS:
        raise InsufficientData(
            f"need at least {_MIN_POINTS} points, got {len(pts)}"
        )

    tc_estimate = _TC_INITIAL_K
    for _ in range(6):
        t = np.array([p.temperature_k for p in pts])
        if t[-1] < tc_estimate:
            break
        drop = pts.pop()
        warnings.warn(
            f"point at {drop.temperature_k} K is above the running Tc "
            f"estimate {tc_estimate} K and was excluded",
            TemperatureAboveTc,
        )
        if len(pts) < _MIN_POINTS:
            raise InsufficientData(
                "too few points remain below the transition estimate"
            )

    t = np.array([p.temperature_k for p in pts])
    f = np.array([p.f_hz for p in pts])
    im = np.array([p.im_hz for p in pts])
    omega = 2.0 * np.pi * f[0]
    anchor = complex(f[0], im[0])

    tc_lo = _TC_MARGIN * t[-1]
    if tc_lo >= 3.0:
        raise InsufficientData("sweep extends beyond the supported Tc range")

    # Initial conductance from the span of the loss channel, evaluated with
    # the starting (Tc, gap ratio).
    tc0 = max(tc_estimate, tc_lo * 1.01)
    gr0 = 3.5
    s1, s2 = _sigma_batch(omega, np.array([t[0], t[-1]]), tc0, gr0, rel_tol)
    rs, xs = _surface_impedance_arrays(omega, s1, s2)
    rs_span = rs[1] - rs[0]
    im_span = im[0] - im[-1]
    g0 = max(im_span / rs_span, 0.0) if rs_span > 0.0 else 0.0

    def unpack(p):
        dr, di, g, dtls, tc, ratio = p
        return anchor + complex(dr, di), g, dtls, tc, ratio

    def residuals(p):
        f_r, g, dtls, tc, ratio = unpack(p)
        try:
            curve = _model_curve(omega, t, f_r, g, dtls, tc, ratio, rel_tol)
        except PhotonAboveGap:
            # outside the physical region: push the optimizer back
            return np.full(2 * t.size, 1e6)
        return np.concatenate([curve.real - f, curve.imag - im])

    # Re-anchor the base frequency so the model passes through the first
    # point at the starting parameters; without this the fit begins with a
    # large systematic offset that dwarfs the thermal signal.
    start = _model_curve(omega, t[:1], anchor, g0, 1e-6, tc0, gr0, rel_tol)[0]
    dr0 = float(f[0] - start.real)
    di0 = float(im[0] - start.imag)

    p0 = np.array([dr0, di0, g0, 1e-6, tc0, gr0])
    lower = [-np.inf, -np.inf, 0.0, 0.0, tc_lo, 1.5]
    upper = [np.inf, np.inf, np.inf, 0.1, 3.0, 6.0]
    p0 = np.clip(p0, lower, upper)
    res = least_squares(
        residuals, p0, bounds=(lower, upper), x_scale="jac",
        xtol=1e-12, ftol=1e-12, gtol=None, max_nfev=max_nfev,
    )
    if res.status <= 0:
        raise NonConvergence(f"temperature-sweep fit did not converge: {res.message}")

    f_r, g, dtls, tc, ratio = unpack(res.x)
    dof = max(res.fun.size - res.x.size, 1)
    s_sq = 2.0 * res.cost / dof
    jtj = res.jac.T @ res.jac
    cov = np.linalg.pinv(jtj) * s_sq
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    uncertainties = {
        "re_f_r_hz": float(sig[0]),
        "im_f_r_hz": float(sig[1]),
        "g_reduced": float(sig[2]),
        "delta_tls0": float(sig[3]),
        "t_c_k": float(sig[4]),
        "gap_ratio": float(sig[5]),
    }

    # Identifiability of the transition temperature: if the conductance term
    # moves the complex frequency by less than the data resolve, Tc and the
    # gap ratio are unconstrained.
    s1, s2 = _sigma_batch(omega, np.array([t[0], t[-1]]), tc, ratio, rel_tol)
    rs, xs = _surface_impedance_arrays(omega, s1, s2)
    mb_span = abs(g) * math.hypot(rs[1] - rs[0], xs[1] - xs[0])
    data_span = math.hypot(float(f.max() - f.min()), float(im.max() - im.min()))
    identifiable = bool(
        mb_span > max(1.0, 1e-3 * data_span)
        and uncertainties["t_c_k"] < 0.3 * tc
    )

    return MbTempFit(
        f_r_hz=f_r,
        g_reduced=float(g),
        delta_tls0=float(dtls),
        t_c_k=float(tc),
        gap_ratio=float(ratio),
        omega_rad_s=float(omega),
        uncertainties=uncertainties,
        residual_norm=float(np.linalg.norm(res.fun)),
        tc_identifiable=identifiable,
    )


def _photon_limit_temperature(fit: MbTempFit, margin: float = 1.02) -> float:
    """Largest temperature at which the model stays below pair breaking."""
    delta0 = 0.5 * fit.gap_ratio * CONSTANTS.k_b * fit.t_c_k
    target = margin * 0.5 * CONSTANTS.hbar * fit.omega_rad_s
    if gap_energy_j(0.99 * fit.t_c_k, fit.t_c_k, delta0) > target:
        return 0.99 * fit.t_c_k
    lo, hi = 0.01 * fit.t_c_k, 0.99 * fit.t_c_k
    if gap_energy_j(lo, fit.t_c_k, delta0) <= target:
        raise PhotonAboveGap("probe photon energy above the gap everywhere")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gap_energy_j(mid, fit.t_c_k, delta0) > target:
            lo = mid
        else:
            hi = mid
    return lo


def half_qi_temperature(fit: MbTempFit, t_min_k: float = 0.1,
                        tol_k: float = 1e-4) -> float:
    """Temperature at which the model's internal Q falls to half its maximum.

    Qi(T) = -Re(f)/(2 Im(f)) is anchored at ``t_min_k`` (its maximum for a
    loss that grows with temperature) and bisected against half that value
    up to 0.99 Tc (or the pair-breaking limit if that comes first). Raises
    NoCrossing if Qi never falls that far.
    """
    if not 0.0 < t_min_k < fit.t_c_k:
        raise InvariantViolation("t_min_k must lie inside (0, Tc)")

    def qi(t):
        z = model_complex_frequency(fit, t)
        if z.imag >= 0.0:
            raise InvariantViolation("model gives non-positive loss")
        return -z.real / (2.0 * z.imag)

    t_hi = _photon_limit_temperature(fit)
    if t_hi <= t_min_k:
        raise NoCrossing("no valid temperature range above t_min_k")
    qi_max = qi(t_min_k)
    target = 0.5 * qi_max
    if qi(t_hi) > target:
        raise NoCrossing(
            f"internal Q stays above half its maximum up to {t_hi:.4f} K"
        )
    lo, hi = t_min_k, t_hi
    while hi - lo > tol_k:
        mid = 0.5 * (lo + hi)
        if qi(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
