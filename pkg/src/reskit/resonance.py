"""Complex transmission model and resonance fitting.

The trace model is the standard diameter-corrected form

    S(f) = a e^{i alpha} e^{-2 pi i f tau}
           [1 - factor * (Q/|Qc|) e^{i phi} / (1 + 2 i Q (f/f0 - 1))]

with factor 1 for a notch (hanger) measurement and 2 for direct reflection.
Internal loss follows from 1/Qi = 1/Q - cos(phi)/|Qc|.

Fitting runs damped least squares on the stacked real and imaginary
residuals, after an optional cable-delay estimate from the outer wings of
the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import CONSTANTS, Background, ComplexTrace, Geometry, ResonanceFit
from .errors import (
    InsufficientData,
    InvariantViolation,
    NoDipFound,
    NonConvergence,
)

__all__ = [
    "FitConfig",
    "estimate_delay",
    "fit_resonance",
    "model_s21",
    "photon_number",
]

_MIN_POINTS = 10
# Fraction of the trace (each end) treated as off-resonance wings for the
# delay estimate and the noise-floor measurement.
_WING_FRACTION = 0.10


@dataclass(frozen=True)
class FitConfig:
    """Options for ``fit_resonance``."""

    geometry: Geometry = Geometry.NOTCH
    estimate_delay: bool = True
    max_iterations: int = 1000
    convergence_tol: float = 1e-12

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvariantViolation("max_iterations must be positive")
        if not 0.0 < self.convergence_tol < 1.0:
            raise InvariantViolation("convergence_tol must lie in (0, 1)")


def _geometry_factor(geometry: Geometry) -> float:
    return 2.0 if geometry is Geometry.REFLECTION else 1.0


def model_s21(fit: ResonanceFit, frequency_hz) -> np.ndarray:
    """Evaluate the trace model of a fitted resonance on a frequency grid."""
    f = np.asarray(frequency_hz, dtype=float)
    x = f / fit.f0_hz - 1.0
    lorentz = (fit.q_total / fit.q_coupling_mag) * np.exp(1j * fit.phi_rad) \
        / (1.0 + 2j * fit.q_total * x)
    bracket = 1.0 - _geometry_factor(fit.geometry) * lorentz
    bg = fit.background.amplitude * np.exp(
        1j * (fit.background.phase_rad - 2.0 * np.pi * f * fit.background.delay_s)
    )
    out = bg * bracket
    if np.isscalar(frequency_hz):
        return complex(out)
    return out


def estimate_delay(trace: ComplexTrace) -> float:
    """Cable delay from linear fits to the unwrapped phase of the outer
    wings (first and last tenth) of the trace, averaging the two wing
    slopes.

    Each wing is fit separately: a strongly over-coupled reflection
    resonance winds the phase by a full turn between the wings, which
    would corrupt a single fit spanning the gap.
    """
    n = len(trace)
    k = max(2, int(round(_WING_FRACTION * n)))
    slopes = []
    for part in (slice(0, k), slice(n - k, n)):
        phase = np.unwrap(np.angle(trace.s21[part]))
        slopes.append(np.polyfit(trace.frequency_hz[part], phase, 1)[0])
    return float(-0.5 * (slopes[0] + slopes[1]) / (2.0 * np.pi))


def _wing_indices(n: int) -> np.ndarray:
    k = max(2, int(round(_WING_FRACTION * n)))
    return np.r_[0:k, n - k:n]


def fit_resonance(trace: ComplexTrace, config: FitConfig = FitConfig()) -> ResonanceFit:
    """Fit the resonance model to one trace.

    Raises NoDipFound when no dip stands clear of the off-resonance noise
    floor, NonConvergence when the optimizer gives up, InsufficientData for
    traces shorter than the model can support.
    """
    n = len(trace)
    if n < _MIN_POINTS:
        raise InsufficientData(f"trace has {n} points, need {_MIN_POINTS}")
    f = trace.frequency_hz
    factor = _geometry_factor(config.geometry)

    tau0 = estimate_delay(trace) if config.estimate_delay else 0.0
    s_flat = trace.s21 * np.exp(2j * np.pi * f * tau0)

    mag = np.abs(s_flat)
    wings = _wing_indices(n)
    baseline = float(np.median(mag[wings]))
    noise_floor = float(np.std(mag[wings]))
    i_min = int(np.argmin(mag))
    depth = baseline - mag[i_min]
    if depth <= 3.0 * noise_floor or depth <= 1e-6 * baseline:
        raise NoDipFound(
            f"dip depth {depth:.3e} does not clear the noise floor "
            f"{noise_floor:.3e} (baseline {baseline:.3e})"
        )
    f0_0 = float(f[i_min])

    # Loaded-Q guess from the width at half the dip depth.
    level = baseline - 0.5 * depth
    above = mag >= level
    lo = i_min
    while lo > 0 and not above[lo]:
        lo -= 1
    hi = i_min
    while hi < n - 1 and not above[hi]:
        hi += 1
    width = float(f[hi] - f[lo])
    if width <= 0.0:
        width = trace.span_hz / 10.0
    q0 = max(f0_0 / width, 2.0)

    f_c = float(f[n // 2])
    target = trace.s21
    detrended = target * np.exp(2j * np.pi * (f - f_c) * tau0)
    edge = detrended[wings]
    alpha_c0 = float(np.angle(np.mean(edge / np.abs(edge))))
    # Dip direction in the complex plane fixes the mismatch angle and the
    # coupling depth together; a magnitude-only depth would saturate once
    # the resonance circle encircles the origin.
    dip = 1.0 - detrended[i_min] / (baseline * np.exp(1j * alpha_c0))
    d0 = min(max(abs(dip) / factor, 1e-3), 1e3)
    phi0 = float(np.angle(dip))
    qc0 = q0 / d0

    # The delay is parameterized around the trace center so it stays nearly
    # orthogonal to the global phase: bg = amp e^{i(alpha_c - 2 pi (f-f_c) tau)}.
    # Parameters: f0, ln Q, ln |Qc|, phi, ln amp, alpha_c, tau.
    fit_tau = bool(config.estimate_delay)

    def split(p):
        f0, lnq, lnqc, phi, lnamp, alpha_c = p[:6]
        tau = p[6] if fit_tau else tau0
        return f0, math.exp(lnq), math.exp(lnqc), phi, math.exp(lnamp), alpha_c, tau

    def model_parts(p):
        f0, q, qc, phi, amp, alpha_c, tau = split(p)
        x = f / f0 - 1.0
        den = 1.0 + 2j * q * x
        lor = (q / qc) * np.exp(1j * phi) / den
        bg = amp * np.exp(1j * (alpha_c - 2.0 * np.pi * (f - f_c) * tau))
        return bg, lor, den, (f0, q, qc, phi, amp, alpha_c, tau)

    def residuals(p):
        bg, lor, _, _ = model_parts(p)
        r = bg * (1.0 - factor * lor) - target
        return np.concatenate([r.real, r.imag])

    def jacobian(p):
        bg, lor, den, (f0, q, _qc, _phi, _amp, _ac, _tau) = model_parts(p)
        m = bg * (1.0 - factor * lor)
        al = bg * factor * lor
        cols = [
            -al * 2j * q * f / (den * f0 * f0),  # d/d f0
            -al / den,                           # d/d lnQ
            al,                                  # d/d ln|Qc|
            -1j * al,                            # d/d phi
            m,                                   # d/d ln amp
            1j * m,                              # d/d alpha_c
        ]
        if fit_tau:
            cols.append(-2j * np.pi * (f - f_c) * m)
        jc = np.column_stack(cols)
        return np.vstack([jc.real, jc.imag])

    p0 = [f0_0, math.log(q0), math.log(qc0), phi0, math.log(baseline), alpha_c0]
    lower = [f[0], 0.0, 0.0, -np.pi, math.log(1e-12), -2 * np.pi]
    upper = [f[-1], math.log(1e10), math.log(1e10), np.pi, math.log(1e12), 2 * np.pi]
    if fit_tau:
        p0.append(tau0)
        lower.append(tau0 - 1e-5)
        upper.append(tau0 + 1e-5)
    p0 = np.clip(np.asarray(p0, dtype=float), lower, upper)
    res = least_squares(
        residuals, p0, jac=jacobian, bounds=(lower, upper), x_scale="jac",
        xtol=config.convergence_tol, ftol=config.convergence_tol, gtol=None,
        max_nfev=config.max_iterations,
    )
    if res.status <= 0:
        raise NonConvergence(f"resonance fit did not converge: {res.message}")
    f0, q, qc, phi, amp, alpha_c, tau = split(res.x)

    inv_qi = 1.0 / q - math.cos(phi) / qc
    if inv_qi <= 0.0:
        raise NonConvergence(
            "fit implies non-positive internal loss; trace is not consistent "
            "with the resonance model"
        )

    npar = res.x.size
    dof = max(res.fun.size - npar, 1)
    s_sq = 2.0 * res.cost / dof
    cov = np.linalg.pinv(res.jac.T @ res.jac) * s_sq
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    # Internal loss by linear propagation through 1/Qi = 1/Q - cos(phi)/|Qc|.
    grad = np.zeros(npar)
    grad[1] = -(1.0 / q)            # d(inv_qi)/d(lnQ)
    grad[2] = math.cos(phi) / qc    # d(inv_qi)/d(ln|Qc|)
    grad[3] = math.sin(phi) / qc    # d(inv_qi)/d(phi)
    var_inv_qi = float(grad @ cov @ grad)
    sig_qi = math.sqrt(max(var_inv_qi, 0.0)) / inv_qi**2

    # Global phase at f = 0 for the reported e^{i(alpha - 2 pi f tau)} form.
    alpha = math.remainder(alpha_c + 2.0 * np.pi * f_c * tau, 2.0 * np.pi)
    grad_a = np.zeros(npar)
    grad_a[5] = 1.0
    if fit_tau:
        grad_a[6] = 2.0 * np.pi * f_c
    sig_alpha = math.sqrt(max(float(grad_a @ cov @ grad_a), 0.0))

    uncertainties = {
        "f0_hz": float(sig[0]),
        "q_total": float(q * sig[1]),
        "q_internal": float(sig_qi),
        "q_coupling_mag": float(qc * sig[2]),
        "phi_rad": float(sig[3]),
        "amplitude": float(amp * sig[4]),
        "phase_rad": float(sig_alpha),
        "delay_s": float(sig[6]) if fit_tau else 0.0,
    }
    return ResonanceFit(
        f0_hz=f0,
        q_total=q,
        q_internal=1.0 / inv_qi,
        q_coupling_mag=qc,
        phi_rad=phi,
        background=Background(amplitude=amp, phase_rad=alpha, delay_s=tau),
        geometry=config.geometry,
        uncertainties=uncertainties,
    )


def photon_number(fit: ResonanceFit, applied_power_w: float) -> float:
    """Mean intracavity photon number at the given on-chip drive power.

        n = 2 Q^2 P / (hbar omega0^2 |Qc|)
    """
    if applied_power_w < 0.0:
        raise InvariantViolation("applied_power_w must be non-negative")
    omega0 = 2.0 * np.pi * fit.f0_hz
    return float(
        2.0 * fit.q_total**2 * applied_power_w
        / (CONSTANTS.hbar * omega0**2 * fit.q_coupling_mag)
    )
