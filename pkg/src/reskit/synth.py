"""Seeded forward-model generators for synthetic measurements.

Produces scattering traces, loss power sweeps, complex-frequency
temperature sweeps, and thermal-response monitoring series from
ground-truth parameter sets.  Every generator is a pure function of
(truth, grid): a fixed per-operation random stream is derived from the
truth's seed, so identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Background,
    ComplexTrace,
    MbTempFit,
    ResonanceFit,
    TimeSeries,
    TlsFit,
)
from .errors import InvariantViolation, NonMonotoneInput
from .mattis_bardeen import TempSweepPoint, _model_curve
from .resonance import model_s21
from .tls import PowerSweepPoint, eval_tls_loss

# Identifier of the pseudo-random stream recorded in output metadata.
RNG_ALGORITHM = "numpy-pcg64"

# Per-operation stream ids keep the generators order-independent.
_STREAM_TRACE = 0
_STREAM_POWER = 1
_STREAM_TEMP = 2
_STREAM_THERMAL = 3


@dataclass(frozen=True)
class NoiseSpec:
    """Per-channel noise amplitudes for the generators.

    trace_rel: additive complex Gaussian per quadrature, as a fraction of
    the background amplitude.  loss_rel: log-normal sigma on the loss.
    temp_sweep_hz: additive Gaussian on both complex-frequency channels.
    thermal_hz: additive Gaussian on monitored frequency samples.
    """

    trace_rel: float = 0.0
    loss_rel: float = 0.0
    temp_sweep_hz: float = 0.0
    thermal_hz: float = 0.0

    def __post_init__(self):
        for name in ("trace_rel", "loss_rel", "temp_sweep_hz", "thermal_hz"):
            if getattr(self, name) < 0.0:
                raise InvariantViolation(f"{name} must be non-negative")


@dataclass(frozen=True)
class DeviceTruth:
    """Ground-truth parameter set for one synthetic device."""

    resonance: ResonanceFit
    tls: TlsFit
    mb: MbTempFit
    thermal_tau_s: float = 10.0
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0

    def __post_init__(self):
        if not self.thermal_tau_s > 0.0:
            raise InvariantViolation("thermal_tau_s must be positive")


def _stream(truth: DeviceTruth, op_id: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(truth.seed), spawn_key=(op_id,))
    return np.random.Generator(np.random.PCG64(seq))


def canonical_device_truth(seed: int = 0, noise: NoiseSpec | None = None,
                           thermal_tau_s: float = 10.0) -> DeviceTruth:
    """Reference device used by the command-line generator and the tests.

    A 6 GHz notch resonator with internal quality factor 2e5, a saturable
    loss reaching 1.2e-5 at zero drive, and a thermal model with 1.14 K
    transition temperature and gap ratio 3.31 whose internal quality
    factor halves near 460 mK.
    """
    resonance = ResonanceFit.from_internal(
        f0_hz=6.0e9,
        q_internal=2.0e5,
        q_coupling_mag=1.0e5,
        phi_rad=0.2,
        background=Background(amplitude=0.8, phase_rad=0.4, delay_s=4.0e-8),
    )
    tls = TlsFit(
        delta_tls0=8.0e-6, n_c=10.0, beta=0.5, delta_other=4.0e-6,
        frequency_hz=6.0e9, temperature_k=0.1,
    )
    mb = MbTempFit(
        f_r_hz=complex(6.0e9, -15000.0),
        g_reduced=5.5e4,
        delta_tls0=2.0e-6,
        t_c_k=1.14,
        gap_ratio=3.31,
        omega_rad_s=2.0 * np.pi * 6.0e9,
    )
    return DeviceTruth(
        resonance=resonance, tls=tls, mb=mb,
        thermal_tau_s=thermal_tau_s,
        noise=noise if noise is not None else NoiseSpec(),
        seed=seed,
    )


# Region bounds matched to the canonical bath profile: onset of the
# frequency drop, its minimum, the onset of the later rise, its maximum.
CANONICAL_REGION_BOUNDS = ((0, 220), (220, 320), (320, 670), (670, 770))


def canonical_bath_profile() -> TimeSeries:
    """Bath temperature sweep driving the thermal-response comparison.

    Each onset region is preceded by a bath drift in the opposite
    direction, so a tracking device reverses trend a delay after the
    bath does; that reversal delay grows with the device time constant,
    which makes the detected onset points separate deterministically
    for devices with different time constants, with no noise required.
    Segments: cooling drift 430 to 380 mK, ramp up to 430 mK (region I
    onset of the frequency drop), ramp back down (region II minimum),
    slow warming drift to 442.5 mK, drop to 392.5 mK (region III onset
    of the rise), and recovery (region IV maximum); 770 samples at 1 s.
    """
    parts = [
        np.linspace(0.43, 0.38, 121)[:-1],
        np.linspace(0.38, 0.43, 101)[1:],
        np.linspace(0.43, 0.38, 101)[1:],
        np.linspace(0.38, 0.4425, 251)[1:],
        np.linspace(0.4425, 0.3925, 101)[1:],
        np.linspace(0.3925, 0.4425, 101)[1:],
    ]
    return TimeSeries.from_values(np.concatenate(parts), dt_s=1.0)


def gen_trace(truth: DeviceTruth, f_grid) -> ComplexTrace:
    """Scattering trace of the truth resonance on a frequency grid."""
    f = np.asarray(f_grid, dtype=float)
    if np.any(np.diff(f) <= 0.0):
        raise NonMonotoneInput("f_grid must be strictly increasing")
    s = model_s21(truth.resonance, f)
    sigma = truth.noise.trace_rel * truth.resonance.background.amplitude
    if sigma > 0.0:
        rng = _stream(truth, _STREAM_TRACE)
        s = s + sigma * (
            rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size)
        )
    return ComplexTrace(frequency_hz=f, s21=s, resonator_id="synthetic")


def gen_power_sweep(truth: DeviceTruth, n_bars) -> list[PowerSweepPoint]:
    """Internal-loss sweep from the truth loss model."""
    n = np.asarray(n_bars, dtype=float)
    if np.any(n <= 0.0):
        raise InvariantViolation("n_bars must be positive")
    if np.any(np.diff(n) <= 0.0):
        raise NonMonotoneInput("n_bars must be strictly increasing")
    delta = eval_tls_loss(truth.tls, n, truth.tls.temperature_k)
    sigma_rel = truth.noise.loss_rel
    if sigma_rel > 0.0:
        rng = _stream(truth, _STREAM_POWER)
        delta = delta * np.exp(sigma_rel * rng.standard_normal(n.size))
    return [
        PowerSweepPoint(
            n_bar=float(nb),
            delta_i=float(d),
            delta_i_sigma=float(sigma_rel * d),
        )
        for nb, d in zip(n, delta)
    ]


def gen_temp_sweep(truth: DeviceTruth, temps) -> list[TempSweepPoint]:
    """Complex-frequency temperature sweep from the truth thermal model."""
    t = np.asarray(temps, dtype=float)
    if np.any(np.diff(t) <= 0.0):
        raise NonMonotoneInput("temps must be strictly increasing")
    mb = truth.mb
    fc = _model_curve(
        mb.omega_rad_s, t, mb.f_r_hz, mb.g_reduced, mb.delta_tls0,
        mb.t_c_k, mb.gap_ratio,
    )
    re = fc.real.copy()
    im = fc.imag.copy()
    sigma = truth.noise.temp_sweep_hz
    if sigma > 0.0:
        rng = _stream(truth, _STREAM_TEMP)
        re = re + sigma * rng.standard_normal(t.size)
        im = im + sigma * rng.standard_normal(t.size)
    return [
        TempSweepPoint(temperature_k=float(tt), f_hz=float(rr), im_hz=float(ii))
        for tt, rr, ii in zip(t, re, im)
    ]


def gen_thermal_response(truth: DeviceTruth, bath_profile: TimeSeries) -> TimeSeries:
    """Monitored frequency of a device relaxing toward a bath profile.

    The device temperature follows first-order relaxation toward the bath
    with time constant thermal_tau_s, stepped exactly per sample interval;
    the monitored frequency is the thermal model's resonant frequency at
    the device temperature.  The bath should stay inside the calibrated
    0.3 to 0.5 K monitoring range.
    """
    bath = bath_profile.values
    t_s = bath_profile.time_s
    tau = truth.thermal_tau_s
    dev = np.empty_like(bath)
    dev[0] = bath[0]
    for k in range(1, bath.size):
        decay = np.exp(-(t_s[k] - t_s[k - 1]) / tau)
        dev[k] = bath[k] + (dev[k - 1] - bath[k]) * decay
    mb = truth.mb
    freq = _model_curve(
        mb.omega_rad_s, dev, mb.f_r_hz, mb.g_reduced, mb.delta_tls0,
        mb.t_c_k, mb.gap_ratio,
    ).real.copy()
    sigma = truth.noise.thermal_hz
    if sigma > 0.0:
        rng = _stream(truth, _STREAM_THERMAL)
        freq = freq + sigma * rng.standard_normal(freq.size)
    return TimeSeries(
        index=bath_profile.index, time_s=bath_profile.time_s, values=freq
    )
