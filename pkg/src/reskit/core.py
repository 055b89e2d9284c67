"""Shared domain types and physical constants.

Conventions used throughout the toolkit:

- frequencies are stored in Hz and named ``*_hz``; angular frequencies are
  formed as ``2*pi*f`` at the point of use and named ``omega_rad_s``
- internal losses are dimensionless (``delta = 1/Q_internal``)
- all record types are frozen dataclasses; array fields are defensively
  copied and marked read-only at construction
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation

__all__ = [
    "CONSTANTS",
    "Background",
    "ComplexTrace",
    "Geometry",
    "MbTempFit",
    "PhysicalConstants",
    "ResonanceFit",
    "TimeSeries",
    "TlsFit",
    "complex_resonant_frequency",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values for the constants the models need (SI units)."""

    h: float = 6.62607015e-34        # Planck constant, J s (exact)
    k_b: float = 1.380649e-23        # Boltzmann constant, J/K (exact)
    mu_0: float = 1.25663706212e-6   # vacuum permeability, H/m

    @property
    def hbar(self) -> float:
        """Reduced Planck constant, J s. Defined as h / (2 pi) so the two
        can never drift apart."""
        return self.h / (2.0 * math.pi)


CONSTANTS = PhysicalConstants()


class Geometry(enum.Enum):
    """Coupling geometry of a measured trace."""

    NOTCH = "notch"
    REFLECTION = "reflection"


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=a.dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class ComplexTrace:
    """A single frequency-domain trace of complex transmission samples.

    Parameters
    ----------
    frequency_hz : array of float
        Strictly increasing stimulus frequencies.
    s21 : array of complex
        Complex transmission at each frequency.
    power_dbm : float or None
        Power applied at the device input plane, if known.
    temperature_k : float or None
        Stage temperature during the sweep, if known.
    resonator_id : str
        Label used in result files.
    """

    frequency_hz: np.ndarray
    s21: np.ndarray
    power_dbm: float | None = None
    temperature_k: float | None = None
    resonator_id: str = "resonator"

    def __post_init__(self):
        f = np.asarray(self.frequency_hz, dtype=float)
        s = np.asarray(self.s21, dtype=complex)
        if f.ndim != 1 or s.ndim != 1:
            raise InvariantViolation("trace arrays must be one-dimensional")
        if f.size != s.size:
            raise InvariantViolation(
                "frequency and s21 arrays must have equal length "
                f"({f.size} vs {s.size})"
            )
        if f.size < 2:
            raise InvariantViolation("trace needs at least two points")
        if not np.all(np.isfinite(f)) or not np.all(np.isfinite(s.view(float))):
            raise InvariantViolation("trace contains non-finite samples")
        if not np.all(np.diff(f) > 0.0):
            raise InvariantViolation("frequencies must be strictly increasing")
        if self.temperature_k is not None and self.temperature_k <= 0.0:
            raise InvariantViolation("temperature_k must be positive")
        object.__setattr__(self, "frequency_hz", _readonly(f))
        object.__setattr__(self, "s21", _readonly(s))

    def __len__(self) -> int:
        return int(self.frequency_hz.size)

    @property
    def span_hz(self) -> float:
        return float(self.frequency_hz[-1] - self.frequency_hz[0])


@dataclass(frozen=True)
class Background:
    """Instrumental background of a trace: amplitude scale, global phase,
    and cable delay."""

    amplitude: float
    phase_rad: float
    delay_s: float

    def __post_init__(self):
        if not (self.amplitude > 0.0 and math.isfinite(self.amplitude)):
            raise InvariantViolation("background amplitude must be positive")
        if not (math.isfinite(self.phase_rad) and math.isfinite(self.delay_s)):
            raise InvariantViolation("background parameters must be finite")


# Relative tolerance on the loaded-Q consistency relation. Fits construct the
# internal Q from the other three parameters, so the relation holds to
# rounding; anything looser than this indicates inconsistent inputs.
_Q_CONSISTENCY_RTOL = 1e-9


@dataclass(frozen=True)
class ResonanceFit:
    """Fitted resonance parameters for one trace.

    The three quality factors satisfy

        1/q_total = 1/q_internal + cos(phi_rad)/q_coupling_mag

    to within 1e-9 relative; construction rejects inconsistent values.
    ``q_coupling_mag`` is the magnitude of the complex coupling quality
    factor, ``phi_rad`` its impedance-mismatch rotation.
    """

    f0_hz: float
    q_total: float
    q_internal: float
    q_coupling_mag: float
    phi_rad: float
    background: Background
    geometry: Geometry = Geometry.NOTCH
    uncertainties: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.f0_hz > 0.0:
            raise InvariantViolation("f0_hz must be positive")
        for name in ("q_total", "q_internal", "q_coupling_mag"):
            if not getattr(self, name) > 0.0:
                raise InvariantViolation(f"{name} must be positive")
        lhs = 1.0 / self.q_total
        rhs = 1.0 / self.q_internal + math.cos(self.phi_rad) / self.q_coupling_mag
        if abs(lhs - rhs) > _Q_CONSISTENCY_RTOL * abs(lhs):
            raise InvariantViolation(
                "quality factors violate 1/q_total = 1/q_internal "
                f"+ cos(phi)/q_coupling_mag (lhs={lhs:.12e}, rhs={rhs:.12e})"
            )

    @classmethod
    def from_internal(
        cls,
        f0_hz: float,
        q_internal: float,
        q_coupling_mag: float,
        phi_rad: float = 0.0,
        background: Background | None = None,
        geometry: Geometry = Geometry.NOTCH,
        uncertainties: dict[str, float] | None = None,
    ) -> "ResonanceFit":
        """Build a consistent fit record from internal and coupling Q.

        Convenience constructor for synthetic ground truths: computes
        ``q_total`` from the consistency relation so the invariant holds
        exactly.
        """
        inv_qt = 1.0 / q_internal + math.cos(phi_rad) / q_coupling_mag
        if inv_qt <= 0.0:
            raise InvariantViolation(
                "coupling rotation too large: total Q would be non-positive"
            )
        return cls(
            f0_hz=f0_hz,
            q_total=1.0 / inv_qt,
            q_internal=q_internal,
            q_coupling_mag=q_coupling_mag,
            phi_rad=phi_rad,
            background=background or Background(1.0, 0.0, 0.0),
            geometry=geometry,
            uncertainties=dict(uncertainties or {}),
        )

    @property
    def internal_loss(self) -> float:
        """Dimensionless internal loss 1/q_internal."""
        return 1.0 / self.q_internal


@dataclass(frozen=True)
class TlsFit:
    """Parameters of the power-dependent internal-loss model.

    delta(n) = delta_tls0 * tanh(h f / (2 k T))
               / sqrt(1 + (n/n_c)**beta) + delta_other
    """

    delta_tls0: float
    n_c: float
    beta: float
    delta_other: float
    frequency_hz: float
    temperature_k: float
    uncertainties: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.delta_tls0 < 0.0:
            raise InvariantViolation("delta_tls0 must be non-negative")
        if not self.n_c > 0.0:
            raise InvariantViolation("n_c must be positive")
        if not 0.0 < self.beta <= 1.0:
            raise InvariantViolation("beta must lie in (0, 1]")
        if not self.delta_other > 0.0:
            raise InvariantViolation("delta_other must be positive")
        if not self.frequency_hz > 0.0:
            raise InvariantViolation("frequency_hz must be positive")
        if not self.temperature_k > 0.0:
            raise InvariantViolation("temperature_k must be positive")


@dataclass(frozen=True)
class MbTempFit:
    """Parameters of the temperature-dependent complex-frequency model.

    ``f_r_hz`` is the complex resonant frequency with the thermal terms
    removed; ``g_reduced`` the geometric conductance factor in reduced
    surface-impedance units (Hz per reduced ohm); ``t_c_k`` the transition
    temperature; ``gap_ratio`` the zero-temperature gap in units of
    k_B Tc / 2 (i.e. 2 Delta0 / (k_B Tc)); ``omega_rad_s`` the fixed angular
    probe frequency.
    """

    f_r_hz: complex
    g_reduced: float
    delta_tls0: float
    t_c_k: float
    gap_ratio: float
    omega_rad_s: float
    uncertainties: dict[str, float] = field(default_factory=dict)
    residual_norm: float = 0.0
    tc_identifiable: bool = True

    def __post_init__(self):
        if self.g_reduced < 0.0:
            raise InvariantViolation("g_reduced must be non-negative")
        if self.delta_tls0 < 0.0:
            raise InvariantViolation("delta_tls0 must be non-negative")
        if not self.t_c_k > 0.0:
            raise InvariantViolation("t_c_k must be positive")
        if not self.gap_ratio > 0.0:
            raise InvariantViolation("gap_ratio must be positive")
        if not self.omega_rad_s > 0.0:
            raise InvariantViolation("omega_rad_s must be positive")
        if self.f_r_hz.real <= 0.0:
            raise InvariantViolation("Re(f_r_hz) must be positive")


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly ordered scalar monitoring series (values in caller units)."""

    index: np.ndarray
    time_s: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.index, dtype=int)
        t = np.asarray(self.time_s, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if not (idx.ndim == t.ndim == v.ndim == 1):
            raise InvariantViolation("series arrays must be one-dimensional")
        if not (idx.size == t.size == v.size):
            raise InvariantViolation("series arrays must have equal length")
        if idx.size == 0:
            raise InvariantViolation("series must not be empty")
        if not np.all(np.diff(t) > 0.0):
            raise InvariantViolation("time_s must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise InvariantViolation("series contains non-finite values")
        object.__setattr__(self, "index", _readonly(idx))
        object.__setattr__(self, "time_s", _readonly(t))
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_values(cls, values, dt_s: float = 1.0, t0_s: float = 0.0) -> "TimeSeries":
        v = np.asarray(values, dtype=float)
        idx = np.arange(v.size)
        return cls(index=idx, time_s=t0_s + dt_s * idx, values=v)


def complex_resonant_frequency(f0_hz: float, q_internal: float) -> complex:
    """Complex resonant frequency f - i f/(2 Qi) of a lossy mode.

    The imaginary part is negative; its magnitude is the half linewidth
    attributable to internal loss.
    """
    if not f0_hz > 0.0:
        raise InvariantViolation("f0_hz must be positive")
    if not q_internal > 0.0:
        raise InvariantViolation("q_internal must be positive")
    return complex(f0_hz, -f0_hz / (2.0 * q_internal))
