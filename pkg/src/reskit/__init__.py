"""Characterization toolkit for superconducting coplanar-waveguide resonators.

Fits complex scattering traces, photon-number loss sweeps, and
temperature-dependent complex resonant frequencies; compares thermal
response and frequency stability across resonators; and generates seeded
synthetic measurements for end-to-end validation.
"""

__version__ = "0.1.0"

from .core import (
    CONSTANTS,
    Background,
    ComplexTrace,
    Geometry,
    MbTempFit,
    PhysicalConstants,
    ResonanceFit,
    TimeSeries,
    TlsFit,
    complex_resonant_frequency,
)

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
    "__version__",
]
