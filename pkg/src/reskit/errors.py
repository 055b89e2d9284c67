"""Exception types shared across the toolkit.

Every failure mode callers are expected to handle has a named class here, so
pipelines can catch narrowly instead of pattern-matching on messages.
"""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class for all toolkit errors."""


class InvariantViolation(AnalysisError):
    """A domain object failed one of its construction invariants.

    The message names the invariant that failed.
    """


class InsufficientData(AnalysisError):
    """Too few (or too narrow) data points for the requested operation."""


class NoDipFound(AnalysisError):
    """No resonance dip distinguishable from the off-resonance noise floor."""


class NonConvergence(AnalysisError):
    """An iterative fit failed to converge within its iteration budget."""


class DegenerateSweep(AnalysisError):
    """A power sweep whose loss dynamic range is too small to constrain a fit."""


class EmptyCohort(AnalysisError):
    """A cohort summary was requested for a cohort with no member fits."""


class GapClosed(AnalysisError):
    """Superconducting gap evaluated at or above the transition temperature."""


class PhotonAboveGap(AnalysisError):
    """Photon energy at or above the pair-breaking threshold 2*Delta(T)."""


class DegenerateConductivity(AnalysisError):
    """Complex conductivity with zero magnitude: surface impedance undefined."""


class QuadratureError(AnalysisError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best error estimate achieved before giving up.
    """

    def __init__(self, message: str, estimate: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate


class NonMonotoneInput(AnalysisError):
    """Input that the operation requires to be strictly monotone is not."""


class OutOfRange(AnalysisError):
    """Value outside the domain covered by a calibration."""


class NoChangeDetected(AnalysisError):
    """No persistent trend onset found in a monitored series."""


class NoInteriorExtremum(AnalysisError):
    """Series has no interior extremum of the requested kind to fit."""


class NoCrossing(AnalysisError):
    """A bracketed root search found no sign change in the search interval."""


class WindowTooNarrow(AnalysisError):
    """Fewer points inside the requested fit window than the method needs."""


class OutOfLinearRange(AnalysisError):
    """Phase excursion outside the calibrated linear conversion window."""


class ParseError(AnalysisError):
    """Malformed input file.

    Attributes
    ----------
    line : int
        One-based line number of the offending record, 0 if not line-specific.
    """

    def __init__(self, message: str, line: int = 0):
        super().__init__(message)
        self.line = line


class TemperatureAboveTc(UserWarning):
    """Warning: an input point sits above the running Tc estimate and was
    excluded from the temperature-sweep fit."""
