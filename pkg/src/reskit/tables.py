"""Plain-text summary tables for reports.

Rendering only: every function takes computed values and returns strings,
so the formats can be asserted verbatim in tests and embedded in result
files unchanged.
"""

from __future__ import annotations

from .thermalization import RegionFailure, RegionMarks

MISSING_MARK = "n/a"


def format_qi_pair(qi_low: float, qi_high: float) -> str:
    """Render a low/high quality-factor pair like ``0.8e5 / 3.8e5``."""
    return f"{qi_low / 1e5:.1f}e5 / {qi_high / 1e5:.1f}e5"


def render_cohort_table(medians: dict[str, tuple[float, float]]) -> str:
    """Per-cohort median summary, one ``label: low / high`` line each."""
    lines = ["cohort median Qi (low power / high power)"]
    for label in sorted(medians):
        low, high = medians[label]
        lines.append(f"{label}: {format_qi_pair(low, high)}")
    return "\n".join(lines)


def format_marks_row(pair_label: str, marks) -> str:
    """Render one pairwise comparison like ``1-5: 0, 1, 0, 3``.

    ``marks`` is the pairwise_report output in region order; failed
    regions render as n/a.
    """
    cells = []
    for entry in marks:
        if isinstance(entry, RegionMarks):
            cells.append(str(entry.difference))
        elif isinstance(entry, RegionFailure):
            cells.append(MISSING_MARK)
        else:
            raise TypeError(f"unexpected report entry {type(entry).__name__}")
    return f"{pair_label}: " + ", ".join(cells)


def render_marks_table(rows: dict[str, list]) -> str:
    """Point-difference table over resonator pairs.

    ``rows`` maps pair labels to pairwise_report outputs; differences are
    resonator a minus resonator b in shared point units.
    """
    lines = ["pair: region I, II, III, IV point differences (a - b)"]
    for label in rows:
        lines.append(format_marks_row(label, rows[label]))
    return "\n".join(lines)


def render_sigma_table(sigmas_hz: dict[str, float]) -> str:
    """Frequency-stability table, one ``id: <n> kHz`` line per resonator."""
    lines = ["resonator: frequency standard deviation"]
    for rid in sorted(sigmas_hz):
        lines.append(f"{rid}: {sigmas_hz[rid] / 1e3:.0f} kHz")
    return "\n".join(lines)
