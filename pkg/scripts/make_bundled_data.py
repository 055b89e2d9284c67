"""Regenerate the bundled example datasets under data/.

Two artifacts are produced, both exactly reproducible:

* ``data/cohort_power_fits.csv``: ten power-sweep loss fits, five per
  cohort, built so the cohort medians of (low-power Qi, high-power Qi)
  land exactly on 0.8e5 / 3.8e5 for the membrane cohort and
  1.2e5 / 2.3e5 for the substrate cohort.  Each cohort scales one
  center fit by symmetric factors, so the middle resonator is the
  median in both summary numbers.
* ``data/stability/R2.csv`` .. ``R6.csv``: frequency monitor series
  whose population standard deviations are exactly 21, 24, 10, 17 and
  15 kHz; each series alternates f0 + sigma, f0 - sigma over an even
  number of samples, which pins mean and standard deviation exactly.

Run from the repository root:  python3 scripts/make_bundled_data.py
"""

from __future__ import annotations

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from reskit.core import CONSTANTS, TimeSeries, TlsFit
from reskit.io import write_cohort_fits_csv, write_timeseries_csv
from reskit.tls import summary_qi

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")

FREQUENCY_HZ = 6.0e9
TEMPERATURE_K = 0.1
N_C = 10.0
BETA = 0.5

# (cohort, id prefix, target low-power Qi, target high-power Qi)
COHORTS = [
    ("membrane", "M", 0.8e5, 3.8e5),
    ("substrate", "S", 1.2e5, 2.3e5),
]

# Scales applied to the center fit; the middle entry is the median.
MEMBER_SCALES = (1.10, 1.05, 1.00, 0.95, 0.90)

STABILITY_SIGMA_HZ = {
    "R2": 21.0e3,
    "R3": 24.0e3,
    "R4": 10.0e3,
    "R5": 17.0e3,
    "R6": 15.0e3,
}
STABILITY_POINTS = 120
STABILITY_DT_S = 45.0


def center_fit(qi_low: float, qi_high: float) -> TlsFit:
    """Loss fit whose summary Qi pair equals the requested targets.

    The high-power limit fixes delta_other = 1/qi_high.  The low-power
    summary evaluates the model at one photon and the base temperature,
    which fixes delta_tls0 through the thermal occupation factor and
    the single-photon saturation factor.
    """
    h_over_kb = CONSTANTS.h / CONSTANTS.k_b
    occupation = np.tanh(
        h_over_kb * FREQUENCY_HZ / (2.0 * TEMPERATURE_K)
    )
    saturation = np.sqrt(1.0 + (1.0 / N_C) ** BETA)
    delta_other = 1.0 / qi_high
    delta_tls0 = (1.0 / qi_low - delta_other) * saturation / occupation
    return TlsFit(
        delta_tls0=float(delta_tls0),
        n_c=N_C,
        beta=BETA,
        delta_other=delta_other,
        frequency_hz=FREQUENCY_HZ,
        temperature_k=TEMPERATURE_K,
    )


def scaled(fit: TlsFit, scale: float) -> TlsFit:
    """Scale both loss channels; summary Qi values scale by 1/scale."""
    return TlsFit(
        delta_tls0=fit.delta_tls0 * scale,
        n_c=fit.n_c,
        beta=fit.beta,
        delta_other=fit.delta_other * scale,
        frequency_hz=fit.frequency_hz,
        temperature_k=fit.temperature_k,
    )


def make_cohort_file(path: str) -> None:
    rows = []
    for cohort, prefix, qi_low, qi_high in COHORTS:
        center = center_fit(qi_low, qi_high)
        got = summary_qi(center)
        if not np.isclose(got[0], qi_low, rtol=1e-12) or not np.isclose(
            got[1], qi_high, rtol=1e-12
        ):
            raise AssertionError(f"center fit misses targets: {got}")
        for k, scale in enumerate(MEMBER_SCALES, start=1):
            rows.append((f"{prefix}{k}", cohort, scaled(center, scale)))
    write_cohort_fits_csv(path, rows)


def make_stability_files(directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    for k, (rid, sigma) in enumerate(sorted(STABILITY_SIGMA_HZ.items())):
        f0 = 4.0e9 + 0.5e9 * k
        signs = np.where(np.arange(STABILITY_POINTS) % 2 == 0, 1.0, -1.0)
        series = TimeSeries.from_values(
            f0 + sigma * signs, dt_s=STABILITY_DT_S
        )
        write_timeseries_csv(os.path.join(directory, f"{rid}.csv"), series)


def main() -> None:
    os.makedirs(DATA_DIR, exist_ok=True)
    make_cohort_file(os.path.join(DATA_DIR, "cohort_power_fits.csv"))
    make_stability_files(os.path.join(DATA_DIR, "stability"))
    print(f"bundled data written under {os.path.abspath(DATA_DIR)}")


if __name__ == "__main__":
    main()
