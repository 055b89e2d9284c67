"""Text serialization for measurement inputs and analysis artifacts.

All tabular data moves through header-declared CSV with floats written at
17 significant digits, so write-read round trips are exact.  Structured
results are serialized as canonical JSON: sorted keys, two-space indent,
no NaN or infinity, trailing newline.  Identical content therefore yields
byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json

import numpy as np

from .core import ComplexTrace, TimeSeries, TlsFit
from .errors import ParseError
from .mattis_bardeen import TempSweepPoint
from .tls import PowerSweepPoint

_FLOAT_FMT = "%.17g"


def _fmt(value) -> str:
    return _FLOAT_FMT % float(value)


def _read_table(path, required, optional=()):
    """Parse a header-declared CSV into per-column float lists.

    Returns (columns, n_rows) where columns maps each present column name
    to a list of floats.  Raises ParseError with a one-based line number
    for structural or numeric problems.
    """
    want = tuple(required) + tuple(optional)
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        header = None
        header_line = 0
        for line_no, row in enumerate(reader, start=1):
            if row and any(cell.strip() for cell in row):
                header = [cell.strip() for cell in row]
                header_line = line_no
                break
        if header is None:
            raise ParseError(f"{path} is empty")
        missing = [name for name in required if name not in header]
        if missing:
            raise ParseError(
                f"{path} is missing required columns {missing}",
                line=header_line,
            )
        positions = {
            name: header.index(name) for name in want if name in header
        }
        columns = {name: [] for name in positions}
        n_rows = 0
        for line_no, row in enumerate(reader, start=header_line + 1):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: expected {len(header)} fields, got {len(row)}",
                    line=line_no,
                )
            for name, pos in positions.items():
                cell = row[pos].strip()
                try:
                    columns[name].append(float(cell))
                except ValueError:
                    raise ParseError(
                        f"{path}: column {name} has non-numeric value "
                        f"{cell!r}",
                        line=line_no,
                    ) from None
            n_rows += 1
        if n_rows == 0:
            raise ParseError(f"{path} has a header but no data rows")
    return columns, n_rows


def _write_table(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def ingest_trace_csv(path) -> ComplexTrace:
    """Read a complex scattering trace.

    Requires columns frequency_hz, re, im; optional constant columns
    power_dbm and temperature_k annotate the trace.
    """
    cols, _ = _read_table(
        path,
        required=("frequency_hz", "re", "im"),
        optional=("power_dbm", "temperature_k"),
    )
    s21 = np.asarray(cols["re"]) + 1j * np.asarray(cols["im"])
    power = cols["power_dbm"][0] if "power_dbm" in cols else None
    temperature = cols["temperature_k"][0] if "temperature_k" in cols else None
    return ComplexTrace(
        frequency_hz=np.asarray(cols["frequency_hz"]),
        s21=s21,
        power_dbm=power,
        temperature_k=temperature,
    )


def write_trace_csv(path, trace: ComplexTrace) -> None:
    header = ["frequency_hz", "re", "im"]
    extras = []
    if trace.power_dbm is not None:
        header.append("power_dbm")
        extras.append(trace.power_dbm)
    if trace.temperature_k is not None:
        header.append("temperature_k")
        extras.append(trace.temperature_k)
    rows = [
        [f, s.real, s.imag] + extras
        for f, s in zip(trace.frequency_hz, trace.s21)
    ]
    _write_table(path, header, rows)


def read_power_sweep_csv(path) -> list[PowerSweepPoint]:
    cols, n = _read_table(
        path, required=("n_bar", "delta_i"), optional=("delta_i_sigma",)
    )
    sigma = cols.get("delta_i_sigma", [0.0] * n)
    return [
        PowerSweepPoint(n_bar=nb, delta_i=d, delta_i_sigma=s)
        for nb, d, s in zip(cols["n_bar"], cols["delta_i"], sigma)
    ]


def write_power_sweep_csv(path, sweep) -> None:
    _write_table(
        path,
        ["n_bar", "delta_i", "delta_i_sigma"],
        [[p.n_bar, p.delta_i, p.delta_i_sigma] for p in sweep],
    )


def read_temp_sweep_csv(path) -> list[TempSweepPoint]:
    cols, _ = _read_table(path, required=("temperature_k", "f_hz", "im_hz"))
    return [
        TempSweepPoint(temperature_k=t, f_hz=f, im_hz=i)
        for t, f, i in zip(cols["temperature_k"], cols["f_hz"], cols["im_hz"])
    ]


def write_temp_sweep_csv(path, points) -> None:
    _write_table(
        path,
        ["temperature_k", "f_hz", "im_hz"],
        [[p.temperature_k, p.f_hz, p.im_hz] for p in points],
    )


def read_timeseries_csv(path) -> TimeSeries:
    cols, _ = _read_table(path, required=("index", "time_s", "value"))
    return TimeSeries(
        index=np.asarray(cols["index"], dtype=float).astype(int),
        time_s=np.asarray(cols["time_s"]),
        values=np.asarray(cols["value"]),
    )


def write_timeseries_csv(path, series: TimeSeries) -> None:
    _write_table(
        path,
        ["index", "time_s", "value"],
        [
            [int(i), t, v]
            for i, t, v in zip(series.index, series.time_s, series.values)
        ],
    )


_COHORT_COLUMNS = (
    "delta_tls0", "n_c", "beta", "delta_other",
    "frequency_hz", "temperature_k",
)


def read_cohort_fits_csv(path) -> list[tuple[str, str, TlsFit]]:
    """Read labeled loss-model fits: (resonator_id, cohort, fit) triples."""
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError(f"{path} is empty")
    header = [cell.strip() for cell in rows[0]]
    needed = ("resonator_id", "cohort") + _COHORT_COLUMNS
    missing = [name for name in needed if name not in header]
    if missing:
        raise ParseError(f"{path} is missing required columns {missing}", line=1)
    pos = {name: header.index(name) for name in needed}
    out = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: expected {len(header)} fields, got {len(row)}",
                line=line_no,
            )
        try:
            params = {name: float(row[pos[name]]) for name in _COHORT_COLUMNS}
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=line_no) from None
        out.append(
            (
                row[pos["resonator_id"]].strip(),
                row[pos["cohort"]].strip(),
                TlsFit(**params),
            )
        )
    return out


def write_cohort_fits_csv(path, labeled_fits) -> None:
    """Write (resonator_id, cohort, TlsFit) triples."""
    header = ["resonator_id", "cohort", *_COHORT_COLUMNS]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for rid, cohort, fit in labeled_fits:
            writer.writerow(
                [rid, cohort]
                + [_fmt(getattr(fit, name)) for name in _COHORT_COLUMNS]
            )


def canonical_json_dumps(obj) -> str:
    """Serialize to the canonical JSON text used for structured results."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_canonical_json(path, obj) -> None:
    with open(path, "w") as handle:
        handle.write(canonical_json_dumps(obj))


def sha256_of_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
