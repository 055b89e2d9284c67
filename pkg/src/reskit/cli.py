"""Command-line surface for the resonator characterization pipeline.

Each subcommand reads CSV measurement data, runs the corresponding
library analysis, and writes three kinds of artifact into the output
directory: a canonical ``results.json`` with every fitted parameter,
uncertainty, and provenance needed for exact re-runs; plot-ready
two-column CSVs with ``.axes.json`` sidecars; and, for table-style
outputs, a rendered text table.  Wall-clock metadata lives in a separate
``run_meta.json`` so repeated runs with identical inputs and seed are
byte-identical in ``results.json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .core import Geometry
from .errors import AnalysisError, NoCrossing
from .io import (
    ingest_trace_csv,
    read_cohort_fits_csv,
    read_power_sweep_csv,
    read_temp_sweep_csv,
    read_timeseries_csv,
    sha256_of_file,
    write_canonical_json,
    write_power_sweep_csv,
    write_temp_sweep_csv,
    write_timeseries_csv,
    write_trace_csv,
    _read_table,
    _write_table,
)
from .mattis_bardeen import fit_temperature_sweep, half_qi_temperature
from .resonance import FitConfig, fit_resonance, model_s21, photon_number
from .stability import stability_sigma
from .synth import (
    CANONICAL_REGION_BOUNDS,
    RNG_ALGORITHM,
    NoiseSpec,
    canonical_bath_profile,
    canonical_device_truth,
    gen_power_sweep,
    gen_temp_sweep,
    gen_thermal_response,
    gen_trace,
)
from .tables import render_cohort_table, render_marks_table, render_sigma_table
from .thermalization import (
    RegionMarks,
    build_calibration,
    frequency_to_temperature,
    pairwise_report,
)
from .tls import cohort_medians, filter_outliers, fit_power_sweep, summary_qi

SCHEMA_VERSION = "1"


def _check_inputs(paths):
    for path in paths:
        if not os.path.exists(path):
            raise FileNotFoundError(2, "input path does not exist", path)


def _provenance(input_paths, seed=None, seeded=False):
    record = {
        "model_version": __version__,
        "input_sha256": {path: sha256_of_file(path) for path in input_paths},
        "seed": seed,
    }
    if seeded:
        record["rng_algorithm"] = RNG_ALGORITHM
    return record


def _write_plot(out_dir, name, x_name, x, x_label, y_name, y, y_label, title):
    path = os.path.join(out_dir, name + ".csv")
    _write_table(path, [x_name, y_name], list(zip(x, y)))
    write_canonical_json(
        os.path.join(out_dir, name + ".axes.json"),
        {
            "title": title,
            "x": {"column": x_name, "label": x_label},
            "y": {"column": y_name, "label": y_label},
        },
    )


def _finish(out_dir, command, config, provenance, results):
    document = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "provenance": provenance,
        "results": results,
    }
    write_canonical_json(os.path.join(out_dir, "results.json"), document)
    write_canonical_json(
        os.path.join(out_dir, "run_meta.json"),
        {"written_unix_s": time.time()},
    )


def _fit_record(name, value, uncertainties):
    return {"value": value, "sigma": uncertainties.get(name)}


def _cmd_fit_resonance(args):
    _check_inputs([args.input])
    trace = ingest_trace_csv(args.input)
    geometry = Geometry(args.geometry)
    fit = fit_resonance(
        trace,
        FitConfig(
            geometry=geometry,
            estimate_delay=not args.no_delay,
            convergence_tol=args.tolerance,
        ),
    )
    unc = fit.uncertainties
    results = {
        "resonator": {
            "f0_hz": _fit_record("f0_hz", fit.f0_hz, unc),
            "q_total": _fit_record("q_total", fit.q_total, unc),
            "q_internal": _fit_record("q_internal", fit.q_internal, unc),
            "q_coupling_mag": _fit_record(
                "q_coupling_mag", fit.q_coupling_mag, unc
            ),
            "phi_rad": _fit_record("phi_rad", fit.phi_rad, unc),
            "background": {
                "amplitude": _fit_record(
                    "amplitude", fit.background.amplitude, unc
                ),
                "phase_rad": _fit_record(
                    "phase_rad", fit.background.phase_rad, unc
                ),
                "delay_s": _fit_record("delay_s", fit.background.delay_s, unc),
            },
            "geometry": geometry.value,
        }
    }
    if trace.power_dbm is not None:
        applied_dbm = trace.power_dbm - args.attenuation_db
        applied_w = 10.0 ** ((applied_dbm - 30.0) / 10.0)
        results["photon_number"] = photon_number(fit, applied_w)
        results["applied_power_dbm"] = applied_dbm
    model = model_s21(fit, trace.frequency_hz)
    _write_plot(
        args.out, "s21_mag_vs_f",
        "frequency_hz", trace.frequency_hz, "frequency (Hz)",
        "s21_mag", np.abs(trace.s21), "|S21|",
        "measured transmission magnitude",
    )
    _write_plot(
        args.out, "s21_model_mag_vs_f",
        "frequency_hz", trace.frequency_hz, "frequency (Hz)",
        "s21_mag", np.abs(model), "|S21|",
        "fitted transmission magnitude",
    )
    config = {
        "input": args.input,
        "geometry": geometry.value,
        "attenuation_db": args.attenuation_db,
        "no_delay": args.no_delay,
        "tolerance": args.tolerance,
    }
    _finish(
        args.out, "fit-resonance", config, _provenance([args.input]), results
    )


def _cmd_fit_power(args):
    _check_inputs([args.input])
    sweep = read_power_sweep_csv(args.input)
    report = filter_outliers(sweep)
    kept = [sweep[i] for i in report.kept]
    fit = fit_power_sweep(kept, args.frequency_hz, args.temperature_k)
    qi_low, qi_high = summary_qi(fit)
    unc = fit.uncertainties
    results = {
        "loss_model": {
            "delta_tls0": _fit_record("delta_tls0", fit.delta_tls0, unc),
            "n_c": _fit_record("n_c", fit.n_c, unc),
            "beta": _fit_record("beta", fit.beta, unc),
            "delta_other": _fit_record("delta_other", fit.delta_other, unc),
        },
        "qi_low_power": qi_low,
        "qi_high_power": qi_high,
        "outliers": {
            "kept": list(report.kept),
            "dropped_low": [[i, tag] for i, tag in report.dropped_low],
            "dropped_high": [[i, tag] for i, tag in report.dropped_high],
            "window_floor": report.window_floor,
        },
    }
    _write_plot(
        args.out, "qi_vs_nbar",
        "n_bar", [p.n_bar for p in kept], "mean photon number",
        "q_internal", [1.0 / p.delta_i for p in kept], "internal Q",
        "internal quality factor versus drive",
    )
    config = {
        "input": args.input,
        "frequency_hz": args.frequency_hz,
        "temperature_k": args.temperature_k,
    }
    _finish(args.out, "fit-power", config, _provenance([args.input]), results)


def _cmd_fit_temperature(args):
    _check_inputs([args.input])
    points = read_temp_sweep_csv(args.input)
    fit = fit_temperature_sweep(points, rel_tol=args.tolerance)
    try:
        t_half = half_qi_temperature(fit)
    except NoCrossing:
        t_half = None
    unc = fit.uncertainties
    results = {
        "thermal_model": {
            "f_r_re_hz": _fit_record("f_r_re_hz", fit.f_r_hz.real, unc),
            "f_r_im_hz": _fit_record("f_r_im_hz", fit.f_r_hz.imag, unc),
            "g_reduced": _fit_record("g_reduced", fit.g_reduced, unc),
            "delta_tls0": _fit_record("delta_tls0", fit.delta_tls0, unc),
            "t_c_k": _fit_record("t_c_k", fit.t_c_k, unc),
            "gap_ratio": _fit_record("gap_ratio", fit.gap_ratio, unc),
            "omega_rad_s": fit.omega_rad_s,
            "tc_identifiable": fit.tc_identifiable,
            "residual_norm": fit.residual_norm,
        },
        "half_qi_temperature_k": t_half,
    }
    temps = [p.temperature_k for p in points]
    _write_plot(
        args.out, "f_vs_temperature",
        "temperature_k", temps, "temperature (K)",
        "f_hz", [p.f_hz for p in points], "resonant frequency (Hz)",
        "frequency versus temperature",
    )
    _write_plot(
        args.out, "imf_vs_temperature",
        "temperature_k", temps, "temperature (K)",
        "im_hz", [p.im_hz for p in points], "-f0/(2 Qi) (Hz)",
        "dissipative response versus temperature",
    )
    config = {
        "input": args.input,
        "tolerance": args.tolerance,
    }
    _finish(
        args.out, "fit-temperature", config, _provenance([args.input]), results
    )


def _parse_regions(text):
    bounds = []
    for part in text.split(","):
        lo, _, hi = part.partition(":")
        bounds.append((int(lo), int(hi)))
    if len(bounds) != 4:
        raise ValueError(f"expected four regions, got {len(bounds)}")
    return bounds


def _cmd_thermalize(args):
    inputs = [args.input_a, args.input_b, args.calibration]
    _check_inputs(inputs)
    series_a = read_timeseries_csv(args.input_a)
    series_b = read_timeseries_csv(args.input_b)
    cols, _ = _read_table(
        args.calibration, required=("temperature_k", "frequency_hz")
    )
    cal = build_calibration(
        np.column_stack([cols["temperature_k"], cols["frequency_hz"]])
    )
    regions = _parse_regions(args.regions)
    marks = pairwise_report(series_a, series_b, regions)
    entries = []
    for entry in marks:
        if isinstance(entry, RegionMarks):
            entries.append(
                {
                    "region": entry.region,
                    "resonator_a_point": entry.resonator_a_point,
                    "resonator_b_point": entry.resonator_b_point,
                    "difference": entry.difference,
                }
            )
        else:
            entries.append({"region": entry.region, "error": entry.reason})
    table = render_marks_table({args.pair_label: marks})
    with open(os.path.join(args.out, "marks_table.txt"), "w") as handle:
        handle.write(table + "\n")
    for label, series in (("a", series_a), ("b", series_b)):
        temps = [
            frequency_to_temperature(cal, float(f)) for f in series.values
        ]
        _write_plot(
            args.out, f"temperature_vs_time_{label}",
            "time_s", series.time_s, "time (s)",
            "temperature_k", temps, "device temperature (K)",
            f"thermal response of resonator {label}",
        )
    results = {
        "pair_label": args.pair_label,
        "marks": entries,
        "marks_table": table,
    }
    config = {
        "input_a": args.input_a,
        "input_b": args.input_b,
        "calibration": args.calibration,
        "regions": args.regions,
        "pair_label": args.pair_label,
    }
    _finish(args.out, "thermalize", config, _provenance(inputs), results)


def _cmd_stability(args):
    _check_inputs(args.inputs)
    sigmas = {}
    for path in args.inputs:
        rid = os.path.splitext(os.path.basename(path))[0]
        series = read_timeseries_csv(path)
        sigmas[rid] = stability_sigma(series)
        centered = series.values - np.mean(series.values)
        _write_plot(
            args.out, f"dfreq_vs_time_{rid}",
            "time_s", series.time_s, "time (s)",
            "delta_f_hz", centered, "frequency deviation (Hz)",
            f"frequency stability of {rid}",
        )
    table = render_sigma_table(sigmas)
    with open(os.path.join(args.out, "sigma_table.txt"), "w") as handle:
        handle.write(table + "\n")
    results = {"sigma_hz": sigmas, "sigma_table": table}
    config = {"inputs": list(args.inputs)}
    _finish(args.out, "stability", config, _provenance(args.inputs), results)


def _cmd_report(args):
    _check_inputs([args.cohort_file])
    triples = read_cohort_fits_csv(args.cohort_file)
    medians = cohort_medians([(fit, cohort) for _, cohort, fit in triples])
    table = render_cohort_table(medians)
    with open(os.path.join(args.out, "cohort_table.txt"), "w") as handle:
        handle.write(table + "\n")
    results = {
        "medians": {
            label: {"qi_low": low, "qi_high": high}
            for label, (low, high) in medians.items()
        },
        "per_resonator": {
            rid: {
                "cohort": cohort,
                "qi_low": summary_qi(fit)[0],
                "qi_high": summary_qi(fit)[1],
            }
            for rid, cohort, fit in triples
        },
        "cohort_table": table,
    }
    config = {"cohort_file": args.cohort_file}
    _finish(
        args.out, "report", config, _provenance([args.cohort_file]), results
    )


def _truth_summary(truth):
    return {
        "resonance": {
            "f0_hz": truth.resonance.f0_hz,
            "q_internal": truth.resonance.q_internal,
            "q_coupling_mag": truth.resonance.q_coupling_mag,
            "phi_rad": truth.resonance.phi_rad,
        },
        "tls": {
            "delta_tls0": truth.tls.delta_tls0,
            "n_c": truth.tls.n_c,
            "beta": truth.tls.beta,
            "delta_other": truth.tls.delta_other,
        },
        "mb": {
            "f_r_re_hz": truth.mb.f_r_hz.real,
            "f_r_im_hz": truth.mb.f_r_hz.imag,
            "g_reduced": truth.mb.g_reduced,
            "delta_tls0": truth.mb.delta_tls0,
            "t_c_k": truth.mb.t_c_k,
            "gap_ratio": truth.mb.gap_ratio,
        },
        "thermal_tau_s": truth.thermal_tau_s,
        "seed": truth.seed,
    }


def _cmd_synth(args):
    noise = NoiseSpec(
        trace_rel=args.noise_trace,
        loss_rel=args.noise_loss,
        temp_sweep_hz=args.noise_temp,
        thermal_hz=args.noise_thermal,
    )
    truth = canonical_device_truth(
        seed=args.seed, noise=noise, thermal_tau_s=args.tau_a
    )
    written = []
    if args.kind == "trace":
        f0 = truth.resonance.f0_hz
        grid = np.linspace(f0 - 2.7e5, f0 + 2.7e5, 801)
        trace = dataclasses.replace(
            gen_trace(truth, grid), power_dbm=-60.0, temperature_k=0.1
        )
        path = os.path.join(args.out, "trace.csv")
        write_trace_csv(path, trace)
        written.append("trace.csv")
    elif args.kind == "power":
        sweep = gen_power_sweep(truth, np.logspace(-2, 6, 33))
        path = os.path.join(args.out, "power_sweep.csv")
        write_power_sweep_csv(path, sweep)
        written.append("power_sweep.csv")
    elif args.kind == "temp":
        temps = np.round(np.arange(0.10, 0.5001, 0.01), 10)
        points = gen_temp_sweep(truth, temps)
        path = os.path.join(args.out, "temp_sweep.csv")
        write_temp_sweep_csv(path, points)
        written.append("temp_sweep.csv")
    elif args.kind == "thermal":
        bath = canonical_bath_profile()
        truth_b = canonical_device_truth(
            seed=args.seed + 1, noise=noise, thermal_tau_s=args.tau_b
        )
        write_timeseries_csv(
            os.path.join(args.out, "thermal_a.csv"),
            gen_thermal_response(truth, bath),
        )
        write_timeseries_csv(
            os.path.join(args.out, "thermal_b.csv"),
            gen_thermal_response(truth_b, bath),
        )
        cal_temps = np.round(np.arange(0.30, 0.5001, 0.01), 10)
        cal_points = gen_temp_sweep(
            canonical_device_truth(seed=args.seed), cal_temps
        )
        _write_table(
            os.path.join(args.out, "calibration.csv"),
            ["temperature_k", "frequency_hz"],
            [[p.temperature_k, p.f_hz] for p in cal_points],
        )
        written += ["thermal_a.csv", "thermal_b.csv", "calibration.csv"]
    else:
        raise ValueError(f"unknown synth kind {args.kind!r}")
    results = {
        "kind": args.kind,
        "files": written,
        "truth": _truth_summary(truth),
        "region_bounds": [list(b) for b in CANONICAL_REGION_BOUNDS],
    }
    config = {
        "kind": args.kind,
        "seed": args.seed,
        "tau_a": args.tau_a,
        "tau_b": args.tau_b,
        "noise_trace": args.noise_trace,
        "noise_loss": args.noise_loss,
        "noise_temp": args.noise_temp,
        "noise_thermal": args.noise_thermal,
    }
    _finish(
        args.out, "synth", config,
        _provenance([], seed=args.seed, seeded=True), results,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reskit",
        description="resonator characterization pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-resonance", help="fit a complex scattering trace")
    p.add_argument("--input", required=True)
    p.add_argument("--geometry", choices=["notch", "reflection"],
                   default="notch")
    p.add_argument("--attenuation-db", type=float, default=0.0)
    p.add_argument("--no-delay", action="store_true",
                   help="do not fit a cable delay")
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.set_defaults(handler=_cmd_fit_resonance)

    p = sub.add_parser("fit-power", help="fit loss versus photon number")
    p.add_argument("--input", required=True)
    p.add_argument("--frequency-hz", type=float, required=True)
    p.add_argument("--temperature-k", type=float, required=True)
    p.set_defaults(handler=_cmd_fit_power)

    p = sub.add_parser("fit-temperature",
                       help="fit the thermal complex-frequency model")
    p.add_argument("--input", required=True)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.set_defaults(handler=_cmd_fit_temperature)

    p = sub.add_parser("thermalize",
                       help="compare thermal response of two resonators")
    p.add_argument("--input-a", required=True)
    p.add_argument("--input-b", required=True)
    p.add_argument("--calibration", required=True)
    p.add_argument("--regions", default=",".join(
        f"{lo}:{hi}" for lo, hi in CANONICAL_REGION_BOUNDS))
    p.add_argument("--pair-label", default="a-b")
    p.set_defaults(handler=_cmd_thermalize)

    p = sub.add_parser("stability", help="frequency stability summary")
    p.add_argument("--inputs", nargs="+", required=True)
    p.set_defaults(handler=_cmd_stability)

    p = sub.add_parser("report", help="cohort median summary table")
    p.add_argument("--cohort-file", required=True)
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("synth", help="generate synthetic measurements")
    p.add_argument("--kind", choices=["trace", "power", "temp", "thermal"],
                   required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau-a", type=float, default=80.0)
    p.add_argument("--tau-b", type=float, default=40.0)
    p.add_argument("--noise-trace", type=float, default=0.0)
    p.add_argument("--noise-loss", type=float, default=0.0)
    p.add_argument("--noise-temp", type=float, default=0.0)
    p.add_argument("--noise-thermal", type=float, default=0.0)
    p.set_defaults(handler=_cmd_synth)

    for name, sp in sub.choices.items():
        sp.add_argument("--out", required=True,
                        help="output directory for artifacts")
    return parser


def _error_record(exc) -> dict:
    return {
        "error": type(exc).__name__,
        "message": str(exc),
        "path": getattr(exc, "filename", None),
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        args.handler(args)
    except (AnalysisError, OSError, ValueError) as exc:
        sys.stderr.write(json.dumps(_error_record(exc)) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
