"""End-to-end demo: synthesize every measurement kind, fit it back.

Generates a noisy scattering trace, a power sweep, a temperature sweep,
and a thermal-response pair with the command-line interface, runs the
matching analysis command on each, and prints the recovered parameters
next to the generating truth.  All artifacts land in a scratch
directory given on the command line (default ./demo_out).

Run from the repository root:  python3 scripts/roundtrip_demo.py
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from reskit.cli import main


def run(args: list[str]) -> None:
    rc = main(args)
    if rc != 0:
        raise SystemExit(f"command failed: {' '.join(args)}")


def results(out_dir: str) -> dict:
    with open(os.path.join(out_dir, "results.json")) as handle:
        return json.load(handle)["results"]


def demo(base: str) -> None:
    seed = "42"

    run(["synth", "--kind", "trace", "--seed", seed,
         "--noise-trace", "0.005", "--out", f"{base}/synth_trace"])
    run(["fit-resonance", "--input", f"{base}/synth_trace/trace.csv",
         "--attenuation-db", "60", "--out", f"{base}/fit_resonance"])
    truth = results(f"{base}/synth_trace")["truth"]["resonance"]
    fit = results(f"{base}/fit_resonance")["resonator"]
    print("resonance:")
    print(f"  Qi  truth {truth['q_internal']:.4g}"
          f"  fit {fit['q_internal']['value']:.4g}")
    print(f"  f0  truth {truth['f0_hz']:.10g}"
          f"  fit {fit['f0_hz']['value']:.10g}")

    run(["synth", "--kind", "power", "--seed", seed,
         "--noise-loss", "0.05", "--out", f"{base}/synth_power"])
    run(["fit-power", "--input", f"{base}/synth_power/power_sweep.csv",
         "--frequency-hz", "6e9", "--temperature-k", "0.1",
         "--out", f"{base}/fit_power"])
    truth = results(f"{base}/synth_power")["truth"]["tls"]
    fit = results(f"{base}/fit_power")["loss_model"]
    print("power sweep:")
    for name in ("delta_tls0", "delta_other"):
        print(f"  {name}  truth {truth[name]:.4g}"
              f"  fit {fit[name]['value']:.4g}")

    run(["synth", "--kind", "temp", "--seed", seed,
         "--noise-temp", "50", "--out", f"{base}/synth_temp"])
    run(["fit-temperature", "--input", f"{base}/synth_temp/temp_sweep.csv",
         "--out", f"{base}/fit_temperature"])
    truth = results(f"{base}/synth_temp")["truth"]["mb"]
    fit = results(f"{base}/fit_temperature")["thermal_model"]
    print("temperature sweep:")
    for name in ("t_c_k", "gap_ratio"):
        print(f"  {name}  truth {truth[name]:.4g}"
              f"  fit {fit[name]['value']:.4g}")

    run(["synth", "--kind", "thermal", "--seed", seed,
         "--out", f"{base}/synth_thermal"])
    run(["thermalize",
         "--input-a", f"{base}/synth_thermal/thermal_a.csv",
         "--input-b", f"{base}/synth_thermal/thermal_b.csv",
         "--calibration", f"{base}/synth_thermal/calibration.csv",
         "--pair-label", "a-b", "--out", f"{base}/thermalize"])
    print("thermal pair (tau 80 s vs 40 s):")
    print("  " + results(f"{base}/thermalize")["marks_table"]
          .replace("\n", "\n  "))


if __name__ == "__main__":
    demo(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
