#!/usr/bin/env python3
"""Smoke test for the armsar_py extension module.

Loads the cdylib straight out of the cargo target directory (build it first
with `cargo build -p armsar-py`), then drives the full pipeline from Python:
simulate -> subtract background -> calibrate -> backproject -> detect, plus
point-response metrics, dataset file round-trip, and radiation arithmetic.

Run from anywhere:

    python3 python/smoke_test.py
"""

import math
import os
import shutil
import sys
import tempfile

WORKSPACE = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
C = 299_792_458.0

failures = 0


def check(name, ok, detail=""):
    global failures
    line = f"PASS {name}" if ok else f"FAIL {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    if not ok:
        failures += 1


def load_module():
    """Copies the built cdylib into a temp dir under its import name."""
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(WORKSPACE, "target"))
    candidates = [
        os.path.join(target, profile, "libarmsar_py.so")
        for profile in ("debug", "release")
    ]
    built = next((p for p in candidates if os.path.exists(p)), None)
    if built is None:
        sys.exit(
            "libarmsar_py.so not found under %s — run `cargo build -p armsar-py` first"
            % target
        )
    stage = tempfile.mkdtemp(prefix="armsar-py-")
    shutil.copy(built, os.path.join(stage, "armsar_py.so"))
    sys.path.insert(0, stage)
    import armsar_py

    return armsar_py


def main():
    sar = load_module()

    # --- scene and trajectory construction -------------------------------
    sweep = sar.make_sweep(24.0e9, 4.0e9, 64)
    check(
        "sweep spans 22-26 GHz in 64 steps",
        len(sweep) == 64
        and sweep.frequencies[0] == 22.0e9
        and sweep.frequencies[-1] == 26.0e9,
    )

    traj = sar.arm_swing(point_count=31, jitter_std_m=0.001, seed=1)
    check(
        "jittered swing keeps 31 positions near a 12 cm aperture",
        len(traj) == 31 and abs(traj.x_extent - 0.12) < 0.02,
        f"x extent {traj.x_extent:.4f} m",
    )

    # --- acquisition, background subtraction, calibration ----------------
    target = [((0.0, 0.10, 0.0), 1.0 + 0.0j)]
    clutter = [((0.04, 0.15, 0.0), 0.3 + 0.1j), ((-0.06, 0.12, 0.0), 0.2 - 0.2j)]
    measured = sar.acquire(target + clutter, traj, sweep, noise_snr_db=35.0, seed=2)
    background = sar.acquire(clutter, traj, sweep, noise_snr_db=35.0, seed=3)
    data = sar.subtract_background(measured, background)
    check(
        "acquisition is 64 x 31 complex samples",
        measured.n_freqs == 64 and measured.n_positions == 31,
    )

    # Delay calibration the way a bench run would do it: a short-aperture
    # capture of the reference target (so every position sees it at nearly
    # the known range), then apply the estimate to the swing data.
    delay = 1.7e-10
    cal_traj = sar.arm_swing(aperture_length_m=0.01, point_count=9)
    cal = sar.acquire(target, cal_traj, sweep)
    estimated = sar.estimate_reference_delay(sar.calibrate_phase(cal, -delay), 0.10)
    check(
        "injected system delay is recovered from the known-range target",
        abs(estimated - delay) < 0.05 * delay,
        f"estimated {estimated:.3e} s vs {delay:.3e} s",
    )
    data = sar.calibrate_phase(sar.calibrate_phase(data, -delay), estimated)

    # --- imaging ----------------------------------------------------------
    grid = sar.Grid(-0.05, 0.05, 0.06, 0.14, 101, 101)
    image = sar.backproject(data, grid)
    peak = sar.detect_peak(image, -6.0)
    px, py = peak.peak_position[0], peak.peak_position[1]
    check(
        "peak lands on the 10 cm target",
        abs(px) <= 2e-3 and abs(py - 0.10) <= 2e-3,
        f"peak at ({px:.4f}, {py:.4f}) m",
    )

    db = image.db()
    flat = [v for row in db for v in row]
    check("dB image is peak-normalized", math.isclose(max(flat), 0.0, abs_tol=1e-12))

    # --- point-response metrics -------------------------------------------
    clean = sar.acquire(target, sar.arm_swing(), sar.make_sweep(24.0e9, 4.0e9, 128))
    psf = sar.psf_metrics(clean, sar.Grid(-0.03, 0.03, 0.05, 0.15, 121, 121))
    cross_theory = (C / 24.0e9) * 0.10 / (2 * 0.12)
    check(
        "cross-range width tracks lambda*R/2L",
        abs(psf.crossrange_fwhm - cross_theory) <= 0.3 * cross_theory,
        f"{psf.crossrange_fwhm:.4f} m vs {cross_theory:.4f} m",
    )
    check(
        "range width is in the bandwidth-limited regime",
        0.02 <= psf.range_fwhm <= 0.06,
        f"{psf.range_fwhm:.4f} m",
    )

    # --- dataset file round-trip -------------------------------------------
    stage = tempfile.mkdtemp(prefix="armsar-io-")
    header_path = sar.write_dataset(stage, "roundtrip", data, 2, "smoke test")
    loaded, header = sar.read_dataset(header_path)
    check(
        "dataset file round-trip is bit-exact",
        loaded.samples() == data.samples()
        and loaded.positions == data.positions
        and header["seed"] == 2,
    )
    shutil.rmtree(stage)

    # --- radiation arithmetic ----------------------------------------------
    eff = sar.efficiency(6.73, 6.74)
    check("efficiency(6.73, 6.74) = 99.8%", abs(eff - 99.8) < 0.1, f"{eff:.2f}%")

    fbw = sar.fractional_bandwidth(20.0e9, 30.0e9)
    check("fractional_bandwidth(20, 30 GHz) = 40%", fbw == 40.0, f"{fbw}%")

    angles = [float(a) for a in range(-180, 181, 5)]
    levels = [18.55 + 17.55 * math.cos(math.radians(a)) for a in angles]
    f = sar.ftbr(angles, levels)
    check("cardioid front-to-back ratio = 15.58 dB", abs(f - 15.58) < 0.01, f"{f:.4f} dB")

    # Half power of a + b*cos(t) sits at cos(t) = (peak/2 - a)/b, so the
    # cardioid's width is 2*acos((18.05 - 18.55)/17.55) = 183.27 degrees.
    bw = sar.half_power_beamwidth_deg(angles, levels)
    expected = 2 * math.degrees(math.acos((18.05 - 18.55) / 17.55))
    check(
        "cardioid half-power beamwidth matches closed form",
        abs(bw - expected) < 1.0,
        f"{bw:.1f} deg vs {expected:.1f} deg",
    )

    if failures:
        sys.exit(f"{failures} check(s) failed")
    print("all checks passed")


if __name__ == "__main__":
    main()
