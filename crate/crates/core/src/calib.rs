//! Pre-imaging corrections: background subtraction and phase calibration.
//!
//! Short-range acquisitions are dominated by static clutter (the room, the
//! fixture, antenna self-coupling) and by a common linear phase from the
//! cable/connector path between the instrument's reference plane and the
//! antenna. Both must come out before backprojection:
//!
//! * [`subtract_background`] removes a target-free reference capture taken
//!   over the same sweep and trajectory.
//! * [`calibrate_phase`] removes a system delay τ by multiplying each sample
//!   by e^{+j2π·f_m·τ} — the inverse of the e^{−j2π·f_m·τ} a real cable
//!   imprints. The operation is a group action in τ, hence exactly
//!   invertible.
//! * [`estimate_reference_delay`] recovers τ heuristically from a capture of
//!   a single dominant reflector at a known range, by locating the peak of
//!   an incoherent range profile and attributing the offset to delay.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::cis;
use crate::scene::{AcquisitionDataset, SceneError, SPEED_OF_LIGHT};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Relative tolerance for "same frequencies" in geometry checks.
const FREQ_MATCH_REL: f64 = 1e-9;
/// Absolute tolerance (meters) for "same positions" in geometry checks.
const POS_MATCH_M: f64 = 1e-9;

/// Required prominence of the range-profile peak over its median, dB.
const PEAK_MARGIN_DB: f64 = 6.0;
/// Delay search window half-width, expressed as apparent range, meters.
const SEARCH_HALF_WINDOW_M: f64 = 0.5;
/// Smallest apparent range searched (negative apparent ranges are assumed
/// unphysical — cable delays advance the phase, they do not un-delay it).
const MIN_RANGE_M: f64 = 1e-3;
/// Coarse grid steps per range-resolution cell c/(2B).
const COARSE_OVERSAMPLE: f64 = 8.0;
/// Golden-section refinement stops below this bracket width, meters.
const GOLDEN_TOL_M: f64 = 1e-6;

/// Calibration errors.
#[derive(Debug, Error)]
pub enum CalibError {
    #[error("datasets differ in {what}; background must share the measured geometry")]
    GeometryMismatch { what: &'static str },
    #[error("reference delay must be finite (got {0} s)")]
    BadDelay(f64),
    #[error("known range must be positive and finite (got {0} m)")]
    BadKnownRange(f64),
    #[error("delay estimation needs at least two frequencies")]
    NeedsBandwidth,
    #[error(
        "no dominant reflection: range-profile peak is only {margin_db:.2} dB above the \
         median (need ≥ {PEAK_MARGIN_DB})"
    )]
    NoDominantPeak { margin_db: f64 },
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Element-wise `measured − background`, preserving the measured metadata.
///
/// The two datasets must cover the same geometry: equal dimensions,
/// frequencies equal within 1e−9 relative, positions within 1e−9 m.
pub fn subtract_background(
    measured: &AcquisitionDataset,
    background: &AcquisitionDataset,
) -> Result<AcquisitionDataset, CalibError> {
    if measured.n_freqs() != background.n_freqs()
        || measured.n_positions() != background.n_positions()
    {
        return Err(CalibError::GeometryMismatch { what: "dimensions" });
    }
    let freqs_match = measured
        .sweep()
        .frequencies()
        .iter()
        .zip(background.sweep().frequencies())
        .all(|(&a, &b)| (a - b).abs() <= FREQ_MATCH_REL * a.abs().max(b.abs()));
    if !freqs_match {
        return Err(CalibError::GeometryMismatch {
            what: "frequencies",
        });
    }
    let positions_match = measured
        .trajectory()
        .positions()
        .iter()
        .zip(background.trajectory().positions())
        .all(|(&a, &b)| crate::vec3::dist(a, b) <= POS_MATCH_M);
    if !positions_match {
        return Err(CalibError::GeometryMismatch { what: "positions" });
    }
    let samples = measured.samples() - background.samples();
    Ok(AcquisitionDataset::new(
        measured.sweep().clone(),
        measured.trajectory().clone(),
        samples,
    )?)
}

/// Removes a common system delay: each S(m, n) is multiplied by
/// e^{+j2π·f_m·τ}.
///
/// τ = 0 is the exact identity; τ₁ followed by τ₂ equals τ₁+τ₂; magnitudes
/// are preserved (to rounding). Negative τ *injects* a delay — useful for
/// synthesizing cable-corrupted test data.
pub fn calibrate_phase(
    data: &AcquisitionDataset,
    reference_delay: f64,
) -> Result<AcquisitionDataset, CalibError> {
    if !reference_delay.is_finite() {
        return Err(CalibError::BadDelay(reference_delay));
    }
    let factors: Vec<Complex64> = data
        .sweep()
        .frequencies()
        .iter()
        .map(|&f| cis(TWO_PI * f * reference_delay))
        .collect();
    let mut samples = data.samples().clone();
    for (mi, mut row) in samples.rows_mut().into_iter().enumerate() {
        let w = factors[mi];
        for s in row.iter_mut() {
            *s *= w;
        }
    }
    Ok(AcquisitionDataset::new(
        data.sweep().clone(),
        data.trajectory().clone(),
        samples,
    )?)
}

/// Incoherent range profile: A(r) = (1/N)·Σ_n |Σ_m S(m,n)·e^{+j2·k_m·r}|.
///
/// Magnitudes are averaged across positions *after* the coherent frequency
/// sum, so a common delay shows up as a sharp peak at the apparent range
/// even though the aperture positions are mutually out of phase.
fn range_profile_at(samples: &Array2<Complex64>, ks: &[f64], r: f64) -> f64 {
    let (m, n) = samples.dim();
    let mut total = 0.0;
    for ni in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for mi in 0..m {
            acc += samples[(mi, ni)] * cis(2.0 * ks[mi] * r);
        }
        total += acc.norm();
    }
    total / n as f64
}

/// Estimates the system delay from a capture of one dominant reflector at a
/// known range.
///
/// Heuristic: the peak of the incoherent range profile sits at
/// `known_range + c·τ/2`; a coarse grid over
/// `[known_range − 0.5 m, known_range + 0.5 m]` (clamped to ≥ 1 mm, stepped
/// at one eighth of the range-resolution cell) locates it, golden-section
/// refinement sharpens it to a micron, and the offset converts to τ. The
/// peak must stand ≥ 6 dB above the profile median or estimation is
/// refused — an incoherent average over the positions keeps a pure-noise
/// profile flat, so noise cannot fake a peak.
///
/// Unambiguous only while the sweep's alias period c/(2·Δf) exceeds the
/// search window; fine sweeps (hundreds of points over GHz) are far inside
/// that regime.
pub fn estimate_reference_delay(
    data: &AcquisitionDataset,
    known_range: f64,
) -> Result<f64, CalibError> {
    if data.n_freqs() < 2 {
        return Err(CalibError::NeedsBandwidth);
    }
    if !known_range.is_finite() || known_range <= 0.0 {
        return Err(CalibError::BadKnownRange(known_range));
    }
    let ks = data.sweep().wavenumbers();
    let samples = data.samples();
    let bandwidth = data.sweep().span();
    let cell = SPEED_OF_LIGHT / (2.0 * bandwidth);
    let step = cell / COARSE_OVERSAMPLE;
    let r_lo = (known_range - SEARCH_HALF_WINDOW_M).max(MIN_RANGE_M);
    let r_hi = known_range + SEARCH_HALF_WINDOW_M;

    // Coarse scan.
    let count = ((r_hi - r_lo) / step).ceil() as usize + 1;
    let mut best_i = 0;
    let mut best_a = f64::NEG_INFINITY;
    let mut profile = Vec::with_capacity(count);
    for i in 0..count {
        let r = (r_lo + i as f64 * step).min(r_hi);
        let a = range_profile_at(samples, &ks, r);
        if a > best_a {
            best_a = a;
            best_i = i;
        }
        profile.push(a);
    }

    // Flatness gate: peak prominence over the median, in dB.
    let mut sorted = profile.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 {
        sorted[count / 2]
    } else {
        0.5 * (sorted[count / 2 - 1] + sorted[count / 2])
    };
    if !(best_a > 0.0 && median > 0.0) {
        return Err(CalibError::NoDominantPeak {
            margin_db: f64::NEG_INFINITY,
        });
    }
    let margin_db = 20.0 * (best_a / median).log10();
    if margin_db < PEAK_MARGIN_DB {
        return Err(CalibError::NoDominantPeak { margin_db });
    }

    // Golden-section refinement inside the bracketing coarse cells.
    let mut a = (r_lo + (best_i as f64 - 1.0) * step).max(r_lo);
    let mut b = (r_lo + (best_i as f64 + 1.0) * step).min(r_hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = range_profile_at(samples, &ks, c);
    let mut fd = range_profile_at(samples, &ks, d);
    while b - a > GOLDEN_TOL_M {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = range_profile_at(samples, &ks, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = range_profile_at(samples, &ks, d);
        }
    }
    let r_peak = 0.5 * (a + b);
    Ok(2.0 * (r_peak - known_range) / SPEED_OF_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{acquire, ForwardConfig};
    use crate::motion::{arm_swing, SwingSpec};
    use crate::scene::{make_sweep, PointScatterer, Trajectory};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_datasets_close(a: &AcquisitionDataset, b: &AcquisitionDataset, tol: f64) {
        for (x, y) in a.samples().iter().zip(b.samples().iter()) {
            assert!(
                (x - y).norm() <= tol * y.norm().max(1.0),
                "{x} vs {y}"
            );
        }
    }

    fn point_scene(x: f64, y: f64) -> Vec<PointScatterer> {
        vec![PointScatterer::new([x, y, 0.0], Complex64::new(1.0, 0.0)).unwrap()]
    }

    fn small_swing(n: usize) -> Trajectory {
        arm_swing(&SwingSpec {
            point_count: n,
            ..SwingSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn subtracting_a_dataset_from_itself_gives_zero() {
        let sweep = make_sweep(24.0e9, 4.0e9, 8).unwrap();
        let traj = small_swing(5);
        let ds = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let diff = subtract_background(&ds, &ds).unwrap();
        assert!(diff.samples().iter().all(|s| *s == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn subtracting_zero_background_is_identity() {
        let sweep = make_sweep(24.0e9, 4.0e9, 8).unwrap();
        let traj = small_swing(5);
        let ds = acquire(&point_scene(0.01, 0.12), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let zero = acquire(&[], &traj, &sweep, &ForwardConfig::default()).unwrap();
        let diff = subtract_background(&ds, &zero).unwrap();
        assert_eq!(diff.samples(), ds.samples());
    }

    #[test]
    fn subtraction_undoes_clutter_superposition() {
        // acquire(target ∪ clutter) − acquire(clutter) = acquire(target):
        // the forward model is linear, so subtraction isolates the target.
        let sweep = make_sweep(24.0e9, 4.0e9, 16).unwrap();
        let traj = small_swing(9);
        let target = point_scene(0.0, 0.1);
        let clutter = vec![
            PointScatterer::new([0.08, 0.3, 0.02], Complex64::new(2.0, 0.5)).unwrap(),
            PointScatterer::new([-0.05, 0.22, -0.04], Complex64::new(-0.7, 1.2)).unwrap(),
        ];
        let both: Vec<PointScatterer> = target.iter().chain(clutter.iter()).copied().collect();
        let cfg = ForwardConfig::default();
        let measured = acquire(&both, &traj, &sweep, &cfg).unwrap();
        let background = acquire(&clutter, &traj, &sweep, &cfg).unwrap();
        let want = acquire(&target, &traj, &sweep, &cfg).unwrap();
        let got = subtract_background(&measured, &background).unwrap();
        assert_datasets_close(&got, &want, 1e-12);
    }

    #[test]
    fn add_then_subtract_roundtrips_elementwise() {
        let sweep = make_sweep(24.0e9, 4.0e9, 6).unwrap();
        let traj = small_swing(4);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut random_ds = || {
            let samples = Array2::from_shape_fn((6, 4), |_| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            AcquisitionDataset::new(sweep.clone(), traj.clone(), samples).unwrap()
        };
        let a = random_ds();
        let b = random_ds();
        let sum = AcquisitionDataset::new(
            sweep.clone(),
            traj.clone(),
            a.samples() + b.samples(),
        )
        .unwrap();
        let back = subtract_background(&sum, &b).unwrap();
        assert_datasets_close(&back, &a, 1e-12);
    }

    #[test]
    fn geometry_mismatches_are_rejected() {
        let sweep = make_sweep(24.0e9, 4.0e9, 4).unwrap();
        let traj = small_swing(3);
        let cfg = ForwardConfig::default();
        let ds = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &cfg).unwrap();

        // Different dimensions.
        let short = acquire(&point_scene(0.0, 0.1), &small_swing(2), &sweep, &cfg).unwrap();
        assert!(matches!(
            subtract_background(&ds, &short),
            Err(CalibError::GeometryMismatch { what: "dimensions" })
        ));

        // Frequencies off by more than 1e−9 relative.
        let shifted_sweep = make_sweep(24.0e9 * (1.0 + 1e-6), 4.0e9, 4).unwrap();
        let shifted = acquire(&point_scene(0.0, 0.1), &traj, &shifted_sweep, &cfg).unwrap();
        assert!(matches!(
            subtract_background(&ds, &shifted),
            Err(CalibError::GeometryMismatch { what: "frequencies" })
        ));

        // Positions off by more than 1e−9 m.
        let mut moved: Vec<[f64; 3]> = traj.positions().to_vec();
        moved[1][0] += 5e-9;
        let moved = Trajectory::new(moved).unwrap();
        let moved_ds = acquire(&point_scene(0.0, 0.1), &moved, &sweep, &cfg).unwrap();
        assert!(matches!(
            subtract_background(&ds, &moved_ds),
            Err(CalibError::GeometryMismatch { what: "positions" })
        ));

        // Sub-tolerance wobble is accepted.
        let mut wobbled: Vec<[f64; 3]> = traj.positions().to_vec();
        wobbled[1][0] += 1e-10;
        let wobbled = Trajectory::new(wobbled).unwrap();
        let wobbled_ds = acquire(&point_scene(0.0, 0.1), &wobbled, &sweep, &cfg).unwrap();
        assert!(subtract_background(&ds, &wobbled_ds).is_ok());
    }

    #[test]
    fn zero_delay_calibration_is_identity() {
        let sweep = make_sweep(24.0e9, 4.0e9, 8).unwrap();
        let traj = small_swing(4);
        let ds = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let out = calibrate_phase(&ds, 0.0).unwrap();
        assert_eq!(out.samples(), ds.samples());
    }

    #[test]
    fn calibration_round_trip_recovers_clean_data() {
        let sweep = make_sweep(24.0e9, 4.0e9, 32).unwrap();
        let traj = small_swing(7);
        let clean = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let tau = 1.7e-9;
        // Negative delay injects the cable factor e^{−j2π·f·τ}…
        let corrupted = calibrate_phase(&clean, -tau).unwrap();
        // …and calibrating with +τ takes it back out.
        let recovered = calibrate_phase(&corrupted, tau).unwrap();
        assert_datasets_close(&recovered, &clean, 1e-12);
    }

    #[test]
    fn delays_compose_additively() {
        let sweep = make_sweep(24.0e9, 4.0e9, 10).unwrap();
        let traj = small_swing(3);
        let ds = acquire(&point_scene(0.01, 0.14), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let one_then_two =
            calibrate_phase(&calibrate_phase(&ds, 0.8e-9).unwrap(), -2.1e-9).unwrap();
        let combined = calibrate_phase(&ds, 0.8e-9 - 2.1e-9).unwrap();
        assert_datasets_close(&one_then_two, &combined, 1e-12);
    }

    #[test]
    fn calibration_preserves_magnitudes() {
        let sweep = make_sweep(24.0e9, 4.0e9, 12).unwrap();
        let traj = small_swing(5);
        let ds = acquire(&point_scene(-0.02, 0.09), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let out = calibrate_phase(&ds, 3.3e-9).unwrap();
        for (a, b) in out.samples().iter().zip(ds.samples().iter()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn non_finite_delay_rejected() {
        let sweep = make_sweep(24.0e9, 4.0e9, 3).unwrap();
        let traj = small_swing(2);
        let ds = acquire(&[], &traj, &sweep, &ForwardConfig::default()).unwrap();
        assert!(calibrate_phase(&ds, f64::NAN).is_err());
        assert!(calibrate_phase(&ds, f64::INFINITY).is_err());
    }

    #[test]
    fn estimator_recovers_injected_delay_from_single_position() {
        let sweep = make_sweep(24.0e9, 2.0e9, 64).unwrap();
        let traj = Trajectory::new(vec![[0.0, 0.0, 0.0]]).unwrap();
        let clean = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let tau = 2.0e-9;
        let corrupted = calibrate_phase(&clean, -tau).unwrap();
        let estimate = estimate_reference_delay(&corrupted, 0.1).unwrap();
        assert!(
            (estimate - tau).abs() / tau < 0.05,
            "estimate {estimate:.4e} vs injected {tau:.4e}"
        );
    }

    #[test]
    fn estimator_tolerates_a_real_aperture() {
        // A short swing spreads the per-position ranges a little; the
        // incoherent profile's peak should still land within 5%.
        let sweep = make_sweep(24.0e9, 2.0e9, 64).unwrap();
        let traj = arm_swing(&SwingSpec {
            aperture_length: 0.04,
            point_count: 33,
            ..SwingSpec::default()
        })
        .unwrap();
        let clean = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let tau = 2.0e-9;
        let corrupted = calibrate_phase(&clean, -tau).unwrap();
        let estimate = estimate_reference_delay(&corrupted, 0.1).unwrap();
        assert!(
            (estimate - tau).abs() / tau < 0.05,
            "estimate {estimate:.4e} vs injected {tau:.4e}"
        );
    }

    #[test]
    fn estimator_reports_near_zero_for_uncorrupted_data() {
        let sweep = make_sweep(24.0e9, 2.0e9, 64).unwrap();
        let traj = Trajectory::new(vec![[0.0, 0.0, 0.0]]).unwrap();
        let ds = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        let estimate = estimate_reference_delay(&ds, 0.1).unwrap();
        // Within one coarse grid step of zero (in delay units: 1/(8B)).
        assert!(estimate.abs() <= 1.0 / (8.0 * 2.0e9), "estimate {estimate:.3e}");
    }

    #[test]
    fn estimator_refuses_pure_noise() {
        let sweep = make_sweep(24.0e9, 2.0e9, 64).unwrap();
        let traj = small_swing(48);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let samples = Array2::from_shape_fn((64, 48), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let ds = AcquisitionDataset::new(sweep, traj, samples).unwrap();
        assert!(matches!(
            estimate_reference_delay(&ds, 0.1),
            Err(CalibError::NoDominantPeak { .. })
        ));
    }

    #[test]
    fn estimator_validates_inputs() {
        let sweep = make_sweep(24.0e9, 0.0, 1).unwrap();
        let traj = small_swing(2);
        let ds = acquire(&point_scene(0.0, 0.1), &traj, &sweep, &ForwardConfig::default())
            .unwrap();
        assert!(matches!(
            estimate_reference_delay(&ds, 0.1),
            Err(CalibError::NeedsBandwidth)
        ));
        let sweep2 = make_sweep(24.0e9, 2.0e9, 8).unwrap();
        let ds2 = acquire(&point_scene(0.0, 0.1), &traj, &sweep2, &ForwardConfig::default())
            .unwrap();
        assert!(estimate_reference_delay(&ds2, -0.1).is_err());
        assert!(estimate_reference_delay(&ds2, f64::NAN).is_err());
    }
}
