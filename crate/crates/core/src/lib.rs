//! Arm-swing synthetic aperture radar imaging.
//!
//! This crate simulates a body-worn short-range radar: a single monostatic
//! antenna is swept along an irregular hand/arm trajectory while a
//! stepped-frequency continuous-wave (SFCW) sweep is acquired at each
//! position, and the resulting complex S-parameter matrix is focused into a
//! reflectivity image with a sum-and-delay (backprojection) algorithm.
//!
//! The pipeline, end to end:
//!
//! 1. [`scene`] — domain types: frequency sweeps, point scatterers,
//!    trajectories, acquisition datasets, image grids.
//! 2. [`motion`] — synthetic arm-swing trajectories with per-position jitter
//!    and accumulating tracking drift, plus aperture cropping.
//! 3. [`forward`] — monostatic SFCW echo synthesis (the measurement model).
//! 4. [`calib`] — background subtraction and linear-phase (cable delay)
//!    calibration, with a heuristic delay estimator.
//! 5. [`imager`] — backprojection image formation, dB conversion, peak
//!    detection, and point-spread-function analytics.
//! 6. [`radmetrics`] — antenna radiation arithmetic: efficiency,
//!    front-to-back ratio, fractional bandwidth, two-cut directivity.
//! 7. [`io`] / [`config`] / [`cli`] — dataset and image persistence, run
//!    configuration, and the `armsar` command-line front end.
//!
//! # Example
//!
//! Simulate a point target, image it, and locate the peak:
//!
//! ```
//! use armsar::{scene, motion, forward, imager};
//! use num_complex::Complex64;
//!
//! let sweep = scene::make_sweep(24.0e9, 4.0e9, 64)?;
//! let traj = motion::arm_swing(&motion::SwingSpec {
//!     aperture_length: 0.12,
//!     point_count: 31,
//!     standoff: 0.10,
//!     jitter_std: 0.0,
//!     drift_rate: 0.0,
//!     seed: 1,
//! })?;
//! let target = scene::PointScatterer::new([0.0, 0.10, 0.0], Complex64::new(1.0, 0.0))?;
//! let data = forward::acquire(&[target], &traj, &sweep, &forward::ForwardConfig::default())?;
//!
//! let grid = scene::ImageGrid::axis_aligned_xy(-0.06, 0.06, 0.04, 0.16, 96, 96)?;
//! let image = imager::backproject(&data, &grid)?;
//! let report = imager::detect_peak(&image, -6.0)?;
//! assert!((report.peak_position[1] - 0.10).abs() < 2e-3);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod calib;
pub mod cli;
pub mod config;
pub mod forward;
pub mod imager;
pub mod io;
pub mod motion;
pub mod radmetrics;
pub mod scene;
pub mod vec3;

/// cos θ + j·sin θ from a single `sin_cos` evaluation.
///
/// Forward synthesis and backprojection both phase through this helper, so a
/// matched pixel multiplies two conjugate values rounded from the *same*
/// sincos call — their product's imaginary part cancels bitwise.
#[inline]
pub(crate) fn cis(theta: f64) -> num_complex::Complex64 {
    let (s, c) = theta.sin_cos();
    num_complex::Complex64::new(c, s)
}
