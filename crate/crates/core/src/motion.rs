//! Synthetic arm-swing trajectories: irregular body-motion apertures and
//! tracking-camera drift.
//!
//! A wearable radar is swept by hand, so the measurement positions are
//! neither exactly uniform nor exactly collinear, and the pose tracker that
//! reports them accumulates error as the hand travels. [`arm_swing`] models
//! both effects on top of a nominal uniform line along x:
//!
//! * **Jitter** — independent zero-mean Gaussian displacement per position
//!   and per axis (hand motion is 3-D even when the nominal swing is 1-D).
//! * **Drift** — a seeded random-walk bias added on top of the jitter, whose
//!   per-step increments scale with the nominal distance traveled
//!   (`drift_rate` is meters of drift per meter of travel); the first
//!   position carries no drift.
//!
//! [`crop_aperture`] recovers the longest contiguous stretch of a trajectory
//! whose x-extent stays within a limit — the standard remedy when only a
//! short portion of a long swing is phase-consistent enough to image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::scene::{SceneError, Trajectory};

/// Parameters of one synthetic arm swing.
#[derive(Debug, Clone, PartialEq)]
pub struct SwingSpec {
    /// Nominal aperture length L along x, meters; positions span [−L/2, L/2].
    pub aperture_length: f64,
    /// Number of measurement positions N (≥ 1).
    pub point_count: usize,
    /// Distance from the aperture line to the scene region along +y, meters.
    /// Not used by trajectory generation itself (positions lie at y = 0);
    /// carried so scene builders can place targets consistently.
    pub standoff: f64,
    /// Per-axis standard deviation of the position jitter, meters (≥ 0).
    pub jitter_std: f64,
    /// Drift random-walk scale, meters of bias per meter traveled (≥ 0).
    pub drift_rate: f64,
    /// RNG seed; equal specs with equal seeds yield identical trajectories.
    pub seed: u64,
}

impl Default for SwingSpec {
    /// A 12 cm, 61-point swing at 10 cm standoff with no perturbations.
    fn default() -> Self {
        Self {
            aperture_length: 0.12,
            point_count: 61,
            standoff: 0.10,
            jitter_std: 0.0,
            drift_rate: 0.0,
            seed: 0,
        }
    }
}

/// Trajectory-generation errors.
#[derive(Debug, Error)]
pub enum MotionError {
    #[error("aperture length must be positive and finite (got {0})")]
    BadApertureLength(f64),
    #[error("point count must be ≥ 1")]
    BadPointCount,
    #[error("{what} must be finite and ≥ 0 (got {value})")]
    BadSpread { what: &'static str, value: f64 },
    #[error("standoff must be finite")]
    BadStandoff,
    #[error("crop extent must be positive and finite (got {0})")]
    BadCropExtent(f64),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Generates one arm-swing trajectory.
///
/// Nominal positions are uniformly spaced along x over [−L/2, +L/2] at
/// y = z = 0 (a single point degenerates to the origin); jitter and drift
/// are then applied per the [`SwingSpec`] fields. With `jitter_std = 0` and
/// `drift_rate = 0` the output is bitwise the nominal progression
/// `x_i = −L/2 + i·(L/(N−1))`.
pub fn arm_swing(spec: &SwingSpec) -> Result<Trajectory, MotionError> {
    if !spec.aperture_length.is_finite() || spec.aperture_length <= 0.0 {
        return Err(MotionError::BadApertureLength(spec.aperture_length));
    }
    if spec.point_count == 0 {
        return Err(MotionError::BadPointCount);
    }
    if !spec.standoff.is_finite() {
        return Err(MotionError::BadStandoff);
    }
    for (what, value) in [
        ("jitter_std", spec.jitter_std),
        ("drift_rate", spec.drift_rate),
    ] {
        if !value.is_finite() || value < 0.0 {
            return Err(MotionError::BadSpread { what, value });
        }
    }

    let n = spec.point_count;
    let (start, step) = if n == 1 {
        (0.0, 0.0)
    } else {
        (
            -spec.aperture_length / 2.0,
            spec.aperture_length / (n - 1) as f64,
        )
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = || -> f64 { rng.sample(StandardNormal) };
    let mut bias = [0.0f64; 3];
    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            // Random-walk drift: one increment per axis per step, scaled by
            // the nominal step length (drift grows with distance traveled,
            // independent of the jitter realization).
            for b in &mut bias {
                *b += spec.drift_rate * step * gauss();
            }
        }
        let jitter = [
            spec.jitter_std * gauss(),
            spec.jitter_std * gauss(),
            spec.jitter_std * gauss(),
        ];
        positions.push([
            start + i as f64 * step + bias[0] + jitter[0],
            bias[1] + jitter[1],
            bias[2] + jitter[2],
        ]);
    }
    Ok(Trajectory::new(positions)?)
}

/// Returns the longest contiguous run of positions whose x-extent
/// (max x − min x) does not exceed `max_extent`; ties go to the earliest
/// start index. Order is preserved; the result is always a contiguous slice
/// of the input.
///
/// Runs in O(N) with monotonic min/max deques over the window.
pub fn crop_aperture(traj: &Trajectory, max_extent: f64) -> Result<Trajectory, MotionError> {
    if !max_extent.is_finite() || max_extent <= 0.0 {
        return Err(MotionError::BadCropExtent(max_extent));
    }
    let xs: Vec<f64> = traj.positions().iter().map(|p| p[0]).collect();
    let n = xs.len();

    // Sliding window: grow the right edge, shrink the left until the window's
    // x-extent fits. Deques hold indices of decreasing maxima / increasing
    // minima so the current extent is O(1) to read.
    let mut max_dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut min_dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut left = 0usize;
    let mut best = (0usize, 1usize); // (start, length); N ≥ 1 so a 1-window always fits
    for right in 0..n {
        while max_dq.back().is_some_and(|&i| xs[i] <= xs[right]) {
            max_dq.pop_back();
        }
        max_dq.push_back(right);
        while min_dq.back().is_some_and(|&i| xs[i] >= xs[right]) {
            min_dq.pop_back();
        }
        min_dq.push_back(right);
        while xs[max_dq[0]] - xs[min_dq[0]] > max_extent {
            if max_dq[0] == left {
                max_dq.pop_front();
            }
            if min_dq[0] == left {
                min_dq.pop_front();
            }
            left += 1;
        }
        // Strictly longer only: first maximal window wins ties.
        if right - left + 1 > best.1 {
            best = (left, right - left + 1);
        }
    }
    let slice = &traj.positions()[best.0..best.0 + best.1];
    Ok(Trajectory::new(slice.to_vec())?)
}
