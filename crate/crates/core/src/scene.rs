//! Scene primitives: scatterers, frequency sweeps, trajectories, datasets,
//! and image grids.
//!
//! Everything downstream (forward synthesis, calibration, imaging) consumes
//! these types. All are immutable values after construction — constructors
//! validate invariants once, so the hot numerical paths never re-check.
//!
//! Coordinate convention (right-handed): x = cross-range (the motion
//! direction), y = range (toward the target), z = vertical.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::vec3::{self, Vec3};

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Maximum relative deviation of adjacent frequency gaps for a sweep to be
/// treated as uniformly spaced (see [`FrequencySweep::uniform_step`]).
///
/// Sweeps built by [`make_sweep`] land around 1e−12 from division rounding
/// alone, even at several thousand points; anything genuinely irregular is
/// orders of magnitude above this.
pub const UNIFORM_GAP_TOLERANCE: f64 = 1e-11;

/// Construction errors for scene types.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("frequency sweep needs at least one frequency")]
    EmptySweep,
    #[error("sweep frequencies must be finite, positive, and strictly increasing (index {index})")]
    BadFrequency { index: usize },
    #[error("sweep would start at {lowest:.6e} Hz; center − bandwidth/2 must be positive")]
    NonPositiveStart { lowest: f64 },
    #[error("{what} must be positive and finite (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("{what} must be finite and ≥ 0 (got {value})")]
    Negative { what: &'static str, value: f64 },
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },
    #[error("trajectory needs at least one position")]
    EmptyTrajectory,
    #[error(
        "sample matrix is {got_m}×{got_n} but the sweep has {want_m} frequencies \
         and the trajectory {want_n} positions"
    )]
    DimensionMismatch {
        got_m: usize,
        got_n: usize,
        want_m: usize,
        want_n: usize,
    },
    #[error("grid axes must be orthonormal unit vectors (unit norm and mutually orthogonal within 1e-9)")]
    BadGridAxes,
    #[error("grid pixel counts must be ≥ 1")]
    BadPixelCount,
    #[error("image values are {got_1}×{got_2} but the grid is {want_1}×{want_2} pixels")]
    ImageDimensionMismatch {
        got_1: usize,
        got_2: usize,
        want_1: usize,
        want_2: usize,
    },
}

// ───────────────────────── point scatterers ─────────────────────────

/// An ideal point reflector with a complex, frequency-independent
/// reflectivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScatterer {
    /// Location in meters.
    pub position: Vec3,
    /// Complex reflectivity (dimensionless).
    pub reflectivity: Complex64,
}

impl PointScatterer {
    /// Builds a scatterer, rejecting non-finite components.
    pub fn new(position: Vec3, reflectivity: Complex64) -> Result<Self, SceneError> {
        if !vec3::is_finite(position) {
            return Err(SceneError::NonFinite {
                what: "scatterer position",
            });
        }
        if !reflectivity.re.is_finite() || !reflectivity.im.is_finite() {
            return Err(SceneError::NonFinite {
                what: "scatterer reflectivity",
            });
        }
        Ok(Self {
            position,
            reflectivity,
        })
    }
}

// ───────────────────────── frequency sweeps ─────────────────────────

/// An ordered list of M acquisition frequencies (Hz), strictly increasing
/// and positive. Wavenumbers k_m = 2π·f_m/c are derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySweep {
    frequencies: Vec<f64>,
}

impl FrequencySweep {
    /// Validates and wraps an explicit frequency list.
    pub fn new(frequencies: Vec<f64>) -> Result<Self, SceneError> {
        if frequencies.is_empty() {
            return Err(SceneError::EmptySweep);
        }
        for (index, &f) in frequencies.iter().enumerate() {
            let increasing = index == 0 || f > frequencies[index - 1];
            if !f.is_finite() || f <= 0.0 || !increasing {
                return Err(SceneError::BadFrequency { index });
            }
        }
        Ok(Self { frequencies })
    }

    /// The frequencies in Hz.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Number of frequencies M.
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    /// Always false (a sweep holds at least one frequency); provided for
    /// convention alongside [`len`](Self::len).
    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Lowest frequency, Hz.
    pub fn lowest(&self) -> f64 {
        self.frequencies[0]
    }

    /// Highest frequency, Hz.
    pub fn highest(&self) -> f64 {
        *self.frequencies.last().unwrap()
    }

    /// Swept bandwidth (highest − lowest), Hz. Zero for a single frequency.
    pub fn span(&self) -> f64 {
        self.highest() - self.lowest()
    }

    /// Wavenumbers k_m = 2π·f_m/c in rad/m, one per frequency.
    pub fn wavenumbers(&self) -> Vec<f64> {
        // Frequencies were validated positive, so `wavenumber` cannot fail.
        self.frequencies
            .iter()
            .map(|&f| wavenumber(f).expect("validated frequency"))
            .collect()
    }

    /// Returns the common frequency step when the sweep is uniformly spaced
    /// (adjacent gaps agree within [`UNIFORM_GAP_TOLERANCE`] relative), else
    /// `None`. Single-frequency sweeps are not uniform in this sense.
    ///
    /// The step is computed as span/(M−1) rather than from any single gap, so
    /// it is the best least-noise estimate for downstream phase recurrences.
    pub fn uniform_step(&self) -> Option<f64> {
        let m = self.frequencies.len();
        if m < 2 {
            return None;
        }
        let step = self.span() / (m - 1) as f64;
        for pair in self.frequencies.windows(2) {
            let gap = pair[1] - pair[0];
            if ((gap - step) / step).abs() > UNIFORM_GAP_TOLERANCE {
                return None;
            }
        }
        Some(step)
    }
}

/// Builds a uniform sweep of `count` frequencies spanning
/// `[center − bandwidth/2, center + bandwidth/2]`.
///
/// With `count == 1` the single frequency is the center (any bandwidth is
/// ignored in that case other than validation). Errors when the lowest
/// frequency would be non-positive, or when `bandwidth == 0` with
/// `count ≥ 2` (equal frequencies violate strict monotonicity).
pub fn make_sweep(center: f64, bandwidth: f64, count: usize) -> Result<FrequencySweep, SceneError> {
    if !center.is_finite() || center <= 0.0 {
        return Err(SceneError::NonPositive {
            what: "sweep center frequency",
            value: center,
        });
    }
    if !bandwidth.is_finite() || bandwidth < 0.0 {
        return Err(SceneError::Negative {
            what: "sweep bandwidth",
            value: bandwidth,
        });
    }
    if count == 0 {
        return Err(SceneError::EmptySweep);
    }
    if count == 1 {
        return FrequencySweep::new(vec![center]);
    }
    let start = center - bandwidth / 2.0;
    if start <= 0.0 {
        return Err(SceneError::NonPositiveStart { lowest: start });
    }
    let step = bandwidth / (count - 1) as f64;
    let frequencies = (0..count).map(|i| start + i as f64 * step).collect();
    FrequencySweep::new(frequencies)
}

/// Free-space wavenumber k = 2π·f/c in rad/m for a frequency in Hz.
///
/// Errors on non-positive or non-finite input.
pub fn wavenumber(freq: f64) -> Result<f64, SceneError> {
    if !freq.is_finite() || freq <= 0.0 {
        return Err(SceneError::NonPositive {
            what: "frequency",
            value: freq,
        });
    }
    Ok(TWO_PI * freq / SPEED_OF_LIGHT)
}

// ───────────────────────── trajectories ─────────────────────────

/// The ordered antenna positions r_n of one acquisition (N ≥ 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    positions: Vec<Vec3>,
}

impl Trajectory {
    /// Validates and wraps a position list.
    pub fn new(positions: Vec<Vec3>) -> Result<Self, SceneError> {
        if positions.is_empty() {
            return Err(SceneError::EmptyTrajectory);
        }
        if positions.iter().any(|&p| !vec3::is_finite(p)) {
            return Err(SceneError::NonFinite {
                what: "trajectory position",
            });
        }
        Ok(Self { positions })
    }

    /// The positions in meters.
    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    /// Number of positions N.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// Always false (a trajectory holds at least one position).
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Spread of the x-coordinates (max − min), meters. Zero for N = 1.
    pub fn x_extent(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.positions {
            lo = lo.min(p[0]);
            hi = hi.max(p[0]);
        }
        hi - lo
    }
}

// ───────────────────────── acquisition datasets ─────────────────────────

/// One complete acquisition: the sweep, the trajectory, and the M×N complex
/// sample matrix S(m, n) (S-parameter, dimensionless), frequency-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionDataset {
    sweep: FrequencySweep,
    trajectory: Trajectory,
    samples: Array2<Complex64>,
}

impl AcquisitionDataset {
    /// Validates dimensions (samples must be M×N) and finiteness.
    pub fn new(
        sweep: FrequencySweep,
        trajectory: Trajectory,
        samples: Array2<Complex64>,
    ) -> Result<Self, SceneError> {
        let (got_m, got_n) = samples.dim();
        if got_m != sweep.len() || got_n != trajectory.len() {
            return Err(SceneError::DimensionMismatch {
                got_m,
                got_n,
                want_m: sweep.len(),
                want_n: trajectory.len(),
            });
        }
        if samples.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SceneError::NonFinite { what: "sample" });
        }
        Ok(Self {
            sweep,
            trajectory,
            samples,
        })
    }

    /// The frequency sweep.
    pub fn sweep(&self) -> &FrequencySweep {
        &self.sweep
    }

    /// The antenna trajectory.
    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// The M×N sample matrix, indexed `[(m, n)]`.
    pub fn samples(&self) -> &Array2<Complex64> {
        &self.samples
    }

    /// Number of frequencies M.
    pub fn n_freqs(&self) -> usize {
        self.sweep.len()
    }

    /// Number of positions N.
    pub fn n_positions(&self) -> usize {
        self.trajectory.len()
    }
}

// ───────────────────────── image grids and images ─────────────────────────

/// A planar pixel grid in 3-D space.
///
/// Pixel (i1, i2) sits at `origin + axis1·(i1·step1) + axis2·(i2·step2)`
/// with `step = extent/(P−1)`: pixels are node-centered, spanning the full
/// extent inclusive of both endpoints (one pixel degenerates to the origin).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    origin: Vec3,
    axis1: Vec3,
    axis2: Vec3,
    extents: (f64, f64),
    pixels: (usize, usize),
}

impl ImageGrid {
    /// Validates orthonormal axes (within 1e−9), positive finite extents,
    /// and pixel counts ≥ 1.
    pub fn new(
        origin: Vec3,
        axis1: Vec3,
        axis2: Vec3,
        extents: (f64, f64),
        pixels: (usize, usize),
    ) -> Result<Self, SceneError> {
        if !vec3::is_finite(origin) || !vec3::is_finite(axis1) || !vec3::is_finite(axis2) {
            return Err(SceneError::NonFinite { what: "grid vector" });
        }
        let tol = 1e-9;
        if (vec3::norm(axis1) - 1.0).abs() > tol
            || (vec3::norm(axis2) - 1.0).abs() > tol
            || vec3::dot(axis1, axis2).abs() > tol
        {
            return Err(SceneError::BadGridAxes);
        }
        for (what, v) in [("grid width", extents.0), ("grid height", extents.1)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(SceneError::NonPositive { what, value: v });
            }
        }
        if pixels.0 == 0 || pixels.1 == 0 {
            return Err(SceneError::BadPixelCount);
        }
        Ok(Self {
            origin,
            axis1,
            axis2,
            extents,
            pixels,
        })
    }

    /// Convenience constructor for the common case: an axis-aligned grid in
    /// the z = 0 plane with axis 1 along x (cross-range) and axis 2 along y
    /// (range), spanning `[x_min, x_max] × [y_min, y_max]`.
    pub fn axis_aligned_xy(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        p1: usize,
        p2: usize,
    ) -> Result<Self, SceneError> {
        Self::new(
            [x_min, y_min, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            (x_max - x_min, y_max - y_min),
            (p1, p2),
        )
    }

    /// Grid origin (position of pixel (0, 0)).
    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    /// Unit direction of grid axis 1.
    pub fn axis1(&self) -> Vec3 {
        self.axis1
    }

    /// Unit direction of grid axis 2.
    pub fn axis2(&self) -> Vec3 {
        self.axis2
    }

    /// Physical extents (along axis 1, along axis 2), meters.
    pub fn extents(&self) -> (f64, f64) {
        self.extents
    }

    /// Pixel counts (P1, P2).
    pub fn pixels(&self) -> (usize, usize) {
        self.pixels
    }

    /// Pixel pitch along axis 1 (0 when P1 = 1).
    pub fn step1(&self) -> f64 {
        if self.pixels.0 > 1 {
            self.extents.0 / (self.pixels.0 - 1) as f64
        } else {
            0.0
        }
    }

    /// Pixel pitch along axis 2 (0 when P2 = 1).
    pub fn step2(&self) -> f64 {
        if self.pixels.1 > 1 {
            self.extents.1 / (self.pixels.1 - 1) as f64
        } else {
            0.0
        }
    }

    /// World position of pixel (i1, i2).
    pub fn pixel_position(&self, i1: usize, i2: usize) -> Vec3 {
        let a = vec3::scale(self.axis1, i1 as f64 * self.step1());
        let b = vec3::scale(self.axis2, i2 as f64 * self.step2());
        vec3::add(self.origin, vec3::add(a, b))
    }
}

/// A complex reflectivity image over an [`ImageGrid`], indexed `[(i1, i2)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectivityImage {
    grid: ImageGrid,
    values: Array2<Complex64>,
}

impl ReflectivityImage {
    /// Validates that `values` matches the grid's pixel counts.
    pub fn new(grid: ImageGrid, values: Array2<Complex64>) -> Result<Self, SceneError> {
        let (got_1, got_2) = values.dim();
        if (got_1, got_2) != grid.pixels {
            return Err(SceneError::ImageDimensionMismatch {
                got_1,
                got_2,
                want_1: grid.pixels.0,
                want_2: grid.pixels.1,
            });
        }
        Ok(Self { grid, values })
    }

    /// The pixel grid.
    pub fn grid(&self) -> &ImageGrid {
        &self.grid
    }

    /// The P1×P2 complex pixel values.
    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }
}

// ───────────────────────── plate targets ─────────────────────────

/// Default plate discretization pitch for a sweep: λ/4 at the highest
/// frequency — finer than anything the system can resolve, so the discrete
/// plate behaves as a continuous reflector.
pub fn default_plate_spacing(sweep: &FrequencySweep) -> f64 {
    SPEED_OF_LIGHT / sweep.highest() / 4.0
}

/// Number of grid nodes along one plate axis such that the realized pitch
/// `extent/(n−1)` never exceeds the requested spacing. A plate thinner than
/// one spacing collapses to a single node at the center.
fn plate_axis_count(extent: f64, spacing: f64) -> usize {
    let ratio = extent / spacing;
    if ratio * (1.0 + 1e-12) < 1.0 {
        1
    } else {
        // The 1e−12 guard absorbs division rounding so that e.g. a ratio of
        // exactly 2 (± an ulp) yields 3 nodes, not 4.
        (ratio * (1.0 - 1e-12)).ceil() as usize + 1
    }
}

/// Node offsets along one plate axis, exactly antisymmetric about zero.
fn plate_axis_offsets(extent: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    let step = extent / (count - 1) as f64;
    let half = (count - 1) as f64 / 2.0;
    (0..count).map(|i| (i as f64 - half) * step).collect()
}

/// Discretizes a rectangular metallic plate into a regular grid of point
/// scatterers.
///
/// The plate lies broadside to the aperture: width along x, height along z,
/// at the fixed range y = `center[1]`. Node pitch never exceeds `spacing`,
/// the layout is mirror-symmetric about the center, and the **total**
/// reflectivity is divided equally over the nodes, so the sum of node
/// reflectivities equals `reflectivity` regardless of the pitch.
pub fn discretize_plate(
    center: Vec3,
    width: f64,
    height: f64,
    spacing: f64,
    reflectivity: Complex64,
) -> Result<Vec<PointScatterer>, SceneError> {
    if !vec3::is_finite(center) {
        return Err(SceneError::NonFinite {
            what: "plate center",
        });
    }
    for (what, v) in [
        ("plate width", width),
        ("plate height", height),
        ("plate spacing", spacing),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(SceneError::NonPositive { what, value: v });
        }
    }
    let nx = plate_axis_count(width, spacing);
    let nz = plate_axis_count(height, spacing);
    let per_node = reflectivity / (nx * nz) as f64;
    let xs = plate_axis_offsets(width, nx);
    let zs = plate_axis_offsets(height, nz);
    let mut scatterers = Vec::with_capacity(nx * nz);
    for &ox in &xs {
        for &oz in &zs {
            scatterers.push(PointScatterer::new(
                [center[0] + ox, center[1], center[2] + oz],
                per_node,
            )?);
        }
    }
    Ok(scatterers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_sweep_spans_22_to_26_ghz() {
        let sweep = make_sweep(24.0e9, 4.0e9, 3201).unwrap();
        assert_eq!(sweep.len(), 3201);
        assert_eq!(sweep.lowest(), 22.0e9);
        assert_eq!(sweep.highest(), 26.0e9);
        // Midpoint of the odd-count sweep is the center frequency, exactly:
        // the 1.25 MHz step is a dyadic-friendly value.
        assert_eq!(sweep.frequencies()[1600], 24.0e9);
    }

    #[test]
    fn make_sweep_single_frequency_is_center() {
        let sweep = make_sweep(24.0e9, 0.0, 1).unwrap();
        assert_eq!(sweep.frequencies(), &[24.0e9]);
    }

    #[test]
    fn make_sweep_two_points_are_band_edges() {
        let sweep = make_sweep(24.0e9, 4.0e9, 2).unwrap();
        assert_eq!(sweep.frequencies(), &[22.0e9, 26.0e9]);
    }

    #[test]
    fn make_sweep_rejects_bad_parameters() {
        // Band extends below zero.
        assert!(make_sweep(1.0e9, 3.0e9, 5).is_err());
        // Band reaches exactly zero.
        assert!(make_sweep(1.0e9, 2.0e9, 5).is_err());
        // Zero bandwidth with several points would repeat a frequency.
        assert!(make_sweep(24.0e9, 0.0, 2).is_err());
        assert!(make_sweep(24.0e9, 4.0e9, 0).is_err());
        assert!(make_sweep(24.0e9, -1.0e9, 5).is_err());
        assert!(make_sweep(f64::NAN, 4.0e9, 5).is_err());
        assert!(make_sweep(-24.0e9, 4.0e9, 5).is_err());
    }

    #[test]
    fn sweep_spacing_is_uniform_to_float_precision() {
        let sweep = make_sweep(24.0e9, 4.0e9, 3201).unwrap();
        let step = sweep.span() / 3200.0;
        let mut worst = 0.0f64;
        for pair in sweep.frequencies().windows(2) {
            worst = worst.max(((pair[1] - pair[0] - step) / step).abs());
        }
        assert!(worst < 1e-6, "gap deviation {worst:.3e}");
        // Division rounding keeps real sweeps far inside the uniformity gate.
        assert!(worst <= UNIFORM_GAP_TOLERANCE);
        assert_eq!(sweep.uniform_step(), Some(step));
    }

    #[test]
    fn uniform_step_rejects_irregular_sweeps() {
        let sweep =
            FrequencySweep::new(vec![22.0e9, 23.0e9, 24.5e9, 26.0e9]).unwrap();
        assert_eq!(sweep.uniform_step(), None);
        let single = FrequencySweep::new(vec![24.0e9]).unwrap();
        assert_eq!(single.uniform_step(), None);
    }

    #[test]
    fn sweep_constructor_rejects_unsorted_or_non_positive() {
        assert!(FrequencySweep::new(vec![]).is_err());
        assert!(FrequencySweep::new(vec![2.0e9, 1.0e9]).is_err());
        assert!(FrequencySweep::new(vec![1.0e9, 1.0e9]).is_err());
        assert!(FrequencySweep::new(vec![0.0, 1.0e9]).is_err());
        assert!(FrequencySweep::new(vec![-1.0e9, 1.0e9]).is_err());
        assert!(FrequencySweep::new(vec![1.0e9, f64::NAN]).is_err());
    }

    #[test]
    fn wavenumber_reference_values() {
        // Definition inverts to unity at f = c/(2π).
        let unity = wavenumber(SPEED_OF_LIGHT / TWO_PI).unwrap();
        assert_relative_eq!(unity, 1.0, max_relative = 1e-14);
        // 2π·24e9/299792458, evaluated independently.
        assert_relative_eq!(
            wavenumber(24.0e9).unwrap(),
            503.002_805_268_403_63,
            max_relative = 1e-14
        );
    }

    #[test]
    fn wavenumber_is_linear_in_frequency() {
        // Halving the frequency exactly halves the wavenumber (scaling by a
        // power of two is exact in binary floating point).
        assert_eq!(2.0 * wavenumber(12.0e9).unwrap(), wavenumber(24.0e9).unwrap());
    }

    #[test]
    fn wavenumber_strictly_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f1: f64 = rng.random_range(1.0e6..50.0e9);
            let f2: f64 = f1 * rng.random_range(1.000001..3.0);
            assert!(wavenumber(f2).unwrap() > wavenumber(f1).unwrap());
        }
    }

    #[test]
    fn wavenumber_rejects_non_positive() {
        assert!(wavenumber(0.0).is_err());
        assert!(wavenumber(-1.0e9).is_err());
        assert!(wavenumber(f64::NAN).is_err());
    }

    #[test]
    fn plate_collapses_to_center_when_spacing_exceeds_it() {
        let plate = discretize_plate(
            [0.0, 0.0, 0.0],
            0.1,
            0.1,
            0.2,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert_eq!(plate.len(), 1);
        assert_eq!(plate[0].position, [0.0, 0.0, 0.0]);
        assert_eq!(plate[0].reflectivity, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn plate_three_by_three_layout() {
        let plate = discretize_plate(
            [0.0, 0.0, 0.0],
            0.1,
            0.1,
            0.05,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        assert_eq!(plate.len(), 9);
        for s in &plate {
            assert_eq!(s.reflectivity, Complex64::new(1.0 / 9.0, 0.0));
            assert_eq!(s.position[1], 0.0); // plate plane is y = center.y
            assert!([-0.05, 0.0, 0.05].contains(&s.position[0]));
            assert!([-0.05, 0.0, 0.05].contains(&s.position[2]));
        }
        // Outermost nodes sit exactly on the plate edges.
        let max_x = plate.iter().map(|s| s.position[0]).fold(f64::MIN, f64::max);
        assert_eq!(max_x, 0.05);
    }

    #[test]
    fn plate_reflectivity_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let refl = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let plate = discretize_plate(
                [
                    rng.random_range(-0.5..0.5),
                    rng.random_range(0.05..0.5),
                    rng.random_range(-0.5..0.5),
                ],
                rng.random_range(0.01..0.3),
                rng.random_range(0.01..0.3),
                rng.random_range(0.002..0.05),
                refl,
            )
            .unwrap();
            let sum: Complex64 = plate.iter().map(|s| s.reflectivity).sum();
            assert!(
                (sum - refl).norm() <= 1e-12 * refl.norm().max(1.0),
                "sum {sum} vs requested {refl}"
            );
        }
    }

    #[test]
    fn plate_is_mirror_symmetric_about_center() {
        let center = [0.013, 0.11, -0.007];
        let plate = discretize_plate(
            center,
            0.1,
            0.07,
            0.012,
            Complex64::new(0.8, -0.1),
        )
        .unwrap();
        for s in &plate {
            let mirrored = [
                2.0 * center[0] - s.position[0],
                s.position[1],
                2.0 * center[2] - s.position[2],
            ];
            let found = plate
                .iter()
                .any(|t| crate::vec3::dist(t.position, mirrored) <= 1e-12);
            assert!(found, "no mirror partner for {:?}", s.position);
        }
    }

    #[test]
    fn plate_pitch_never_exceeds_requested_spacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let width = rng.random_range(0.01..0.3);
            let height = rng.random_range(0.01..0.3);
            let spacing = rng.random_range(0.002..0.08);
            let plate = discretize_plate(
                [0.0, 0.1, 0.0],
                width,
                height,
                spacing,
                Complex64::new(1.0, 0.0),
            )
            .unwrap();
            let mut xs: Vec<f64> = plate.iter().map(|s| s.position[0]).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            for pair in xs.windows(2) {
                assert!(pair[1] - pair[0] <= spacing * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn default_plate_spacing_is_quarter_wavelength_at_band_top() {
        let sweep = make_sweep(24.0e9, 4.0e9, 3201).unwrap();
        assert_relative_eq!(
            default_plate_spacing(&sweep),
            2.882_619_788_461_538_5e-3,
            max_relative = 1e-12
        );
    }

    #[test]
    fn trajectory_validation_and_extent() {
        assert!(Trajectory::new(vec![]).is_err());
        assert!(Trajectory::new(vec![[0.0, f64::NAN, 0.0]]).is_err());
        let traj =
            Trajectory::new(vec![[-0.06, 0.0, 0.0], [0.01, 0.0, 0.0], [0.06, 0.0, 0.0]]).unwrap();
        assert_eq!(traj.len(), 3);
        assert_relative_eq!(traj.x_extent(), 0.12, max_relative = 1e-15);
    }

    #[test]
    fn dataset_rejects_mismatched_or_non_finite_samples() {
        let sweep = make_sweep(24.0e9, 4.0e9, 3).unwrap();
        let traj = Trajectory::new(vec![[0.0, 0.0, 0.0], [0.01, 0.0, 0.0]]).unwrap();
        let wrong = Array2::zeros((2, 2));
        assert!(AcquisitionDataset::new(sweep.clone(), traj.clone(), wrong).is_err());
        let mut bad = Array2::zeros((3, 2));
        bad[(1, 1)] = Complex64::new(f64::INFINITY, 0.0);
        assert!(AcquisitionDataset::new(sweep.clone(), traj.clone(), bad).is_err());
        let ok = Array2::zeros((3, 2));
        let ds = AcquisitionDataset::new(sweep, traj, ok).unwrap();
        assert_eq!((ds.n_freqs(), ds.n_positions()), (3, 2));
    }

    #[test]
    fn grid_rejects_bad_axes_and_parameters() {
        let ok = ImageGrid::new(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            (0.1, 0.1),
            (4, 4),
        );
        assert!(ok.is_ok());
        // Non-unit axis.
        assert!(ImageGrid::new(
            [0.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            (0.1, 0.1),
            (4, 4)
        )
        .is_err());
        // Non-orthogonal axes.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(ImageGrid::new(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [s, s, 0.0],
            (0.1, 0.1),
            (4, 4)
        )
        .is_err());
        assert!(
            ImageGrid::new([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], (0.0, 0.1), (4, 4))
                .is_err()
        );
        assert!(
            ImageGrid::new([0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], (0.1, 0.1), (0, 4))
                .is_err()
        );
    }

    #[test]
    fn grid_pixel_positions_span_extents_inclusive() {
        let grid = ImageGrid::axis_aligned_xy(-0.15, 0.15, 0.02, 0.20, 256, 256).unwrap();
        assert_eq!(grid.pixel_position(0, 0), [-0.15, 0.02, 0.0]);
        let far = grid.pixel_position(255, 255);
        assert_relative_eq!(far[0], 0.15, max_relative = 1e-12);
        assert_relative_eq!(far[1], 0.20, max_relative = 1e-12);
        assert_eq!(far[2], 0.0);
        assert_relative_eq!(grid.step1(), 0.3 / 255.0, max_relative = 1e-15);
    }

    #[test]
    fn single_pixel_grid_degenerates_to_origin() {
        let grid = ImageGrid::new(
            [0.01, 0.1, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            (0.1, 0.1),
            (1, 1),
        )
        .unwrap();
        assert_eq!(grid.step1(), 0.0);
        assert_eq!(grid.pixel_position(0, 0), [0.01, 0.1, 0.0]);
    }

    #[test]
    fn image_dimensions_must_match_grid() {
        let grid = ImageGrid::axis_aligned_xy(0.0, 0.1, 0.0, 0.1, 4, 5).unwrap();
        assert!(ReflectivityImage::new(grid.clone(), Array2::zeros((4, 4))).is_err());
        assert!(ReflectivityImage::new(grid, Array2::zeros((4, 5))).is_ok());
    }

    #[test]
    fn scatterer_rejects_non_finite() {
        assert!(PointScatterer::new([0.0, f64::INFINITY, 0.0], Complex64::new(1.0, 0.0)).is_err());
        assert!(PointScatterer::new([0.0; 3], Complex64::new(f64::NAN, 0.0)).is_err());
    }
}
