//! Run configuration: a single JSON document describing a full
//! simulate-then-image run.
//!
//! Defaults mirror the reference experiment: a 22–26 GHz sweep of 3201
//! frequencies, a 12 cm / 61-position arm swing at 10 cm standoff, a
//! 10×10 cm plate target, and a 256×256 grid over x ∈ [−0.15, 0.15] m,
//! y ∈ [0.02, 0.20] m. Every field has a default, so a partial document
//! (or `{}`) is a valid config; unknown fields are rejected to catch
//! typos.
//!
//! One top-level seed drives all randomness. Sub-generators use fixed
//! tweaks of it so their streams are independent but reproducible:
//! trajectory jitter/drift uses `seed`, measured-dataset noise `seed ^ 1`,
//! background noise `seed ^ 2`, clutter generation `seed ^ 3`.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{AmplitudeModel, ForwardConfig};
use crate::motion::{arm_swing, crop_aperture, MotionError, SwingSpec};
use crate::scene::{
    default_plate_spacing, discretize_plate, make_sweep, FrequencySweep, ImageGrid,
    PointScatterer, SceneError, Trajectory,
};

/// Configuration errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {what}")]
    BadValue { what: String },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Motion(#[from] MotionError),
}

fn bad(what: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { what: what.into() }
}

/// Stepped-frequency sweep parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub count: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            center_hz: 24.0e9,
            bandwidth_hz: 4.0e9,
            count: 3201,
        }
    }
}

/// Arm-swing trajectory parameters (see [`SwingSpec`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwingConfig {
    pub aperture_length_m: f64,
    pub point_count: usize,
    pub standoff_m: f64,
    pub jitter_std_m: f64,
    pub drift_rate_m_per_m: f64,
}

impl Default for SwingConfig {
    fn default() -> Self {
        let spec = SwingSpec::default();
        Self {
            aperture_length_m: spec.aperture_length,
            point_count: spec.point_count,
            standoff_m: spec.standoff,
            jitter_std_m: spec.jitter_std,
            drift_rate_m_per_m: spec.drift_rate,
        }
    }
}

/// A rectangular plate target, discretized into point scatterers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateConfig {
    pub center_m: [f64; 3],
    pub width_m: f64,
    pub height_m: f64,
    /// Node spacing; defaults to λ_min/4 for the configured sweep.
    pub spacing_m: Option<f64>,
    /// Total plate reflectivity as (re, im), split evenly across nodes.
    pub reflectivity: [f64; 2],
}

impl Default for PlateConfig {
    fn default() -> Self {
        Self {
            center_m: [0.0, 0.10, 0.0],
            width_m: 0.10,
            height_m: 0.10,
            spacing_m: None,
            reflectivity: [1.0, 0.0],
        }
    }
}

/// A single point scatterer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub position_m: [f64; 3],
    pub reflectivity: [f64; 2],
}

/// Random clutter: `count` scatterers uniform in an axis-aligned box with
/// circular-complex-normal reflectivities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterConfig {
    pub count: usize,
    pub region_min_m: [f64; 3],
    pub region_max_m: [f64; 3],
    pub reflectivity_std: f64,
}

/// Scene description: plates plus point scatterers plus optional clutter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub plates: Vec<PlateConfig>,
    pub points: Vec<PointConfig>,
    pub clutter: Option<ClutterConfig>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            plates: vec![PlateConfig::default()],
            points: Vec::new(),
            clutter: None,
        }
    }
}

/// Forward-model settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardSection {
    /// "phase_only" or "spherical_spreading".
    pub amplitude_model: AmplitudeModelConfig,
    /// Complex white noise level, dB relative to mean sample power;
    /// omit for noise-free data.
    pub noise_snr_db: Option<f64>,
    /// Systematic round-trip delay injected into synthesized data,
    /// seconds — what phase calibration is meant to remove.
    pub system_delay_s: f64,
}

impl Default for ForwardSection {
    fn default() -> Self {
        Self {
            amplitude_model: AmplitudeModelConfig::PhaseOnly,
            noise_snr_db: None,
            system_delay_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeModelConfig {
    PhaseOnly,
    SphericalSpreading,
}

impl From<AmplitudeModelConfig> for AmplitudeModel {
    fn from(m: AmplitudeModelConfig) -> Self {
        match m {
            AmplitudeModelConfig::PhaseOnly => AmplitudeModel::PhaseOnly,
            AmplitudeModelConfig::SphericalSpreading => AmplitudeModel::SphericalSpreading,
        }
    }
}

/// How `image` compensates systematic phase before backprojection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum CalibrationConfig {
    /// Use the data as-is.
    None,
    /// Remove a known delay (seconds).
    Delay { delay_s: f64 },
    /// Estimate the delay from a reference reflector at a known range.
    Estimate { known_range_m: f64 },
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self::None
    }
}

/// Axis-aligned image grid on the z = 0 plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub y_min_m: f64,
    pub y_max_m: f64,
    pub pixels: [usize; 2],
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min_m: -0.15,
            x_max_m: 0.15,
            y_min_m: 0.02,
            y_max_m: 0.20,
            pixels: [256, 256],
        }
    }
}

/// The complete run description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub sweep: SweepConfig,
    pub swing: SwingConfig,
    /// If set, crop the trajectory to its longest sub-window with x-extent
    /// ≤ this value before acquisition.
    pub crop_max_extent_m: Option<f64>,
    pub scene: SceneConfig,
    pub forward: ForwardSection,
    pub calibration: CalibrationConfig,
    pub grid: GridConfig,
    /// Detection threshold for the report, dB (< 0).
    pub threshold_db: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            sweep: SweepConfig::default(),
            swing: SwingConfig::default(),
            crop_max_extent_m: None,
            scene: SceneConfig::default(),
            forward: ForwardSection::default(),
            calibration: CalibrationConfig::default(),
            grid: GridConfig::default(),
            threshold_db: -6.0,
        }
    }
}

/// Everything a run needs, resolved from a [`RunConfig`] into domain
/// objects (clutter drawn, plates discretized, seeds derived).
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub seed: u64,
    pub sweep: FrequencySweep,
    pub trajectory: Trajectory,
    /// Full measured scene: plates, points, and clutter.
    pub scatterers: Vec<PointScatterer>,
    /// The stationary environment only (clutter, no targets) — what a
    /// target-free background acquisition sees, so that background
    /// subtraction cancels it coherently.
    pub background_scatterers: Vec<PointScatterer>,
    pub grid: ImageGrid,
    /// Forward config for the measured (scene) acquisition.
    pub forward_measured: ForwardConfig,
    /// Forward config for the target-free background acquisition.
    pub forward_background: ForwardConfig,
    pub system_delay_s: f64,
    pub calibration: CalibrationConfig,
    pub threshold_db: f64,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Validates and resolves the document into domain objects.
    pub fn resolve(&self) -> Result<ResolvedRun, ConfigError> {
        let sweep = make_sweep(
            self.sweep.center_hz,
            self.sweep.bandwidth_hz,
            self.sweep.count,
        )?;

        let spec = SwingSpec {
            aperture_length: self.swing.aperture_length_m,
            point_count: self.swing.point_count,
            standoff: self.swing.standoff_m,
            jitter_std: self.swing.jitter_std_m,
            drift_rate: self.swing.drift_rate_m_per_m,
            seed: self.seed,
        };
        let mut trajectory = arm_swing(&spec)?;
        if let Some(max_extent) = self.crop_max_extent_m {
            trajectory = crop_aperture(&trajectory, max_extent)?;
        }

        let mut scatterers = Vec::new();
        for plate in &self.scene.plates {
            let spacing = match plate.spacing_m {
                Some(s) => s,
                None => default_plate_spacing(&sweep),
            };
            scatterers.extend(discretize_plate(
                plate.center_m,
                plate.width_m,
                plate.height_m,
                spacing,
                Complex64::new(plate.reflectivity[0], plate.reflectivity[1]),
            )?);
        }
        for point in &self.scene.points {
            scatterers.push(PointScatterer::new(
                point.position_m,
                Complex64::new(point.reflectivity[0], point.reflectivity[1]),
            )?);
        }
        let mut background_scatterers = Vec::new();
        if let Some(clutter) = &self.scene.clutter {
            let drawn = draw_clutter(clutter, self.seed ^ 3)?;
            scatterers.extend(drawn.iter().cloned());
            background_scatterers = drawn;
        }

        let grid = ImageGrid::axis_aligned_xy(
            self.grid.x_min_m,
            self.grid.x_max_m,
            self.grid.y_min_m,
            self.grid.y_max_m,
            self.grid.pixels[0],
            self.grid.pixels[1],
        )?;

        if !self.threshold_db.is_finite() || self.threshold_db >= 0.0 {
            return Err(bad(format!(
                "threshold_db must be negative (got {})",
                self.threshold_db
            )));
        }
        if !self.forward.system_delay_s.is_finite() {
            return Err(bad("forward.system_delay_s must be finite"));
        }

        let forward = |noise_seed: u64| ForwardConfig {
            amplitude_model: self.forward.amplitude_model.into(),
            noise_snr_db: self.forward.noise_snr_db,
            seed: noise_seed,
        };

        Ok(ResolvedRun {
            seed: self.seed,
            sweep,
            trajectory,
            scatterers,
            background_scatterers,
            grid,
            forward_measured: forward(self.seed ^ 1),
            forward_background: forward(self.seed ^ 2),
            system_delay_s: self.forward.system_delay_s,
            calibration: self.calibration.clone(),
            threshold_db: self.threshold_db,
        })
    }
}

/// Draws clutter scatterers: per scatterer, positions uniform per axis in
/// the box (x, y, z order) then a complex normal reflectivity (re, im).
fn draw_clutter(cfg: &ClutterConfig, seed: u64) -> Result<Vec<PointScatterer>, ConfigError> {
    for axis in 0..3 {
        let (lo, hi) = (cfg.region_min_m[axis], cfg.region_max_m[axis]);
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(bad(format!(
                "clutter region axis {axis}: need finite min ≤ max (got {lo}..{hi})"
            )));
        }
    }
    if !(cfg.reflectivity_std.is_finite() && cfg.reflectivity_std >= 0.0) {
        return Err(bad(format!(
            "clutter reflectivity_std must be ≥ 0 (got {})",
            cfg.reflectivity_std
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cfg.count);
    for _ in 0..cfg.count {
        let mut position = [0.0; 3];
        for (axis, p) in position.iter_mut().enumerate() {
            let (lo, hi) = (cfg.region_min_m[axis], cfg.region_max_m[axis]);
            *p = if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            };
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        out.push(PointScatterer::new(
            position,
            Complex64::new(cfg.reflectivity_std * re, cfg.reflectivity_std * im),
        )?);
    }
    Ok(out)
}
