//! Command-line orchestration: `simulate`, `image`, `psf`, `metrics`.
//!
//! Each subcommand is a thin pipeline over the library modules; all
//! parallelism stays inside [`crate::imager`] / [`crate::forward`], sized
//! here via `--threads`. Exit codes: 0 success, 2 config/input error,
//! 3 dataset mismatch, 4 numerical/geometry failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::calib::{calibrate_phase, estimate_reference_delay, subtract_background, CalibError};
use crate::config::{CalibrationConfig, ConfigError, RunConfig};
use crate::forward::{acquire, ForwardError};
use crate::imager::{
    backproject_with, detect_peak, psf_metrics_from_image, to_db, ImagerError, Taper,
};
use crate::io::{
    read_dataset, write_dataset, write_image_db_csv, write_image_pgm, write_json_report,
    write_trajectory_csv, DetectionReportDoc, IoError, MetricsReportDoc, PsfReportDoc,
};
use crate::radmetrics::{
    directivity_from_cuts, efficiency, fractional_bandwidth, ftbr, PatternCut, RadMetricsError,
};
use crate::scene::{AcquisitionDataset, PointScatterer, SPEED_OF_LIGHT};

/// Top-level CLI error; [`CliError::exit_code`] maps it to the process
/// exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    RadMetrics(#[from] RadMetricsError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    #[error(transparent)]
    Calib(#[from] CalibError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Imager(#[from] ImagerError),
}

impl CliError {
    /// 2 = config/input error, 3 = data mismatch, 4 = numerical/geometry
    /// failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::RadMetrics(_)
            | CliError::Usage(_) | CliError::Scene(_) => 2,
            CliError::Calib(CalibError::GeometryMismatch { .. }) => 3,
            CliError::Calib(_) => 4,
            CliError::Forward(ForwardError::BadNoiseSnr(_)) => 2,
            CliError::Forward(_) => 4,
            CliError::Imager(ImagerError::BadThreshold(_)) => 2,
            CliError::Imager(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "armsar",
    version,
    about = "Arm-swing SAR imaging: simulate stepped-frequency acquisitions and focus them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the measured and target-free background datasets plus
    /// the trajectory for the configured scene.
    Simulate(SimulateArgs),
    /// Focus a dataset: optional background subtraction, phase
    /// calibration, backprojection, dB image, detection report.
    Image(ImageArgs),
    /// Simulate a single point target on the configured geometry and
    /// report its point-spread metrics (noise and system delay are not
    /// applied).
    Psf(PsfArgs),
    /// Radiation metrics from scalar figures and/or pattern-cut CSVs.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Run configuration (JSON); built-in defaults if omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the heavy kernels (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Measured dataset header; defaults to <out>/measured.dataset.json.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Background dataset header to subtract before calibration.
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Override the config detection threshold (dB < 0).
    #[arg(long, allow_negative_numbers = true)]
    pub threshold_db: Option<f64>,
    /// Amplitude taper applied before backprojection.
    #[arg(long, value_enum, default_value_t = TaperArg::None)]
    pub taper: TaperArg,
    /// dB level mapped to black in the PGM export.
    #[arg(long, default_value_t = -40.0, allow_negative_numbers = true)]
    pub display_floor_db: f64,
}

#[derive(Debug, Args)]
pub struct PsfArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Amplitude taper applied before backprojection.
    #[arg(long, value_enum, default_value_t = TaperArg::None)]
    pub taper: TaperArg,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Measured gain, dBi (with --directivity-db: radiation efficiency).
    #[arg(long, requires = "directivity_db", allow_negative_numbers = true)]
    pub gain_dbi: Option<f64>,
    /// Directivity, dB.
    #[arg(long, requires = "gain_dbi", allow_negative_numbers = true)]
    pub directivity_db: Option<f64>,
    /// Pattern-cut CSV (angle_deg, level_db): front-to-back ratio.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// E-plane cut CSV (with --pattern-h: two-cut directivity estimate).
    #[arg(long, requires = "pattern_h")]
    pub pattern_e: Option<PathBuf>,
    /// H-plane cut CSV.
    #[arg(long, requires = "pattern_e")]
    pub pattern_h: Option<PathBuf>,
    /// Matched band lower edge, Hz (with --f-high: fractional bandwidth).
    #[arg(long, requires = "f_high")]
    pub f_low: Option<f64>,
    /// Matched band upper edge, Hz.
    #[arg(long, requires = "f_low")]
    pub f_high: Option<f64>,
    /// Also write the report to <dir>/metrics.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaperArg {
    None,
    Hann,
}

impl From<TaperArg> for Taper {
    fn from(t: TaperArg) -> Self {
        match t {
            TaperArg::None => Taper::None,
            TaperArg::Hann => Taper::Hann,
        }
    }
}

/// Runs a parsed command; the binary maps the error to an exit code.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Image(args) => cmd_image(&args),
        Command::Psf(args) => cmd_psf(&args),
        Command::Metrics(args) => cmd_metrics(&args),
    }
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Runs `op` on a rayon pool of the requested size (0 or absent = rayon's
/// default). Kernels are bit-reproducible across worker counts, so this
/// only affects wall-clock time.
fn with_pool<R: Send>(
    threads: Option<usize>,
    op: impl FnOnce() -> R + Send,
) -> Result<R, CliError> {
    match threads {
        None | Some(0) => Ok(op()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(op))
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let run = cfg.resolve()?;

    let (measured, background) = with_pool(args.common.threads, || {
        let measured = acquire(
            &run.scatterers,
            &run.trajectory,
            &run.sweep,
            &run.forward_measured,
        )?;
        let background = acquire(
            &run.background_scatterers,
            &run.trajectory,
            &run.sweep,
            &run.forward_background,
        )?;
        Ok::<_, ForwardError>((measured, background))
    })??;

    // A nonzero system delay corrupts both acquisitions the same way, as a
    // shared cable would; negating the delay injects it.
    let (measured, background) = if run.system_delay_s != 0.0 {
        (
            calibrate_phase(&measured, -run.system_delay_s)?,
            calibrate_phase(&background, -run.system_delay_s)?,
        )
    } else {
        (measured, background)
    };

    let out = &args.common.out;
    let measured_path = write_dataset(
        out,
        "measured",
        &measured,
        run.seed,
        "simulated: measured scene acquisition",
    )?;
    let background_path = write_dataset(
        out,
        "background",
        &background,
        run.seed,
        "simulated: target-free background acquisition",
    )?;
    let traj_path = out.join("trajectory.csv");
    write_trajectory_csv(&traj_path, &run.trajectory)?;

    let (m, n) = (measured.n_freqs(), measured.n_positions());
    println!("wrote {} ({m} x {n} samples)", measured_path.display());
    println!("wrote {} ({m} x {n} samples)", background_path.display());
    println!("wrote {} ({n} positions)", traj_path.display());
    Ok(())
}

/// Applies the configured phase calibration to a dataset.
fn apply_calibration(
    data: &AcquisitionDataset,
    calibration: &CalibrationConfig,
) -> Result<AcquisitionDataset, CliError> {
    match calibration {
        CalibrationConfig::None => Ok(data.clone()),
        CalibrationConfig::Delay { delay_s } => Ok(calibrate_phase(data, *delay_s)?),
        CalibrationConfig::Estimate { known_range_m } => {
            let delay = estimate_reference_delay(data, *known_range_m)?;
            println!("estimated reference delay: {delay:e} s");
            Ok(calibrate_phase(data, delay)?)
        }
    }
}

fn cmd_image(args: &ImageArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let run = cfg.resolve()?;
    let threshold_db = args.threshold_db.unwrap_or(run.threshold_db);

    let data_path = args
        .data
        .clone()
        .unwrap_or_else(|| args.common.out.join("measured.dataset.json"));
    let (mut data, _) = read_dataset(&data_path)?;
    if let Some(background_path) = &args.background {
        let (background, _) = read_dataset(background_path)?;
        data = subtract_background(&data, &background)?;
    }
    data = apply_calibration(&data, &run.calibration)?;

    let image = with_pool(args.common.threads, || {
        backproject_with(&data, &run.grid, args.taper.into())
    })??;
    let db = to_db(&image)?;
    let report = detect_peak(&image, threshold_db)?;

    let out = &args.common.out;
    std::fs::create_dir_all(out).map_err(|source| {
        CliError::Io(IoError::Io {
            path: out.clone(),
            source,
        })
    })?;
    let csv_path = out.join("image_db.csv");
    let pgm_path = out.join("image.pgm");
    let report_path = out.join("report.json");
    write_image_db_csv(&csv_path, &db)?;
    write_image_pgm(&pgm_path, &db, args.display_floor_db)?;
    write_json_report(&report_path, &DetectionReportDoc::from(&report))?;

    let p = report.peak_position;
    println!(
        "peak: ({:.6}, {:.6}, {:.6}) m at pixel ({}, {})",
        p[0], p[1], p[2], report.peak_pixel.0, report.peak_pixel.1
    );
    println!(
        "extent x: {:.6} m, extent axis2: {:.6} m (threshold {} dB)",
        report.extent_x, report.extent_axis2, report.threshold_db
    );
    println!(
        "wrote {}, {}, {}",
        csv_path.display(),
        pgm_path.display(),
        report_path.display()
    );
    Ok(())
}

fn cmd_psf(args: &PsfArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let run = cfg.resolve()?;

    // One unit point at boresight of the configured swing; clean forward
    // model (no noise, no system delay) so the metrics describe the
    // imaging chain itself.
    let target = PointScatterer::new(
        [0.0, cfg.swing.standoff_m, 0.0],
        num_complex::Complex64::new(1.0, 0.0),
    )?;
    let mut forward = run.forward_measured.clone();
    forward.noise_snr_db = None;

    let metrics = with_pool(args.common.threads, || {
        let data = acquire(&[target], &run.trajectory, &run.sweep, &forward)?;
        let image = backproject_with(&data, &run.grid, args.taper.into())?;
        Ok::<_, CliError>(psf_metrics_from_image(&image)?)
    })??;

    let theory_range = SPEED_OF_LIGHT / (2.0 * cfg.sweep.bandwidth_hz);
    let wavelength_c = SPEED_OF_LIGHT / cfg.sweep.center_hz;
    let theory_crossrange =
        wavelength_c * cfg.swing.standoff_m / (2.0 * cfg.swing.aperture_length_m);

    let out = &args.common.out;
    std::fs::create_dir_all(out).map_err(|source| {
        CliError::Io(IoError::Io {
            path: out.clone(),
            source,
        })
    })?;
    let report_path = out.join("psf.json");
    write_json_report(
        &report_path,
        &PsfReportDoc::new(&metrics, theory_range, theory_crossrange),
    )?;

    println!(
        "range fwhm: {:.6} m (c/2B = {:.6} m)",
        metrics.range_fwhm, theory_range
    );
    println!(
        "cross-range fwhm: {:.6} m (lambda*R/2L = {:.6} m)",
        metrics.crossrange_fwhm, theory_crossrange
    );
    println!("peak sidelobe: {:.2} dB", metrics.peak_sidelobe_db);
    println!("wrote {}", report_path.display());
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> Result<(), CliError> {
    let mut doc = MetricsReportDoc::default();

    if let (Some(gain), Some(directivity)) = (args.gain_dbi, args.directivity_db) {
        let eta = efficiency(gain, directivity)?;
        println!("efficiency: {eta:.2} %");
        doc.efficiency_percent = Some(eta);
    }
    if let Some(path) = &args.pattern {
        let file = std::fs::File::open(path).map_err(|source| {
            CliError::Io(IoError::Io {
                path: path.clone(),
                source,
            })
        })?;
        let cut = PatternCut::from_csv(file)?;
        let value = ftbr(&cut)?;
        println!("front-to-back ratio: {value:.2} dB");
        doc.ftbr_db = Some(value);
    }
    if let (Some(path_e), Some(path_h)) = (&args.pattern_e, &args.pattern_h) {
        let open = |path: &PathBuf| {
            std::fs::File::open(path).map_err(|source| {
                CliError::Io(IoError::Io {
                    path: path.clone(),
                    source,
                })
            })
        };
        let cut_e = PatternCut::from_csv(open(path_e)?)?;
        let cut_h = PatternCut::from_csv(open(path_h)?)?;
        let value = directivity_from_cuts(&cut_e, &cut_h)?;
        println!("directivity estimate: {value:.2} dB");
        doc.directivity_db = Some(value);
    }
    if let (Some(f_low), Some(f_high)) = (args.f_low, args.f_high) {
        let value = fractional_bandwidth(f_low, f_high)?;
        println!("fractional bandwidth: {value:.2} %");
        doc.fractional_bandwidth_percent = Some(value);
    }

    if doc.efficiency_percent.is_none()
        && doc.ftbr_db.is_none()
        && doc.directivity_db.is_none()
        && doc.fractional_bandwidth_percent.is_none()
    {
        return Err(CliError::Usage(
            "nothing to compute: pass --gain-dbi/--directivity-db, --pattern, \
             --pattern-e/--pattern-h, or --f-low/--f-high"
                .to_string(),
        ));
    }

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|source| {
            CliError::Io(IoError::Io {
                path: dir.clone(),
                source,
            })
        })?;
        let path = dir.join("metrics.json");
        write_json_report(&path, &doc)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
