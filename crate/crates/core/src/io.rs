//! On-disk formats: acquisition datasets, trajectories, images, reports.
//!
//! A dataset is stored as two files so the metadata stays inspectable while
//! the bulk samples stay compact:
//!
//! * `<stem>.dataset.json` — header with the frequency list, trajectory,
//!   seed, and a free-text provenance note (explicit arrays, no
//!   timestamps, so identical runs produce identical bytes);
//! * `<stem>.dataset.bin` — the M×N complex matrix as raw little-endian
//!   f64 (re, im) pairs, frequency-major: sample (m, n) lives at byte
//!   offset (m·N + n)·16.
//!
//! Numbers in JSON and CSV are written in shortest round-trip form, so a
//! write → read cycle reproduces every value bit-exactly.
//!
//! Trajectories are plain CSV (`n, x, y, z` in meters) for interoperability
//! with external tracker logs. Images export as a CSV matrix of dB values
//! plus an 8-bit binary PGM for quick viewing; detection/PSF/metrics
//! reports are small JSON documents.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imager::{DetectionReport, PsfMetrics};
use crate::scene::{AcquisitionDataset, FrequencySweep, SceneError, Trajectory};

/// `format` field value identifying a dataset header.
pub const DATASET_FORMAT: &str = "sfcw-dataset";
/// Dataset header version this build reads and writes.
pub const DATASET_VERSION: u32 = 1;
/// `sample_layout` field value describing the binary samples file.
pub const SAMPLE_LAYOUT: &str = "complex64 little-endian (f64 re, f64 im), frequency-major";

/// File I/O and format errors.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: unsupported header ({what})")]
    BadHeader { path: PathBuf, what: String },
    #[error("{path}: expected {expected} bytes of samples, found {got}")]
    SampleSizeMismatch {
        path: PathBuf,
        expected: u64,
        got: u64,
    },
    #[error("{path}: record {record}: {reason}")]
    BadRecord {
        path: PathBuf,
        record: usize,
        reason: String,
    },
    #[error("PGM display floor must be a finite negative dB value (got {0})")]
    BadDisplayFloor(f64),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Dataset header document. Fields serialize in declaration order, so the
/// emitted JSON is stable across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    /// RNG seed the dataset was generated with (0 for external data).
    pub seed: u64,
    /// Free-text note on where the samples came from.
    pub provenance: String,
    /// The M stepped frequencies, Hz.
    pub frequencies_hz: Vec<f64>,
    /// The N antenna positions, meters.
    pub trajectory_m: Vec<[f64; 3]>,
    /// Name of the binary samples file, relative to this header.
    pub samples_file: String,
    pub sample_layout: String,
}

/// Writes `<stem>.dataset.json` and `<stem>.dataset.bin` under `dir`;
/// returns the header path.
pub fn write_dataset(
    dir: &Path,
    stem: &str,
    data: &AcquisitionDataset,
    seed: u64,
    provenance: &str,
) -> Result<PathBuf, IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let header_path = dir.join(format!("{stem}.dataset.json"));
    let bin_name = format!("{stem}.dataset.bin");
    let bin_path = dir.join(&bin_name);

    let header = DatasetHeader {
        format: DATASET_FORMAT.to_string(),
        version: DATASET_VERSION,
        seed,
        provenance: provenance.to_string(),
        frequencies_hz: data.sweep().frequencies().to_vec(),
        trajectory_m: data.trajectory().positions().to_vec(),
        samples_file: bin_name,
        sample_layout: SAMPLE_LAYOUT.to_string(),
    };
    let json = serde_json::to_vec_pretty(&header).map_err(|source| IoError::Json {
        path: header_path.clone(),
        source,
    })?;
    fs::write(&header_path, json).map_err(io_err(&header_path))?;

    let file = fs::File::create(&bin_path).map_err(io_err(&bin_path))?;
    let mut out = BufWriter::new(file);
    let (m, n) = (data.n_freqs(), data.n_positions());
    for mi in 0..m {
        for ni in 0..n {
            let s = data.samples()[(mi, ni)];
            out.write_all(&s.re.to_le_bytes()).map_err(io_err(&bin_path))?;
            out.write_all(&s.im.to_le_bytes()).map_err(io_err(&bin_path))?;
        }
    }
    out.flush().map_err(io_err(&bin_path))?;
    Ok(header_path)
}

/// Reads a dataset back from its header path. Returns the dataset plus the
/// header (for the seed and provenance).
pub fn read_dataset(header_path: &Path) -> Result<(AcquisitionDataset, DatasetHeader), IoError> {
    let text = fs::read(header_path).map_err(io_err(header_path))?;
    let header: DatasetHeader =
        serde_json::from_slice(&text).map_err(|source| IoError::Json {
            path: header_path.to_path_buf(),
            source,
        })?;
    if header.format != DATASET_FORMAT {
        return Err(IoError::BadHeader {
            path: header_path.to_path_buf(),
            what: format!("format {:?}", header.format),
        });
    }
    if header.version != DATASET_VERSION {
        return Err(IoError::BadHeader {
            path: header_path.to_path_buf(),
            what: format!("version {}", header.version),
        });
    }
    if header.sample_layout != SAMPLE_LAYOUT {
        return Err(IoError::BadHeader {
            path: header_path.to_path_buf(),
            what: format!("sample layout {:?}", header.sample_layout),
        });
    }

    let sweep = FrequencySweep::new(header.frequencies_hz.clone())?;
    let trajectory = Trajectory::new(header.trajectory_m.clone())?;
    let (m, n) = (sweep.len(), trajectory.len());

    let bin_path = header_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.samples_file);
    let bytes = fs::read(&bin_path).map_err(io_err(&bin_path))?;
    let expected = (m * n * 16) as u64;
    if bytes.len() as u64 != expected {
        return Err(IoError::SampleSizeMismatch {
            path: bin_path,
            expected,
            got: bytes.len() as u64,
        });
    }
    let samples = Array2::from_shape_fn((m, n), |(mi, ni)| {
        let at = (mi * n + ni) * 16;
        let re = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[at + 8..at + 16].try_into().unwrap());
        Complex64::new(re, im)
    });
    Ok((AcquisitionDataset::new(sweep, trajectory, samples)?, header))
}

/// Writes a trajectory as `n, x, y, z` CSV (meters).
pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let wrap = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(["n", "x", "y", "z"]).map_err(wrap)?;
    for (n, p) in trajectory.positions().iter().enumerate() {
        w.serialize((n, p[0], p[1], p[2])).map_err(wrap)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Reads a trajectory written by [`write_trajectory_csv`] (the header row
/// is optional; the `n` column is positional and ignored).
pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let mut positions = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|source| IoError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if record.len() != 4 {
            return Err(IoError::BadRecord {
                path: path.to_path_buf(),
                record: idx,
                reason: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let mut fields = [0.0; 4];
        let mut parse_failed = false;
        for (k, f) in record.iter().enumerate() {
            match f.parse::<f64>() {
                Ok(v) => fields[k] = v,
                Err(_) => {
                    parse_failed = true;
                    break;
                }
            }
        }
        if parse_failed {
            if idx == 0 {
                continue; // optional header row
            }
            return Err(IoError::BadRecord {
                path: path.to_path_buf(),
                record: idx,
                reason: "non-numeric field".to_string(),
            });
        }
        positions.push([fields[1], fields[2], fields[3]]);
    }
    Ok(Trajectory::new(positions)?)
}

/// Writes a dB image as a CSV matrix: row i1 (axis 1), column i2 (axis 2).
pub fn write_image_db_csv(path: &Path, db: &Array2<f64>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path).map_err(|source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    for row in db.rows() {
        w.serialize(row.iter().collect::<Vec<_>>())
            .map_err(|source| IoError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Writes a dB image as an 8-bit binary PGM (P5). Axis 1 runs across the
/// image (width P1) and axis 2 up it (height P2, top row = highest i2, the
/// far range edge on the conventional grid). Levels map linearly from
/// [`display_floor_db`, 0] dB onto [0, 255], clamped below the floor.
pub fn write_image_pgm(
    path: &Path,
    db: &Array2<f64>,
    display_floor_db: f64,
) -> Result<(), IoError> {
    if !display_floor_db.is_finite() || display_floor_db >= 0.0 {
        return Err(IoError::BadDisplayFloor(display_floor_db));
    }
    let (p1, p2) = db.dim();
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write!(out, "P5\n{p1} {p2}\n255\n").map_err(io_err(path))?;
    let mut row = Vec::with_capacity(p1);
    for i2 in (0..p2).rev() {
        row.clear();
        for i1 in 0..p1 {
            let level = (db[(i1, i2)] - display_floor_db) / -display_floor_db;
            row.push((level.clamp(0.0, 1.0) * 255.0).round() as u8);
        }
        out.write_all(&row).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;
    Ok(())
}

/// Detection report as written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReportDoc {
    pub peak_position_m: [f64; 3],
    pub peak_pixel: [usize; 2],
    pub peak_magnitude_db: f64,
    pub extent_x_m: f64,
    pub extent_axis2_m: f64,
    pub threshold_db: f64,
}

impl From<&DetectionReport> for DetectionReportDoc {
    fn from(r: &DetectionReport) -> Self {
        Self {
            peak_position_m: r.peak_position,
            peak_pixel: [r.peak_pixel.0, r.peak_pixel.1],
            peak_magnitude_db: r.peak_magnitude_db,
            extent_x_m: r.extent_x,
            extent_axis2_m: r.extent_axis2,
            threshold_db: r.threshold_db,
        }
    }
}

/// PSF report as written to disk: measured widths plus the closed-form
/// theory values for the configured geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsfReportDoc {
    pub range_fwhm_m: f64,
    pub crossrange_fwhm_m: f64,
    pub peak_sidelobe_db: f64,
    /// c/(2B) for the configured bandwidth.
    pub theory_range_m: f64,
    /// λc·R/(2L) for the configured geometry.
    pub theory_crossrange_m: f64,
}

impl PsfReportDoc {
    pub fn new(metrics: &PsfMetrics, theory_range_m: f64, theory_crossrange_m: f64) -> Self {
        Self {
            range_fwhm_m: metrics.range_fwhm,
            crossrange_fwhm_m: metrics.crossrange_fwhm,
            peak_sidelobe_db: metrics.peak_sidelobe_db,
            theory_range_m,
            theory_crossrange_m,
        }
    }
}

/// Radiation-metrics report as written to disk; only the metrics actually
/// requested are present.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetricsReportDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ftbr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractional_bandwidth_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directivity_db: Option<f64>,
}

/// Writes any serializable report as pretty JSON.
pub fn write_json_report<T: Serialize>(path: &Path, doc: &T) -> Result<(), IoError> {
    let json = serde_json::to_vec_pretty(doc).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, json).map_err(io_err(path))
}

/// Reads a JSON report back.
pub fn read_json_report<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&text).map_err(|source| IoError::Json {
        path: path.to_path_buf(),
        source,
    })
}
