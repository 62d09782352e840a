//! Python bindings for the arm-swing SAR imaging crate.
//!
//! The module mirrors the library pipeline: build a sweep and a trajectory,
//! acquire echoes from a point-scatterer scene, calibrate, backproject onto
//! a grid, and read peaks or point-response metrics off the image. Scenes
//! travel as plain `((x, y, z), complex)` tuples and images as nested lists,
//! so no Python-side dependencies are required.
//!
//! Builds as a `cdylib`; `python/smoke_test.py` at the workspace root shows
//! how to load the shared library straight out of `target/` and drive the
//! whole pipeline from Python.

use ndarray::Array2;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use armsar::{calib, forward, imager, io, motion, radmetrics, scene};

/// 3-D point as the Python-facing `(x, y, z)` tuple.
type Position = (f64, f64, f64);

/// One scene entry as Python sees it: position plus complex reflectivity.
type SceneEntry = (Position, Complex64);

fn value_err(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn vec3_of(p: Position) -> [f64; 3] {
    [p.0, p.1, p.2]
}

fn tuple_of(v: [f64; 3]) -> Position {
    (v[0], v[1], v[2])
}

fn scatterers_of(scene: Vec<SceneEntry>) -> PyResult<Vec<scene::PointScatterer>> {
    scene
        .into_iter()
        .map(|(p, rho)| scene::PointScatterer::new(vec3_of(p), rho).map_err(value_err))
        .collect()
}

fn rows_of(values: &Array2<Complex64>) -> Vec<Vec<Complex64>> {
    values.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn cut_of(angles_deg: Vec<f64>, levels: Vec<f64>) -> PyResult<radmetrics::PatternCut> {
    radmetrics::PatternCut::new(angles_deg, levels).map_err(value_err)
}

/// Stepped-frequency sweep: the M frequencies one echo is sampled at.
#[pyclass(frozen)]
struct Sweep {
    inner: scene::FrequencySweep,
}

#[pymethods]
impl Sweep {
    /// The sample frequencies, Hz, ascending.
    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.inner.frequencies().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Sweep({} steps, {:.6e}..{:.6e} Hz)",
            self.inner.len(),
            self.inner.lowest(),
            self.inner.highest()
        )
    }
}

/// Antenna positions of one synthetic-aperture pass.
#[pyclass(frozen)]
struct Trajectory {
    inner: scene::Trajectory,
}

#[pymethods]
impl Trajectory {
    /// The antenna positions, meters.
    #[getter]
    fn positions(&self) -> Vec<Position> {
        self.inner.positions().iter().map(|&p| tuple_of(p)).collect()
    }

    /// Spread of the x coordinates (the realized aperture length), meters.
    #[getter]
    fn x_extent(&self) -> f64 {
        self.inner.x_extent()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory({} positions, x extent {:.4} m)",
            self.inner.len(),
            self.inner.x_extent()
        )
    }
}

/// One acquisition: an M×N complex sample matrix with its sweep and
/// trajectory.
#[pyclass(frozen)]
struct Dataset {
    inner: scene::AcquisitionDataset,
}

#[pymethods]
impl Dataset {
    #[getter]
    fn n_freqs(&self) -> usize {
        self.inner.n_freqs()
    }

    #[getter]
    fn n_positions(&self) -> usize {
        self.inner.n_positions()
    }

    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.inner.sweep().frequencies().to_vec()
    }

    #[getter]
    fn positions(&self) -> Vec<Position> {
        self.inner
            .trajectory()
            .positions()
            .iter()
            .map(|&p| tuple_of(p))
            .collect()
    }

    /// The samples as M rows (one per frequency) of N complex values.
    fn samples(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.samples())
    }

    /// One sample, row m (frequency) and column n (position).
    fn sample(&self, m: usize, n: usize) -> PyResult<Complex64> {
        let (rows, cols) = (self.inner.n_freqs(), self.inner.n_positions());
        if m >= rows || n >= cols {
            return Err(value_err(format!(
                "sample index ({m}, {n}) outside {rows} x {cols}"
            )));
        }
        Ok(self.inner.samples()[[m, n]])
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} freqs x {} positions)",
            self.inner.n_freqs(),
            self.inner.n_positions()
        )
    }
}

/// Planar pixel raster the image is reconstructed on.
#[pyclass(frozen)]
struct Grid {
    inner: scene::ImageGrid,
}

#[pymethods]
impl Grid {
    /// Axis-aligned grid in the z = 0 plane: axis 1 along x (cross-range),
    /// axis 2 along y (range).
    #[new]
    fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        p1: usize,
        p2: usize,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: scene::ImageGrid::axis_aligned_xy(x_min, x_max, y_min, y_max, p1, p2)
                .map_err(value_err)?,
        })
    }

    /// Arbitrarily oriented grid from an origin, two orthonormal axes,
    /// physical extents, and pixel counts.
    #[staticmethod]
    fn oriented(
        origin: Position,
        axis1: Position,
        axis2: Position,
        extents: (f64, f64),
        pixels: (usize, usize),
    ) -> PyResult<Self> {
        Ok(Self {
            inner: scene::ImageGrid::new(
                vec3_of(origin),
                vec3_of(axis1),
                vec3_of(axis2),
                extents,
                pixels,
            )
            .map_err(value_err)?,
        })
    }

    #[getter]
    fn pixels(&self) -> (usize, usize) {
        self.inner.pixels()
    }

    /// Pixel pitch along axes 1 and 2, meters.
    #[getter]
    fn steps(&self) -> (f64, f64) {
        (self.inner.step1(), self.inner.step2())
    }

    /// World position of pixel (i1, i2).
    fn pixel_position(&self, i1: usize, i2: usize) -> Position {
        tuple_of(self.inner.pixel_position(i1, i2))
    }

    fn __repr__(&self) -> String {
        let (p1, p2) = self.inner.pixels();
        format!("Grid({p1} x {p2} pixels)")
    }
}

/// Complex reflectivity image from backprojection.
#[pyclass(frozen)]
struct Image {
    inner: scene::ReflectivityImage,
}

#[pymethods]
impl Image {
    #[getter]
    fn pixels(&self) -> (usize, usize) {
        self.inner.grid().pixels()
    }

    /// The complex pixels as nested lists, axis 1 major.
    fn values(&self) -> Vec<Vec<Complex64>> {
        rows_of(self.inner.values())
    }

    /// Pixel magnitudes in dB relative to the image peak.
    fn db(&self) -> PyResult<Vec<Vec<f64>>> {
        let db = imager::to_db(&self.inner).map_err(value_err)?;
        Ok(db.rows().into_iter().map(|r| r.to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        let (p1, p2) = self.inner.grid().pixels();
        format!("Image({p1} x {p2} pixels)")
    }
}

/// Peak location and above-threshold extents of one image.
#[pyclass(frozen)]
struct Detection {
    #[pyo3(get)]
    peak_position: Position,
    #[pyo3(get)]
    peak_pixel: (usize, usize),
    #[pyo3(get)]
    peak_magnitude_db: f64,
    #[pyo3(get)]
    extent_x: f64,
    #[pyo3(get)]
    extent_axis2: f64,
    #[pyo3(get)]
    threshold_db: f64,
}

#[pymethods]
impl Detection {
    fn __repr__(&self) -> String {
        format!(
            "Detection(peak ({:.4}, {:.4}, {:.4}) m, extents ({:.4}, {:.4}) m at {} dB)",
            self.peak_position.0,
            self.peak_position.1,
            self.peak_position.2,
            self.extent_x,
            self.extent_axis2,
            self.threshold_db
        )
    }
}

/// Point-response widths and sidelobe level.
#[pyclass(frozen, name = "PsfMetrics")]
struct PsfMetricsPy {
    #[pyo3(get)]
    range_fwhm: f64,
    #[pyo3(get)]
    crossrange_fwhm: f64,
    #[pyo3(get)]
    peak_sidelobe_db: f64,
}

#[pymethods]
impl PsfMetricsPy {
    fn __repr__(&self) -> String {
        format!(
            "PsfMetrics(range {:.4} m, cross-range {:.4} m, sidelobe {:.2} dB)",
            self.range_fwhm, self.crossrange_fwhm, self.peak_sidelobe_db
        )
    }
}

/// Uniform sweep of `count` frequencies centered on `center_hz` spanning
/// `bandwidth_hz`.
#[pyfunction]
fn make_sweep(center_hz: f64, bandwidth_hz: f64, count: usize) -> PyResult<Sweep> {
    Ok(Sweep {
        inner: scene::make_sweep(center_hz, bandwidth_hz, count).map_err(value_err)?,
    })
}

/// Sweep from an explicit ascending frequency list, Hz.
#[pyfunction]
fn sweep_from_frequencies(frequencies_hz: Vec<f64>) -> PyResult<Sweep> {
    Ok(Sweep {
        inner: scene::FrequencySweep::new(frequencies_hz).map_err(value_err)?,
    })
}

/// Synthetic arm-swing trajectory along x with optional per-position jitter
/// and accumulating drift.
#[pyfunction]
#[pyo3(signature = (aperture_length_m = 0.12, point_count = 61, standoff_m = 0.10,
                    jitter_std_m = 0.0, drift_rate_m_per_m = 0.0, seed = 0))]
fn arm_swing(
    aperture_length_m: f64,
    point_count: usize,
    standoff_m: f64,
    jitter_std_m: f64,
    drift_rate_m_per_m: f64,
    seed: u64,
) -> PyResult<Trajectory> {
    let spec = motion::SwingSpec {
        aperture_length: aperture_length_m,
        point_count,
        standoff: standoff_m,
        jitter_std: jitter_std_m,
        drift_rate: drift_rate_m_per_m,
        seed,
    };
    Ok(Trajectory {
        inner: motion::arm_swing(&spec).map_err(value_err)?,
    })
}

/// Trajectory from explicit antenna positions, meters.
#[pyfunction]
fn trajectory_from_positions(positions: Vec<Position>) -> PyResult<Trajectory> {
    Ok(Trajectory {
        inner: scene::Trajectory::new(positions.into_iter().map(vec3_of).collect())
            .map_err(value_err)?,
    })
}

/// Longest contiguous trajectory window whose x extent fits `max_extent_m`.
#[pyfunction]
fn crop_aperture(trajectory: &Trajectory, max_extent_m: f64) -> PyResult<Trajectory> {
    Ok(Trajectory {
        inner: motion::crop_aperture(&trajectory.inner, max_extent_m).map_err(value_err)?,
    })
}

/// Square-grid point cloud for a flat x/z plate, reflectivity split evenly
/// across the nodes. Returns scene entries ready for [`acquire`].
#[pyfunction]
fn discretize_plate(
    center: Position,
    width_m: f64,
    height_m: f64,
    spacing_m: f64,
    reflectivity: Complex64,
) -> PyResult<Vec<SceneEntry>> {
    let nodes = scene::discretize_plate(vec3_of(center), width_m, height_m, spacing_m, reflectivity)
        .map_err(value_err)?;
    Ok(nodes
        .into_iter()
        .map(|s| (tuple_of(s.position), s.reflectivity))
        .collect())
}

/// Quarter-wavelength plate node spacing at the sweep's highest frequency.
#[pyfunction]
fn default_plate_spacing(sweep: &Sweep) -> f64 {
    scene::default_plate_spacing(&sweep.inner)
}

/// Simulates one monostatic SFCW acquisition over a point-scatterer scene.
///
/// `amplitude_model` is `"phase_only"` or `"spherical_spreading"`; an SNR in
/// dB adds seeded complex Gaussian noise relative to the clean mean sample
/// power.
#[pyfunction]
#[pyo3(signature = (scene_entries, trajectory, sweep,
                    amplitude_model = "phase_only", noise_snr_db = None, seed = 0))]
fn acquire(
    scene_entries: Vec<SceneEntry>,
    trajectory: &Trajectory,
    sweep: &Sweep,
    amplitude_model: &str,
    noise_snr_db: Option<f64>,
    seed: u64,
) -> PyResult<Dataset> {
    let amplitude_model = match amplitude_model {
        "phase_only" => forward::AmplitudeModel::PhaseOnly,
        "spherical_spreading" => forward::AmplitudeModel::SphericalSpreading,
        other => {
            return Err(value_err(format!(
                "unknown amplitude model {other:?}: expected \"phase_only\" or \
                 \"spherical_spreading\""
            )))
        }
    };
    let cfg = forward::ForwardConfig {
        amplitude_model,
        noise_snr_db,
        seed,
    };
    Ok(Dataset {
        inner: forward::acquire(&scatterers_of(scene_entries)?, &trajectory.inner, &sweep.inner, &cfg)
            .map_err(value_err)?,
    })
}

/// Dataset from explicit samples: M rows (frequencies) of N complex values.
#[pyfunction]
fn dataset_from_samples(
    sweep: &Sweep,
    trajectory: &Trajectory,
    samples: Vec<Vec<Complex64>>,
) -> PyResult<Dataset> {
    let m = samples.len();
    let n = samples.first().map_or(0, Vec::len);
    if samples.iter().any(|row| row.len() != n) {
        return Err(value_err("ragged sample rows"));
    }
    let flat: Vec<Complex64> = samples.into_iter().flatten().collect();
    let samples = Array2::from_shape_vec((m, n), flat)
        .map_err(|e| value_err(format!("bad sample shape: {e}")))?;
    Ok(Dataset {
        inner: scene::AcquisitionDataset::new(sweep.inner.clone(), trajectory.inner.clone(), samples)
            .map_err(value_err)?,
    })
}

/// Coherent target isolation: measured minus background, sample by sample.
#[pyfunction]
fn subtract_background(measured: &Dataset, background: &Dataset) -> PyResult<Dataset> {
    Ok(Dataset {
        inner: calib::subtract_background(&measured.inner, &background.inner)
            .map_err(value_err)?,
    })
}

/// Removes a linear phase: multiplies row m by e^{+j2π·f_m·delay}.
#[pyfunction]
fn calibrate_phase(data: &Dataset, reference_delay_s: f64) -> PyResult<Dataset> {
    Ok(Dataset {
        inner: calib::calibrate_phase(&data.inner, reference_delay_s).map_err(value_err)?,
    })
}

/// Estimates the residual system delay from a reference target at a known
/// range, seconds.
#[pyfunction]
fn estimate_reference_delay(data: &Dataset, known_range_m: f64) -> PyResult<f64> {
    calib::estimate_reference_delay(&data.inner, known_range_m).map_err(value_err)
}

/// Sum-and-delay image formation. `taper` is `"none"` or `"hann"`.
#[pyfunction]
#[pyo3(signature = (data, grid, taper = "none"))]
fn backproject(data: &Dataset, grid: &Grid, taper: &str) -> PyResult<Image> {
    let taper = match taper {
        "none" => imager::Taper::None,
        "hann" => imager::Taper::Hann,
        other => {
            return Err(value_err(format!(
                "unknown taper {other:?}: expected \"none\" or \"hann\""
            )))
        }
    };
    Ok(Image {
        inner: imager::backproject_with(&data.inner, &grid.inner, taper).map_err(value_err)?,
    })
}

/// Peak location and contiguous above-threshold extents of an image.
#[pyfunction]
fn detect_peak(image: &Image, threshold_db: f64) -> PyResult<Detection> {
    let r = imager::detect_peak(&image.inner, threshold_db).map_err(value_err)?;
    Ok(Detection {
        peak_position: tuple_of(r.peak_position),
        peak_pixel: r.peak_pixel,
        peak_magnitude_db: r.peak_magnitude_db,
        extent_x: r.extent_x,
        extent_axis2: r.extent_axis2,
        threshold_db: r.threshold_db,
    })
}

/// Backprojects a single-scatterer dataset and measures its −3 dB widths
/// and peak sidelobe.
#[pyfunction]
fn psf_metrics(data: &Dataset, grid: &Grid) -> PyResult<PsfMetricsPy> {
    let m = imager::psf_metrics(&data.inner, &grid.inner).map_err(value_err)?;
    Ok(PsfMetricsPy {
        range_fwhm: m.range_fwhm,
        crossrange_fwhm: m.crossrange_fwhm,
        peak_sidelobe_db: m.peak_sidelobe_db,
    })
}

/// Writes `<stem>.dataset.json` + `<stem>.dataset.bin` under `dir`; returns
/// the header path.
#[pyfunction]
fn write_dataset(
    dir: std::path::PathBuf,
    stem: &str,
    data: &Dataset,
    seed: u64,
    provenance: &str,
) -> PyResult<String> {
    let path = io::write_dataset(&dir, stem, &data.inner, seed, provenance).map_err(value_err)?;
    Ok(path.display().to_string())
}

/// Reads a dataset header + samples; returns the dataset and the header as
/// a dict.
#[pyfunction]
fn read_dataset(py: Python<'_>, path: std::path::PathBuf) -> PyResult<(Dataset, Py<PyDict>)> {
    let (data, header) = io::read_dataset(&path).map_err(value_err)?;
    let dict = PyDict::new(py);
    dict.set_item("format", header.format)?;
    dict.set_item("version", header.version)?;
    dict.set_item("seed", header.seed)?;
    dict.set_item("provenance", header.provenance)?;
    dict.set_item("samples_file", header.samples_file)?;
    Ok((Dataset { inner: data }, dict.into()))
}

/// Radiation efficiency from gain and directivity, percent.
#[pyfunction]
fn efficiency(gain_dbi: f64, directivity_db: f64) -> PyResult<f64> {
    radmetrics::efficiency(gain_dbi, directivity_db).map_err(value_err)
}

/// Front-to-back ratio of a pattern cut (linear power levels), dB.
#[pyfunction]
fn ftbr(angles_deg: Vec<f64>, levels: Vec<f64>) -> PyResult<f64> {
    radmetrics::ftbr(&cut_of(angles_deg, levels)?).map_err(value_err)
}

/// Matched fractional bandwidth 200·(f_high − f_low)/(f_high + f_low), %.
#[pyfunction]
fn fractional_bandwidth(f_low_hz: f64, f_high_hz: f64) -> PyResult<f64> {
    radmetrics::fractional_bandwidth(f_low_hz, f_high_hz).map_err(value_err)
}

/// −3 dB beamwidth of a pattern cut (linear power levels), degrees.
#[pyfunction]
fn half_power_beamwidth_deg(angles_deg: Vec<f64>, levels: Vec<f64>) -> PyResult<f64> {
    radmetrics::half_power_beamwidth_deg(&cut_of(angles_deg, levels)?).map_err(value_err)
}

/// Kraus two-cut directivity estimate from E- and H-plane cuts, dB.
#[pyfunction]
fn directivity_from_cuts(
    angles_e_deg: Vec<f64>,
    levels_e: Vec<f64>,
    angles_h_deg: Vec<f64>,
    levels_h: Vec<f64>,
) -> PyResult<f64> {
    radmetrics::directivity_from_cuts(
        &cut_of(angles_e_deg, levels_e)?,
        &cut_of(angles_h_deg, levels_h)?,
    )
    .map_err(value_err)
}

#[pymodule]
fn armsar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sweep>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<Grid>()?;
    m.add_class::<Image>()?;
    m.add_class::<Detection>()?;
    m.add_class::<PsfMetricsPy>()?;
    m.add_function(wrap_pyfunction!(make_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_from_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(arm_swing, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_from_positions, m)?)?;
    m.add_function(wrap_pyfunction!(crop_aperture, m)?)?;
    m.add_function(wrap_pyfunction!(discretize_plate, m)?)?;
    m.add_function(wrap_pyfunction!(default_plate_spacing, m)?)?;
    m.add_function(wrap_pyfunction!(acquire, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_from_samples, m)?)?;
    m.add_function(wrap_pyfunction!(subtract_background, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_phase, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_reference_delay, m)?)?;
    m.add_function(wrap_pyfunction!(backproject, m)?)?;
    m.add_function(wrap_pyfunction!(detect_peak, m)?)?;
    m.add_function(wrap_pyfunction!(psf_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(write_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(read_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(ftbr, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(half_power_beamwidth_deg, m)?)?;
    m.add_function(wrap_pyfunction!(directivity_from_cuts, m)?)?;
    m.add("SPEED_OF_LIGHT", scene::SPEED_OF_LIGHT)?;
    m.add("DB_FLOOR", imager::DB_FLOOR)?;
    Ok(())
}
