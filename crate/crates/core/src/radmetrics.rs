//! Antenna radiation-metric arithmetic: efficiency, front-to-back ratio,
//! fractional bandwidth, and a two-cut directivity estimate.
//!
//! These are small, pure computations on scalar gain/directivity figures
//! and sampled radiation-pattern cuts. Pattern levels are power per unit
//! solid angle on a linear scale; angle interpolation is linear on the dB
//! scale, since patterns are plotted and reasoned about in dB.

use std::io::Read;

use thiserror::Error;

/// Radiation-metric errors.
#[derive(Debug, Error)]
pub enum RadMetricsError {
    #[error("gain {gain_dbi} dBi exceeds directivity {directivity_db} dB beyond tolerance")]
    GainExceedsDirectivity { gain_dbi: f64, directivity_db: f64 },
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },
    #[error("pattern cut needs at least 8 samples (got {got})")]
    TooFewSamples { got: usize },
    #[error("pattern cut has {angles} angles but {levels} levels")]
    LengthMismatch { angles: usize, levels: usize },
    #[error("pattern angles must be strictly increasing within [-180, 180]")]
    BadAngles,
    #[error("pattern levels must be finite and non-negative")]
    BadLevel,
    #[error("pattern cut does not cover {angle_deg}°")]
    AngleNotCovered { angle_deg: f64 },
    #[error("back-lobe level is zero; front-to-back ratio is unbounded")]
    ZeroBackLobe,
    #[error("no half-power crossing inside the cut; beamwidth undeterminable")]
    NoHalfPowerCrossing,
    #[error("band edges must satisfy 0 < f_low < f_high (got {f_low}, {f_high})")]
    BadBand { f_low: f64, f_high: f64 },
    #[error("pattern CSV record {record}: {reason}")]
    BadCsvRecord { record: usize, reason: String },
    #[error("failed to read pattern CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// One pattern cut: power per unit solid angle (linear) sampled over
/// strictly increasing angles in degrees within [−180, 180].
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCut {
    angles_deg: Vec<f64>,
    levels: Vec<f64>,
}

impl PatternCut {
    /// Minimum number of samples for a meaningful cut.
    pub const MIN_SAMPLES: usize = 8;

    pub fn new(angles_deg: Vec<f64>, levels: Vec<f64>) -> Result<Self, RadMetricsError> {
        if angles_deg.len() != levels.len() {
            return Err(RadMetricsError::LengthMismatch {
                angles: angles_deg.len(),
                levels: levels.len(),
            });
        }
        if angles_deg.len() < Self::MIN_SAMPLES {
            return Err(RadMetricsError::TooFewSamples {
                got: angles_deg.len(),
            });
        }
        let in_domain = |a: f64| a.is_finite() && (-180.0..=180.0).contains(&a);
        if !angles_deg.iter().all(|&a| in_domain(a))
            || !angles_deg.windows(2).all(|w| w[0] < w[1])
        {
            return Err(RadMetricsError::BadAngles);
        }
        if !levels.iter().all(|&l| l.is_finite() && l >= 0.0) {
            return Err(RadMetricsError::BadLevel);
        }
        Ok(Self { angles_deg, levels })
    }

    /// Reads a cut from two-column CSV (`angle_deg, level_db`). A leading
    /// header row is accepted and skipped; dB levels are converted to
    /// linear power. Any other malformed content is an error.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, RadMetricsError> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut angles = Vec::new();
        let mut levels = Vec::new();
        for (idx, record) in csv.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(RadMetricsError::BadCsvRecord {
                    record: idx,
                    reason: format!("expected 2 fields, got {}", record.len()),
                });
            }
            let parsed: Result<(f64, f64), _> = record[0]
                .parse::<f64>()
                .and_then(|a| record[1].parse::<f64>().map(|l| (a, l)));
            match parsed {
                Ok((angle, level_db)) => {
                    angles.push(angle);
                    levels.push(10f64.powf(level_db / 10.0));
                }
                // A non-numeric first record is an (optional) header.
                Err(e) if idx == 0 => {
                    let looks_numeric = record[0].parse::<f64>().is_ok();
                    if looks_numeric {
                        return Err(RadMetricsError::BadCsvRecord {
                            record: idx,
                            reason: e.to_string(),
                        });
                    }
                }
                Err(e) => {
                    return Err(RadMetricsError::BadCsvRecord {
                        record: idx,
                        reason: e.to_string(),
                    });
                }
            }
        }
        Self::new(angles, levels)
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    /// Linear power levels, same order as [`Self::angles_deg`].
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.angles_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_deg.is_empty()
    }

    /// Linear power level at `angle_deg`, interpolated linearly in dB
    /// between the bracketing samples (exact at sample angles). ±180° refer
    /// to the same physical direction, so either endpoint covers both.
    pub fn level_at(&self, angle_deg: f64) -> Result<f64, RadMetricsError> {
        let not_covered = RadMetricsError::AngleNotCovered { angle_deg };
        let lookup = |a: f64| -> Option<f64> {
            let first = *self.angles_deg.first().unwrap();
            let last = *self.angles_deg.last().unwrap();
            if a < first || a > last {
                return None;
            }
            // Index of the first sample angle ≥ a.
            let hi = self.angles_deg.partition_point(|&x| x < a);
            if self.angles_deg[hi] == a {
                return Some(self.levels[hi]);
            }
            let (a0, a1) = (self.angles_deg[hi - 1], self.angles_deg[hi]);
            let (l0, l1) = (self.levels[hi - 1], self.levels[hi]);
            let t = (a - a0) / (a1 - a0);
            let db = |l: f64| 10.0 * l.log10(); // −∞ for zero level
            Some(10f64.powf(((1.0 - t) * db(l0) + t * db(l1)) / 10.0))
        };
        if !angle_deg.is_finite() {
            return Err(not_covered);
        }
        lookup(angle_deg)
            .or_else(|| {
                // Wrap the half-turn endpoints onto each other.
                if angle_deg == 180.0 {
                    lookup(-180.0)
                } else if angle_deg == -180.0 {
                    lookup(180.0)
                } else {
                    None
                }
            })
            .ok_or(not_covered)
    }
}

/// Radiation efficiency in percent from gain and directivity in dB:
/// 100·10^((G−D)/10), capped at 100. Rounded published figures may quote a
/// gain a hair above directivity; up to 0.05 dB of excess is tolerated
/// (and capped), more is an error.
pub fn efficiency(gain_dbi: f64, directivity_db: f64) -> Result<f64, RadMetricsError> {
    if !gain_dbi.is_finite() {
        return Err(RadMetricsError::NonFinite { what: "gain_dbi" });
    }
    if !directivity_db.is_finite() {
        return Err(RadMetricsError::NonFinite {
            what: "directivity_db",
        });
    }
    if gain_dbi > directivity_db + 0.05 {
        return Err(RadMetricsError::GainExceedsDirectivity {
            gain_dbi,
            directivity_db,
        });
    }
    Ok((100.0 * 10f64.powf((gain_dbi - directivity_db) / 10.0)).min(100.0))
}

/// Front-to-back ratio of a cut in dB: 10·log10(level(0°) / level(180°)),
/// both levels interpolated on the cut. A zero back lobe (unbounded ratio)
/// is an error.
pub fn ftbr(cut: &PatternCut) -> Result<f64, RadMetricsError> {
    let front = cut.level_at(0.0)?;
    let back = cut.level_at(180.0)?;
    if back == 0.0 {
        return Err(RadMetricsError::ZeroBackLobe);
    }
    Ok(10.0 * (front / back).log10())
}

/// Fractional bandwidth in percent: the band width over the band center,
/// 100·(f_high − f_low)/((f_low + f_high)/2).
pub fn fractional_bandwidth(f_low: f64, f_high: f64) -> Result<f64, RadMetricsError> {
    if !(f_low.is_finite() && f_high.is_finite() && 0.0 < f_low && f_low < f_high) {
        return Err(RadMetricsError::BadBand { f_low, f_high });
    }
    Ok(200.0 * (f_high - f_low) / (f_low + f_high))
}

/// Half-power (−3 dB) beamwidth of the main lobe in degrees: walk from the
/// level argmax in both directions to the half-power crossings,
/// interpolating linearly in dB over angle.
pub fn half_power_beamwidth_deg(cut: &PatternCut) -> Result<f64, RadMetricsError> {
    let levels = cut.levels();
    let angles = cut.angles_deg();
    let (peak, &peak_level) = levels
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("cut has samples");
    if peak_level <= 0.0 {
        return Err(RadMetricsError::NoHalfPowerCrossing);
    }
    let db = |l: f64| 10.0 * (l / peak_level).log10();
    let target = 10.0 * 0.5f64.log10();

    let cross = |step: isize| -> Option<f64> {
        let mut i = peak;
        loop {
            let next = i as isize + step;
            if next < 0 || next as usize >= levels.len() {
                return None;
            }
            let next = next as usize;
            if db(levels[next]) < target {
                let (d0, d1) = (db(levels[i]), db(levels[next]));
                let frac = (target - d0) / (d1 - d0);
                return Some(angles[i] + frac * (angles[next] - angles[i]));
            }
            i = next;
        }
    };
    let left = cross(-1).ok_or(RadMetricsError::NoHalfPowerCrossing)?;
    let right = cross(1).ok_or(RadMetricsError::NoHalfPowerCrossing)?;
    Ok(right - left)
}

/// Directivity estimate in dB from two orthogonal pattern cuts via the
/// Kraus approximation D ≈ 4π/(Θ_E·Θ_H), with the half-power beamwidths
/// Θ in radians. This is the standard two-cut estimate, not a full sphere
/// integration — expect fractions of a dB of model error on real patterns.
pub fn directivity_from_cuts(
    cut_e: &PatternCut,
    cut_h: &PatternCut,
) -> Result<f64, RadMetricsError> {
    let theta_e = half_power_beamwidth_deg(cut_e)?.to_radians();
    let theta_h = half_power_beamwidth_deg(cut_h)?.to_radians();
    Ok(10.0 * (4.0 * std::f64::consts::PI / (theta_e * theta_h)).log10())
}
