//! Ensemble aggregation: mean completed cloud plus per-point scalar std.
//!
//! For point `i` over `T` passes the mean is the per-coordinate average and
//! the dispersion is the Euclidean norm of the three per-axis sample
//! standard deviations (divisor `T - 1`), i.e. the square root of the
//! covariance trace. Observed (partial) points carry std exactly zero.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{load_cloud, save_cloud, CloudFormat, ColorMap, Point3, PointCloud, Precision, SaveOptions};
use crate::completion::EnsembleStack;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Observed,
    Generated,
}

/// Mean cloud `CP` with per-point std `CP_std` in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertainCloud {
    mean: PointCloud,
    std: Vec<f64>,
    partial_count: usize,
    passes_used: usize,
}

impl UncertainCloud {
    /// Validates lengths, `std >= 0` and zero std on the first
    /// `partial_count` points.
    pub fn new(mean: PointCloud, std: Vec<f64>, partial_count: usize, passes_used: usize) -> Result<Self> {
        if std.len() != mean.len() {
            return Err(Error::LengthMismatch {
                expected: mean.len(),
                actual: std.len(),
            });
        }
        if partial_count > mean.len() {
            return Err(Error::InvalidValue(format!(
                "partial count {partial_count} exceeds cloud size {}",
                mean.len()
            )));
        }
        if let Some(i) = std.iter().position(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidValue(format!("std[{i}] = {} is not a nonnegative number", std[i])));
        }
        if let Some(i) = std[..partial_count].iter().position(|s| *s != 0.0) {
            return Err(Error::InvalidValue(format!("observed point {i} has nonzero std")));
        }
        Ok(Self {
            mean,
            std,
            partial_count,
            passes_used,
        })
    }

    pub fn mean(&self) -> &PointCloud {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn partial_count(&self) -> usize {
        self.partial_count
    }

    pub fn passes_used(&self) -> usize {
        self.passes_used
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        if i < self.partial_count {
            Provenance::Observed
        } else {
            Provenance::Generated
        }
    }
}

/// Welford accumulation per point index; indices are independent so the
/// result does not depend on the parallel schedule.
pub fn aggregate(stack: &EnsembleStack) -> Result<UncertainCloud> {
    let t = stack.pass_count();
    if t < 2 {
        return Err(Error::InvalidStack(format!("need T >= 2, got {t}")));
    }
    let p = stack.partial_count();
    let passes = stack.passes();
    let (means, stds): (Vec<Point3>, Vec<f64>) = (0..stack.point_count())
        .into_par_iter()
        .map(|i| {
            let mut mean = [0.0f64; 3];
            let mut m2 = [0.0f64; 3];
            for (k, pass) in passes.iter().enumerate() {
                let x = pass[i];
                let n = (k + 1) as f64;
                for a in 0..3 {
                    let delta = x[a] - mean[a];
                    mean[a] += delta / n;
                    m2[a] += delta * (x[a] - mean[a]);
                }
            }
            let std = if i < p {
                0.0
            } else {
                (m2.iter().sum::<f64>() / (t - 1) as f64).sqrt()
            };
            (Point3::from(mean), std)
        })
        .unzip();
    UncertainCloud::new(PointCloud::new(means)?, stds, p, t)
}

/// Std statistics in millimeters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StdSummary {
    pub min_mm: f64,
    pub max_mm: f64,
    pub mean_mm: f64,
    pub observed: ProvenanceStats,
    pub generated: ProvenanceStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceStats {
    pub count: usize,
    pub min_mm: f64,
    pub max_mm: f64,
    pub mean_mm: f64,
}

fn stats_mm(values: &[f64]) -> ProvenanceStats {
    if values.is_empty() {
        return ProvenanceStats {
            count: 0,
            min_mm: 0.0,
            max_mm: 0.0,
            mean_mm: 0.0,
        };
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = crate::numeric::compensated_sum(values.iter().copied()) / values.len() as f64;
    ProvenanceStats {
        count: values.len(),
        min_mm: min * 1e3,
        max_mm: max * 1e3,
        mean_mm: mean * 1e3,
    }
}

pub fn std_summary(uc: &UncertainCloud) -> StdSummary {
    let all = stats_mm(&uc.std);
    StdSummary {
        min_mm: all.min_mm,
        max_mm: all.max_mm,
        mean_mm: all.mean_mm,
        observed: stats_mm(&uc.std[..uc.partial_count]),
        generated: stats_mm(&uc.std[uc.partial_count..]),
    }
}

/// Fraction of generated points whose std lies in `[lo_m, hi_m]`.
pub fn generated_band_fraction(uc: &UncertainCloud, lo_m: f64, hi_m: f64) -> f64 {
    let gen = &uc.std[uc.partial_count..];
    if gen.is_empty() {
        return 0.0;
    }
    gen.iter().filter(|s| (lo_m..=hi_m).contains(*s)).count() as f64 / gen.len() as f64
}

/// Sidecar JSON stored next to an uncertain-cloud PLY.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncertainSidecar {
    #[serde(rename = "T_used")]
    pub passes_used: usize,
    #[serde(rename = "P")]
    pub partial_count: usize,
    pub units: String,
}

/// `<stem>.json` next to `ply_path`.
pub fn sidecar_path(ply_path: &Path) -> std::path::PathBuf {
    ply_path.with_extension("json")
}

/// Writes the PLY (with a `std` vertex property) and its sidecar.
pub fn save_uncertain(uc: &UncertainCloud, ply_path: impl AsRef<Path>, precision: Precision, colorize: bool) -> Result<()> {
    let ply_path = ply_path.as_ref();
    let opts = SaveOptions {
        precision,
        scalar: Some(("std", uc.std())),
        color_map: colorize.then_some(ColorMap::BlueRed),
    };
    save_cloud(uc.mean(), ply_path, CloudFormat::PlyBinaryLe, &opts)?;
    let sidecar = UncertainSidecar {
        passes_used: uc.passes_used,
        partial_count: uc.partial_count,
        units: "m".into(),
    };
    let path = sidecar_path(ply_path);
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

/// Reads a PLY with a `std` property. Without a sidecar, provenance is
/// reconstructed as the leading run of zero-std points.
pub fn load_uncertain(ply_path: impl AsRef<Path>) -> Result<UncertainCloud> {
    let ply_path = ply_path.as_ref();
    let loaded = load_cloud(ply_path, CloudFormat::PlyBinaryLe)?;
    let std = loaded
        .std
        .ok_or_else(|| Error::Format(format!("{} has no 'std' vertex property", ply_path.display())))?;
    let side = sidecar_path(ply_path);
    let (p, t) = if side.is_file() {
        let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let s: UncertainSidecar = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("{}:{}", side.display(), e.line()), e.to_string()))?;
        (s.partial_count, s.passes_used)
    } else {
        (std.iter().take_while(|s| **s == 0.0).count(), 0)
    };
    UncertainCloud::new(loaded.cloud, std, p, t)
}
