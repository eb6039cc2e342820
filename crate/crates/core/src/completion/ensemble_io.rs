use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EnsembleStack;
use crate::cloud::{load_cloud, save_cloud, CloudFormat, Precision, SaveOptions};
use crate::error::{Error, Result};

/// `manifest.json` of an ensemble dump directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    #[serde(rename = "T")]
    pub passes: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "P")]
    pub partial_count: usize,
    pub seed: u64,
    #[serde(rename = "backend-id")]
    pub backend_id: String,
}

const MANIFEST: &str = "manifest.json";

fn pass_file(t: usize) -> String {
    format!("pass_{t:04}.ply")
}

/// Loads one cloud per path (format from extension) and validates them as a
/// stack with `partial_count` shared leading points.
pub fn load_ensemble<P: AsRef<Path>>(paths: &[P], partial_count: usize) -> Result<EnsembleStack> {
    let passes = paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            load_cloud(p, CloudFormat::from_path(p)).map(|l| l.cloud)
        })
        .collect::<Result<Vec<_>>>()?;
    EnsembleStack::new(passes, partial_count)
}

/// Writes `pass_0000.ply ...` as float64 binary PLY plus `manifest.json`.
pub fn write_ensemble_dir(stack: &EnsembleStack, dir: impl AsRef<Path>, seed: u64, backend_id: &str) -> Result<EnsembleManifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let opts = SaveOptions {
        precision: Precision::F64,
        ..Default::default()
    };
    for (t, pass) in stack.passes().iter().enumerate() {
        save_cloud(pass, dir.join(pass_file(t)), CloudFormat::PlyBinaryLe, &opts)?;
    }
    let manifest = EnsembleManifest {
        passes: stack.pass_count(),
        points: stack.point_count(),
        partial_count: stack.partial_count(),
        seed,
        backend_id: backend_id.to_string(),
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_ensemble_dir(dir: impl AsRef<Path>) -> Result<(EnsembleStack, EnsembleManifest)> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: EnsembleManifest = serde_json::from_str(&text)
        .map_err(|e| Error::parse(format!("{}:{}", path.display(), e.line()), e.to_string()))?;
    let paths: Vec<PathBuf> = (0..manifest.passes).map(|t| dir.join(pass_file(t))).collect();
    let stack = load_ensemble(&paths, manifest.partial_count)?;
    if stack.point_count() != manifest.points {
        return Err(Error::InvalidStack(format!(
            "manifest declares N={} but passes hold {}",
            manifest.points,
            stack.point_count()
        )));
    }
    Ok((stack, manifest))
}
