//! Grasp-list JSON, the exchange format for externally generated candidates.
//!
//! ```json
//! {"gripper": {"max_opening": 0.085, "finger_depth": 0.037, "finger_width": 0.022},
//!  "scores": "unnormalized",
//!  "grasps": [{"rotation": [1,0,0, 0,1,0, 0,0,1], "translation": [0,0,0], "score": 812.5}]}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GraspCandidate, GraspPose, GraspSource, GripperModel, ScoreScale};
use crate::cloud::RigidTransform;
use crate::error::{Error, Result};

/// Orthonormality tolerance applied to imported rotations.
pub const IMPORT_ROTATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspEntry {
    /// Row-major.
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gripper: Option<GripperModel>,
    #[serde(default = "default_scale")]
    pub scores: ScoreScale,
    pub grasps: Vec<GraspEntry>,
}

fn default_scale() -> ScoreScale {
    ScoreScale::Unnormalized
}

#[derive(Deserialize)]
struct LooseFile {
    #[serde(default)]
    gripper: Option<GripperModel>,
    #[serde(default = "default_scale")]
    scores: ScoreScale,
    grasps: Vec<serde_json::Value>,
}

impl GraspEntry {
    fn from_candidate(c: &GraspCandidate) -> Self {
        Self {
            rotation: c.grasp.pose.rotation_row_major(),
            translation: (*c.grasp.pose.translation()).into(),
            score: c.score,
        }
    }

    fn to_candidate(&self, index: usize) -> Result<GraspCandidate> {
        let schema = |message: String| Error::Schema { index, message };
        let pose = RigidTransform::from_row_major(self.rotation, self.translation, IMPORT_ROTATION_TOLERANCE)
            .map_err(|e| schema(e.to_string()))?;
        GraspCandidate::new(GraspPose::new(pose), self.score, GraspSource::Imported).map_err(|e| schema(e.to_string()))
    }
}

/// Candidates plus file header, in file order.
pub fn read_grasp_file(path: impl AsRef<Path>) -> Result<(Vec<GraspCandidate>, Option<GripperModel>, ScoreScale)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let loose: LooseFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(format!("{}:{}", path.display(), e.line()), e.to_string()))?;
    if let Some(g) = &loose.gripper {
        g.validate()?;
    }
    let cands = loose
        .grasps
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            let entry: GraspEntry = serde_json::from_value(value).map_err(|e| Error::Schema {
                index,
                message: e.to_string(),
            })?;
            entry.to_candidate(index)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((cands, loose.gripper, loose.scores))
}

pub fn import_grasps(path: impl AsRef<Path>) -> Result<Vec<GraspCandidate>> {
    read_grasp_file(path).map(|(c, _, _)| c)
}

pub fn export_grasps(
    cands: &[GraspCandidate],
    gripper: &GripperModel,
    scores: ScoreScale,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = GraspFile {
        gripper: Some(*gripper),
        scores,
        grasps: cands.iter().map(GraspEntry::from_candidate).collect(),
    };
    let json = serde_json::to_string_pretty(&file).expect("grasp file serializes");
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}
