//! Geometric grasp-success proxy judged against the ground-truth surface.
//!
//! A grasp succeeds when
//! 1. its closing region holds at least `min_points` ground-truth points,
//! 2. two of those points form an antipodal pair: outward normals within the
//!    friction cone of `-y` and `+y` respectively, and the offset between
//!    them within `alignment_deg` of the closing axis,
//! 3. no ground-truth point lies in either finger slab, swept back along the
//!    approach by `approach_clearance`.

use serde::{Deserialize, Serialize};

use crate::cloud::Vector3;
use crate::gripper::{closing_region, in_finger_slab, GraspCandidate, GripperModel};
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub min_points: usize,
    /// Friction-cone half angle, degrees.
    pub friction_deg: f64,
    pub alignment_deg: f64,
    /// Finger thickness beyond the pad face, meters.
    pub slab_thickness: f64,
    /// How far behind the pads the swept fingers are checked, meters.
    pub approach_clearance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            min_points: 10,
            friction_deg: 30.0,
            alignment_deg: 30.0,
            slab_thickness: 0.01,
            approach_clearance: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub contained: usize,
    pub enough_points: bool,
    pub antipodal: bool,
    pub collision_free: bool,
}

impl OracleVerdict {
    pub fn success(&self) -> bool {
        self.enough_points && self.antipodal && self.collision_free
    }
}

pub fn judge_grasp(cand: &GraspCandidate, scene: &Scene, g: &GripperModel, cfg: &OracleConfig) -> OracleVerdict {
    let region = closing_region(g, &cand.grasp);
    let rot_t = cand.grasp.pose.rotation().transpose();
    let center = cand.grasp.center();
    let normals = scene.ground_truth_normals();

    let mut inside: Vec<(Vector3, Vector3)> = Vec::new();
    let mut collision = false;
    for (p, n) in scene.ground_truth.iter().zip(normals) {
        let local = rot_t * (p - center);
        if region.contains(p) {
            inside.push((local, rot_t * n));
            continue;
        }
        if in_finger_slab(g, &local, cfg.slab_thickness, cfg.approach_clearance) {
            collision = true;
        }
    }

    let cos_cone = cfg.friction_deg.to_radians().cos();
    let cos_align = cfg.alignment_deg.to_radians().cos();
    let low: Vec<&Vector3> = inside.iter().filter(|(_, n)| -n.y >= cos_cone).map(|(p, _)| p).collect();
    let high: Vec<&Vector3> = inside.iter().filter(|(_, n)| n.y >= cos_cone).map(|(p, _)| p).collect();
    let antipodal = low.iter().any(|a| {
        high.iter().any(|b| {
            let d = *b - *a;
            let len = d.norm();
            len > 0.0 && d.y / len >= cos_align
        })
    });
    OracleVerdict {
        contained: inside.len(),
        enough_points: inside.len() >= cfg.min_points,
        antipodal,
        collision_free: !collision,
    }
}

pub fn grasp_success_oracle(cand: &GraspCandidate, scene: &Scene, g: &GripperModel) -> bool {
    judge_grasp(cand, scene, g, &OracleConfig::default()).success()
}
