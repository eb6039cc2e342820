//! Parallel-jaw gripper geometry and grasp-candidate supply.
//!
//! A grasp pose places the gripper frame at the center of the closing
//! region: local x is the approach direction, local y the closing direction
//! (jaw to jaw) and local z the finger-pad width direction.

mod grasp_io;
mod sampler;

pub use grasp_io::{export_grasps, import_grasps, read_grasp_file, GraspEntry, GraspFile};
pub use sampler::{grasp_distance, sample_grasps, sample_grasps_with, SamplerConfig, ScoreScale};

use serde::{Deserialize, Serialize};

use crate::cloud::{Obb, Point3, RigidTransform, Vector3};
use crate::error::{Error, Result};

/// Jaw dimensions in meters. Defaults are the Robotiq 2F-85: 85 mm stroke,
/// finger pads 37 mm deep and 22 mm wide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub max_opening: f64,
    pub finger_depth: f64,
    pub finger_width: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        Self {
            max_opening: 0.085,
            finger_depth: 0.037,
            finger_width: 0.022,
        }
    }
}

impl GripperModel {
    pub fn new(max_opening: f64, finger_depth: f64, finger_width: f64) -> Result<Self> {
        let g = Self {
            max_opening,
            finger_depth,
            finger_width,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_opening", self.max_opening),
            ("finger_depth", self.finger_depth),
            ("finger_width", self.finger_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidValue(format!("gripper {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `(finger_depth / 2, max_opening / 2, finger_width / 2)`.
    pub fn half_extents(&self) -> Vector3 {
        Vector3::new(self.finger_depth, self.max_opening, self.finger_width) * 0.5
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GraspPose {
    pub pose: RigidTransform,
}

impl GraspPose {
    pub fn new(pose: RigidTransform) -> Self {
        Self { pose }
    }

    /// Pose from a closing-region center, approach direction and closing
    /// direction. `closing` is orthogonalized against `approach`.
    pub fn from_axes(center: Point3, approach: Vector3, closing: Vector3) -> Result<Self> {
        Ok(Self {
            pose: RigidTransform::from_frame(approach, closing, center)?,
        })
    }

    pub fn center(&self) -> Point3 {
        Point3::from(*self.pose.translation())
    }

    pub fn approach(&self) -> Vector3 {
        self.pose.rotation().column(0).into_owned()
    }

    pub fn closing(&self) -> Vector3 {
        self.pose.rotation().column(1).into_owned()
    }

    /// Same grasp expressed in another frame.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            pose: t.compose(&self.pose),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspSource {
    Sampler,
    Imported,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraspCandidate {
    pub grasp: GraspPose,
    /// Baseline quality `S`.
    pub score: f64,
    pub source: GraspSource,
}

impl GraspCandidate {
    pub fn new(grasp: GraspPose, score: f64, source: GraspSource) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::InvalidValue(format!("grasp score {score} is not finite")));
        }
        Ok(Self { grasp, score, source })
    }
}

/// Corners of the two inner finger-pad faces. Index bits: 4 selects `+x`,
/// 2 selects `+y` (the second pad), 1 selects `+z`.
pub type ContactSet = [Point3; 8];

pub fn contact_points(g: &GripperModel, p: &GraspPose) -> ContactSet {
    let h = g.half_extents();
    std::array::from_fn(|k| {
        let sign = |bit: usize| if k & bit != 0 { 1.0 } else { -1.0 };
        let local = Point3::new(sign(4) * h.x, sign(2) * h.y, sign(1) * h.z);
        p.pose.transform_point(&local)
    })
}

/// The volume between the pads, as an oriented box in world frame.
pub fn closing_region(g: &GripperModel, p: &GraspPose) -> Obb {
    Obb::new(p.center(), *p.pose.rotation(), g.half_extents()).expect("valid pose and gripper give a valid box")
}

/// Whether a point given in the grasp frame lies in either finger body: a
/// slab `thickness` wide just outside each pad, from the pad tips back
/// `clearance` past the closing region along the approach.
pub fn in_finger_slab(g: &GripperModel, local: &Vector3, thickness: f64, clearance: f64) -> bool {
    let h = g.half_extents();
    let y = local.y.abs();
    local.x >= -h.x - clearance && local.x <= h.x && local.z.abs() <= h.z && y >= h.y && y <= h.y + thickness
}
