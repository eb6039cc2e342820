//! Geometric antipodal grasp sampler.
//!
//! Anchors are drawn at random; each is paired with a random partner whose
//! normal opposes it and whose offset runs along both normals. The closing
//! axis is the pair direction, the approach comes from the cloud exterior,
//! and the baseline score is
//!
//! ```text
//! S = score_gain · q · |points inside the closing region|
//! q = ((-n_a · d) + (n_b · d)) / 2
//! ```
//!
//! with `d` the unit pair direction and outward normals `n_a`, `n_b`.
//! A candidate needs `min_contact_support` region points facing each jaw
//! (normal within `alignment_deg` of that jaw's closing direction), which
//! rejects pairs built on a single stray normal, and candidates whose finger
//! bodies would sweep through the cloud are dropped. Non-maximum suppression
//! then keeps the best `k` distinct poses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{closing_region, in_finger_slab, GraspCandidate, GraspPose, GraspSource, GripperModel};
use crate::cloud::{estimate_normals, NormalOrientation, Point3, PointCloud, RigidTransform, Vector3};
use crate::error::{Error, Result};
use crate::numeric::derive_seed;

/// Minimum cloud size accepted by the sampler.
pub const MIN_POINTS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreScale {
    /// Hundreds to thousands, like GPD.
    Unnormalized,
    /// `[0, 1]`, like PointNetGPD.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Batches per round; rounds repeat until `k` candidates survive or
    /// `max_batches` have been drawn.
    pub batches: usize,
    pub max_batches: usize,
    pub anchors_per_batch: usize,
    pub normal_neighbors: usize,
    /// Minimum angle between the two contact normals, degrees.
    pub opposition_deg: f64,
    /// Maximum angle between each normal and the pair direction, degrees.
    pub alignment_deg: f64,
    /// Pairs closer than this are skipped, meters.
    pub min_separation: f64,
    /// Random roll of the approach about the closing axis, radians.
    pub approach_jitter: f64,
    pub min_contact_support: usize,
    /// Reject poses whose finger slabs contain cloud points.
    pub collision_check: bool,
    /// Finger thickness beyond the pad face, meters.
    pub finger_thickness: f64,
    /// How far behind the pads the fingers are checked, meters.
    pub finger_clearance: f64,
    /// Table normal; approaches moving along it (from below) are rejected.
    pub up: Option<[f64; 3]>,
    /// Largest accepted `approach · up`.
    pub max_upward_approach: f64,
    pub nms_threshold: f64,
    /// Meters per radian in the pose distance.
    pub nms_rotation_weight: f64,
    pub score_scale: ScoreScale,
    pub score_gain: f64,
    /// Orient normals toward this point instead of away from the centroid.
    pub viewpoint: Option<[f64; 3]>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            batches: 16,
            max_batches: 256,
            anchors_per_batch: 64,
            normal_neighbors: 20,
            opposition_deg: 150.0,
            alignment_deg: 30.0,
            min_separation: 0.005,
            approach_jitter: 0.4,
            min_contact_support: 5,
            collision_check: true,
            finger_thickness: 0.01,
            finger_clearance: 0.05,
            up: None,
            max_upward_approach: 0.2,
            nms_threshold: 0.02,
            nms_rotation_weight: 0.1,
            score_scale: ScoreScale::Unnormalized,
            score_gain: 10.0,
            viewpoint: None,
        }
    }
}

/// Translation distance plus weighted rotation angle, treating the two
/// jaw-swapped orientations (rotated half a turn about the approach) as the
/// same grasp.
pub fn grasp_distance(a: &GraspPose, b: &GraspPose, rotation_weight: f64) -> f64 {
    let dt = (a.pose.translation() - b.pose.translation()).norm();
    let rel = a.pose.rotation().transpose() * b.pose.rotation();
    let angle = |trace: f64| ((trace - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
    // Half turn about local x flips the signs of the y and z columns.
    let swapped_trace = rel[(0, 0)] - rel[(1, 1)] - rel[(2, 2)];
    dt + rotation_weight * angle(rel.trace()).min(angle(swapped_trace))
}

pub fn sample_grasps(cloud: &PointCloud, g: &GripperModel, k: usize, seed: u64) -> Result<Vec<GraspCandidate>> {
    sample_grasps_with(cloud, g, k, seed, &SamplerConfig::default())
}

struct Raw {
    pose: GraspPose,
    score: f64,
}

pub fn sample_grasps_with(
    cloud: &PointCloud,
    g: &GripperModel,
    k: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<Vec<GraspCandidate>> {
    if cloud.len() < MIN_POINTS {
        return Err(Error::TooFewPoints {
            required: MIN_POINTS,
            actual: cloud.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidValue("k must be at least 1".into()));
    }
    g.validate()?;
    let centroid = cloud.centroid().expect("non-empty cloud");
    let orientation = match cfg.viewpoint {
        Some(v) => NormalOrientation::Viewpoint(Point3::from(v)),
        None => NormalOrientation::Outward(centroid),
    };
    let normals = estimate_normals(cloud, cfg.normal_neighbors, orientation);
    let cos_oppose = cfg.opposition_deg.to_radians().cos();
    let cos_align = cfg.alignment_deg.to_radians().cos();
    let points = cloud.points();
    let up = cfg.up.and_then(|u| Vector3::from(u).try_normalize(1e-12));

    let draw_batch = |b: usize| -> Vec<Raw> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b as u64));
        let mut out = Vec::new();
        let mut partners = Vec::new();
        for _ in 0..cfg.anchors_per_batch {
            let a = rng.random_range(0..points.len());
            let (pa, na) = (points[a], normals[a]);
            partners.clear();
            partners.extend((0..points.len()).filter(|&j| {
                let v = points[j] - pa;
                let sep = v.norm();
                if sep < cfg.min_separation || sep > g.max_opening || na.dot(&normals[j]) > cos_oppose {
                    return false;
                }
                let d = v / sep;
                -na.dot(&d) >= cos_align && normals[j].dot(&d) >= cos_align
            }));
            if partners.is_empty() {
                continue;
            }
            let bj = partners[rng.random_range(0..partners.len())];
            let roll = rng.random_range(-1.0..=1.0) * cfg.approach_jitter;
            let d = (points[bj] - pa).normalize();
            let q = 0.5 * (-na.dot(&d) + normals[bj].dot(&d));
            let center = Point3::from((pa.coords + points[bj].coords) * 0.5);
            let Some(pose) = exterior_pose(center, d, centroid, up, roll) else {
                continue;
            };
            if up.is_some_and(|u| pose.approach().dot(&u) > cfg.max_upward_approach) {
                continue;
            }
            let region = closing_region(g, &pose);
            let rot_t = pose.pose.rotation().transpose();
            let (mut count, mut low, mut high, mut collides) = (0usize, 0usize, 0usize, false);
            for (p, n) in points.iter().zip(&normals) {
                if region.contains(p) {
                    count += 1;
                    let along = n.dot(&d);
                    low += usize::from(-along >= cos_align);
                    high += usize::from(along >= cos_align);
                } else if cfg.collision_check
                    && in_finger_slab(g, &(rot_t * (p - center)), cfg.finger_thickness, cfg.finger_clearance)
                {
                    collides = true;
                    break;
                }
            }
            if collides || count == 0 || low.min(high) < cfg.min_contact_support {
                continue;
            }
            let score = match cfg.score_scale {
                ScoreScale::Unnormalized => cfg.score_gain * q * count as f64,
                ScoreScale::Unit => q * (1.0 - (-(count as f64) / 50.0).exp()),
            };
            out.push(Raw { pose, score });
        }
        out
    };

    let mut raw: Vec<Raw> = Vec::new();
    let mut kept: Vec<GraspCandidate> = Vec::with_capacity(k);
    let mut drawn = 0;
    while kept.len() < k && drawn < cfg.max_batches.max(1) {
        let end = (drawn + cfg.batches.max(1)).min(cfg.max_batches.max(1));
        let fresh: Vec<Vec<Raw>> = (drawn..end).into_par_iter().map(draw_batch).collect();
        drawn = end;
        raw.extend(fresh.into_iter().flatten());
        raw.sort_by(|a, b| b.score.total_cmp(&a.score));
        kept.clear();
        for r in &raw {
            if kept.len() == k {
                break;
            }
            if kept
                .iter()
                .all(|c| grasp_distance(&c.grasp, &r.pose, cfg.nms_rotation_weight) > cfg.nms_threshold)
            {
                kept.push(GraspCandidate::new(r.pose, r.score, GraspSource::Sampler)?);
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::NoCandidates);
    }
    Ok(kept)
}

/// Approach pointing from outside the cloud toward `center`, orthogonal to
/// the closing axis, then rolled about it. Falls back to a top-down approach
/// when the center sits on the centroid line.
fn exterior_pose(center: Point3, closing: Vector3, centroid: Point3, up: Option<Vector3>, roll: f64) -> Option<GraspPose> {
    let inward = centroid - center;
    let project = |v: Vector3| (v - closing * closing.dot(&v)).try_normalize(1e-6);
    let base = project(inward)
        .or_else(|| project(-up.unwrap_or_else(Vector3::z)))
        .or_else(|| project(Vector3::x()))?;
    let approach = RigidTransform::from_axis_angle(closing, roll, Vector3::zeros()).transform_vector(&base);
    GraspPose::from_axes(center, approach, closing).ok()
}
