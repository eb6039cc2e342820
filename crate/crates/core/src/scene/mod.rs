//! Synthetic single-view tabletop scenes.
//!
//! A [`Scene`] holds the full ground-truth surface of one object resting on a
//! table plane. [`render_partial_view`] keeps the points a [`VirtualCamera`]
//! can see (spherical-flip hidden-point removal), and [`segment_plane`]
//! strips the table from a capture.

mod fixture;
mod hull;
mod ransac;
mod shapes;

pub use fixture::{adversarial_fixture_set, can_fixture, generate_fixture_set, load_fixture_set, SceneFixture, SceneSpec};
pub use ransac::{segment_plane, Segmentation, RANSAC_ITERATIONS};
pub use shapes::ObjectShape;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{estimate_normals, NormalOrientation, Point3, PointCloud, RigidTransform, Vector3};
use crate::error::{Error, Result};

/// Plane `normal · p + offset = 0` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneRepr", into = "PlaneRepr")]
pub struct Plane {
    normal: Vector3,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    normal: [f64; 3],
    offset: f64,
}

impl TryFrom<PlaneRepr> for Plane {
    type Error = Error;

    fn try_from(r: PlaneRepr) -> Result<Self> {
        Plane::new(Vector3::from(r.normal), r.offset)
    }
}

impl From<Plane> for PlaneRepr {
    fn from(p: Plane) -> Self {
        PlaneRepr {
            normal: p.normal.into(),
            offset: p.offset,
        }
    }
}

impl Plane {
    /// `normal` must already have unit length (within 1e-9).
    pub fn new(normal: Vector3, offset: f64) -> Result<Self> {
        if !((normal.norm() - 1.0).abs() <= 1e-9) || !offset.is_finite() {
            return Err(Error::InvalidValue(format!(
                "plane normal must be unit length, got |n| = {}",
                normal.norm()
            )));
        }
        Ok(Self { normal, offset })
    }

    /// Plane through `point` with normal direction `normal` (normalized here).
    pub fn from_point_normal(point: &Point3, normal: &Vector3) -> Result<Self> {
        let n = normal
            .try_normalize(1e-15)
            .ok_or_else(|| Error::InvalidValue("zero plane normal".into()))?;
        Self::new(n, -n.dot(&point.coords))
    }

    /// Table plane `z = 0` facing up.
    pub fn ground() -> Self {
        Self {
            normal: Vector3::z(),
            offset: 0.0,
        }
    }

    pub fn normal(&self) -> &Vector3 {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            offset: -self.offset,
        }
    }

    /// Orthonormal in-plane basis.
    pub fn basis(&self) -> (Vector3, Vector3) {
        let helper = if self.normal.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = self.normal.cross(&helper).normalize();
        (u, self.normal.cross(&u))
    }

    /// Foot of the perpendicular from `p`.
    pub fn project(&self, p: &Point3) -> Point3 {
        p - self.normal * self.signed_distance(p)
    }
}

/// Pinhole stand-in: only the camera position matters for visibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualCamera {
    /// Camera-to-world; the camera looks along its local +z.
    pub pose: RigidTransform,
    /// Spherical-flip radius as a multiple of the farthest point distance.
    #[serde(default = "default_removal_radius_scale")]
    pub removal_radius_scale: f64,
}

fn default_removal_radius_scale() -> f64 {
    100.0
}

impl VirtualCamera {
    pub fn new(pose: RigidTransform) -> Self {
        Self {
            pose,
            removal_radius_scale: default_removal_radius_scale(),
        }
    }

    /// Camera at `eye` looking at `target`, image "down" roughly along `-up`.
    pub fn look_at(eye: Point3, target: Point3, up: Vector3) -> Result<Self> {
        let z = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidValue("camera eye equals target".into()))?;
        // Columns: right (x), down (y), forward (z).
        let x = (-up)
            .cross(&z)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidValue("camera up is parallel to the view direction".into()))?;
        let pose = RigidTransform::from_frame(x, z.cross(&x), eye)?;
        Ok(Self::new(pose))
    }

    pub fn origin(&self) -> Point3 {
        Point3::from(*self.pose.translation())
    }

    pub fn forward(&self) -> Vector3 {
        self.pose.rotation().column(2).into_owned()
    }
}

/// One object on a table, with its full ground-truth surface in world frame.
#[derive(Clone, Debug)]
pub struct Scene {
    pub ground_truth: PointCloud,
    pub table_plane: Plane,
    pub object_pose: RigidTransform,
    normals: Vec<Vector3>,
}

/// Neighbourhood size for ground-truth normal estimation.
const GROUND_TRUTH_NORMAL_K: usize = 20;

impl Scene {
    /// Builds a scene; ground-truth normals are estimated once here (PCA over
    /// 20 neighbours, oriented away from the cloud centroid).
    pub fn new(ground_truth: PointCloud, table_plane: Plane, object_pose: RigidTransform) -> Self {
        let normals = match ground_truth.centroid() {
            Some(c) => estimate_normals(&ground_truth, GROUND_TRUTH_NORMAL_K, NormalOrientation::Outward(c)),
            None => Vec::new(),
        };
        Self {
            ground_truth,
            table_plane,
            object_pose,
            normals,
        }
    }

    pub fn ground_truth_normals(&self) -> &[Vector3] {
        &self.normals
    }
}

/// Points of the ground truth visible from the camera, in input order.
///
/// Spherical flipping about the camera center followed by a convex hull of
/// the flipped set plus the center; a point is visible iff its flipped image
/// is a hull vertex. Coordinates are copied from the input unchanged.
pub fn render_partial_view(scene: &Scene, cam: &VirtualCamera) -> Result<PointCloud> {
    Ok(scene.ground_truth.select(&visible_indices(&scene.ground_truth, cam)?))
}

/// Indices used by [`render_partial_view`].
pub fn visible_indices(cloud: &PointCloud, cam: &VirtualCamera) -> Result<Vec<usize>> {
    if cloud.is_empty() {
        return Err(Error::EmptyScene);
    }
    if !(cam.removal_radius_scale > 0.0) {
        return Err(Error::InvalidValue("removal_radius_scale must be positive".into()));
    }
    let origin = cam.origin();
    let rel: Vec<(usize, Vector3)> = cloud
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p - origin))
        .filter(|(_, d)| d.norm() > 0.0)
        .collect();
    if rel.is_empty() {
        return Ok(Vec::new());
    }
    let max_norm = rel.iter().map(|(_, d)| d.norm()).fold(0.0, f64::max);
    let radius = cam.removal_radius_scale * max_norm;
    let mut flipped: Vec<Vector3> = rel
        .iter()
        .map(|(_, d)| {
            let n = d.norm();
            d + d * (2.0 * (radius - n) / n)
        })
        .collect();
    flipped.push(Vector3::zeros());
    let camera_slot = flipped.len() - 1;
    Ok(hull::hull_vertices(&flipped)
        .into_iter()
        .filter(|&v| v != camera_slot)
        .map(|v| rel[v].0)
        .collect())
}

/// Table samples that a capture adds around the object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TablePatch {
    /// Half side of the square patch centred under the object, meters.
    pub half_size: f64,
    pub count: usize,
    /// Table samples closer than this (in-plane) to the object footprint are
    /// dropped as hidden under the object.
    pub footprint_clearance: f64,
}

impl Default for TablePatch {
    fn default() -> Self {
        Self {
            half_size: 0.15,
            count: 1500,
            footprint_clearance: 0.01,
        }
    }
}

/// Single-view capture: visible object points followed by table points.
pub fn capture_view(scene: &Scene, cam: &VirtualCamera, patch: &TablePatch, seed: u64) -> Result<PointCloud> {
    let partial = render_partial_view(scene, cam)?;
    let plane = &scene.table_plane;
    let center = plane.project(&Point3::from(*scene.object_pose.translation()));
    let (u, w) = plane.basis();
    let footprint: Vec<(f64, f64)> = scene
        .ground_truth
        .iter()
        .map(|p| {
            let d = p - center;
            (d.dot(&u), d.dot(&w))
        })
        .collect();
    let clearance2 = patch.footprint_clearance * patch.footprint_clearance;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Vec::with_capacity(patch.count);
    for _ in 0..patch.count {
        let a = rng.random_range(-patch.half_size..=patch.half_size);
        let b = rng.random_range(-patch.half_size..=patch.half_size);
        let hidden = footprint
            .iter()
            .any(|(fa, fb)| (fa - a).powi(2) + (fb - b).powi(2) < clearance2);
        if !hidden {
            table.push(center + u * a + w * b);
        }
    }
    Ok(partial.concat(&PointCloud::new(table)?))
}
