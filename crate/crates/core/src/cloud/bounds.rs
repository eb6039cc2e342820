use super::transform::check_rotation;
use super::{Matrix3, Point3, PointCloud, Vector3, TRANSFORM_TOLERANCE};
use crate::error::{Error, Result};

/// Slack added to every half extent in containment tests, in meters.
pub const OBB_TOLERANCE: f64 = 1e-12;

/// Axis-aligned box, `min <= max` componentwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn from_points(points: &[Point3]) -> Option<Self> {
        let first = points.first()?;
        let (min, max) = points.iter().fold((*first, *first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        });
        Some(Self { min, max })
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn center(&self) -> Point3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn extents(&self) -> Vector3 {
        self.max - self.min
    }

    /// Half the diagonal length.
    pub fn radius(&self) -> f64 {
        0.5 * self.extents().norm()
    }
}

/// Oriented box: `axes` columns are the local x, y, z directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Obb {
    center: Point3,
    axes: Matrix3,
    half_extents: Vector3,
}

impl Obb {
    pub fn new(center: Point3, axes: Matrix3, half_extents: Vector3) -> Result<Self> {
        check_rotation(&axes, TRANSFORM_TOLERANCE)?;
        if !half_extents.iter().all(|h| h.is_finite() && *h >= 0.0) {
            return Err(Error::InvalidValue(format!(
                "box half extents must be finite and nonnegative, got {half_extents:?}"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidValue("box center is not finite".into()));
        }
        Ok(Self {
            center,
            axes,
            half_extents,
        })
    }

    pub fn axis_aligned(center: Point3, half_extents: Vector3) -> Result<Self> {
        Self::new(center, Matrix3::identity(), half_extents)
    }

    pub fn center(&self) -> &Point3 {
        &self.center
    }

    pub fn axes(&self) -> &Matrix3 {
        &self.axes
    }

    pub fn half_extents(&self) -> &Vector3 {
        &self.half_extents
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.x * self.half_extents.y * self.half_extents.z
    }

    /// Coordinates of `p` in the box frame.
    pub fn to_local(&self, p: &Point3) -> Vector3 {
        self.axes.transpose() * (p - self.center)
    }

    /// Closed-box test with [`OBB_TOLERANCE`] slack on every axis.
    pub fn contains(&self, p: &Point3) -> bool {
        let local = self.to_local(p);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i] + OBB_TOLERANCE)
    }

    /// The eight corners, sign pattern `(sx, sy, sz)` in binary order with
    /// `-` before `+`.
    pub fn corners(&self) -> [Point3; 8] {
        std::array::from_fn(|k| {
            let s = Vector3::new(
                if k & 4 == 0 { -1.0 } else { 1.0 },
                if k & 2 == 0 { -1.0 } else { 1.0 },
                if k & 1 == 0 { -1.0 } else { 1.0 },
            );
            self.center + self.axes * s.component_mul(&self.half_extents)
        })
    }
}

/// Indices of the points of `cloud` inside `obb`, ascending.
pub fn points_in_obb(cloud: &PointCloud, obb: &Obb) -> Vec<usize> {
    cloud
        .iter()
        .enumerate()
        .filter(|(_, p)| obb.contains(p))
        .map(|(i, _)| i)
        .collect()
}
