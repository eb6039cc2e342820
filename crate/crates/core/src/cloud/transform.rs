use serde::{Deserialize, Serialize};

use super::{Matrix3, Point3, PointCloud, Vector3};
use crate::error::{Error, Result};

/// Orthonormality and determinant tolerance for rotations.
pub const TRANSFORM_TOLERANCE: f64 = 1e-9;

/// Proper rigid motion `p -> R p + t`.
///
/// Construction validates `R` (orthonormal, det = +1), so every value of this
/// type is a valid transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformRepr", into = "TransformRepr")]
pub struct RigidTransform {
    rotation: Matrix3,
    translation: Vector3,
}

/// Wire form: row-major rotation and translation.
#[derive(Serialize, Deserialize)]
pub(crate) struct TransformRepr {
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
}

impl TryFrom<TransformRepr> for RigidTransform {
    type Error = Error;

    fn try_from(r: TransformRepr) -> Result<Self> {
        RigidTransform::from_row_major(r.rotation, r.translation, TRANSFORM_TOLERANCE)
    }
}

impl From<RigidTransform> for TransformRepr {
    fn from(t: RigidTransform) -> Self {
        TransformRepr {
            rotation: t.rotation_row_major(),
            translation: [t.translation.x, t.translation.y, t.translation.z],
        }
    }
}

/// Checks orthonormality and `det = +1` within `tol`.
pub(crate) fn check_rotation(rotation: &Matrix3, tol: f64) -> Result<()> {
    if !rotation.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidTransform("non-finite rotation entry".into()));
    }
    let gram = rotation.transpose() * rotation;
    let off = (gram - Matrix3::identity()).abs().max();
    if off > tol {
        return Err(Error::InvalidTransform(format!(
            "rotation is not orthonormal (max |R^T R - I| = {off:e})"
        )));
    }
    let det = rotation.determinant();
    if (det - 1.0).abs() > tol {
        return Err(Error::InvalidTransform(format!(
            "rotation determinant is {det}, expected +1"
        )));
    }
    Ok(())
}

impl RigidTransform {
    pub fn new(rotation: Matrix3, translation: Vector3) -> Result<Self> {
        Self::with_tolerance(rotation, translation, TRANSFORM_TOLERANCE)
    }

    pub fn with_tolerance(rotation: Matrix3, translation: Vector3, tol: f64) -> Result<Self> {
        check_rotation(&rotation, tol)?;
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite translation".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn from_row_major(rotation: [f64; 9], translation: [f64; 3], tol: f64) -> Result<Self> {
        Self::with_tolerance(
            Matrix3::from_row_slice(&rotation),
            Vector3::from(translation),
            tol,
        )
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation by `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vector3, angle: f64, translation: Vector3) -> Self {
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        Self {
            rotation: *rot.matrix(),
            translation,
        }
    }

    /// Builds a frame whose columns are `x`, `y` and `x × y`.
    ///
    /// `x` and `y` are orthonormalized (Gram-Schmidt, `x` kept), so they only
    /// need to be linearly independent.
    pub fn from_frame(x: Vector3, y: Vector3, origin: Point3) -> Result<Self> {
        let xn = x.try_normalize(1e-12).ok_or_else(|| {
            Error::InvalidTransform("degenerate frame: zero x axis".into())
        })?;
        let yn = (y - xn * xn.dot(&y)).try_normalize(1e-12).ok_or_else(|| {
            Error::InvalidTransform("degenerate frame: y parallel to x".into())
        })?;
        let zn = xn.cross(&yn);
        Self::new(Matrix3::from_columns(&[xn, yn, zn]), origin.coords)
    }

    pub fn rotation(&self) -> &Matrix3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3 {
        &self.translation
    }

    pub fn rotation_row_major(&self) -> [f64; 9] {
        let r = &self.rotation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
        ]
    }

    pub fn transform_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn transform_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

pub fn apply_transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    PointCloud {
        points: cloud.iter().map(|p| t.transform_point(p)).collect(),
    }
}
