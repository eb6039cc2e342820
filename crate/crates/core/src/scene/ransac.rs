use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Plane;
use crate::cloud::{Point3, PointCloud, Vector3};
use crate::error::{Error, Result};

/// Fixed RANSAC hypothesis count.
pub const RANSAC_ITERATIONS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    /// Oriented toward the side holding most outliers (the object).
    pub plane: Plane,
    pub inliers: Vec<usize>,
    /// Indices of the remaining points, ascending.
    pub outliers: Vec<usize>,
    /// `cloud.select(&outliers)`.
    pub object: PointCloud,
}

fn plane_through(a: &Point3, b: &Point3, c: &Point3) -> Option<Plane> {
    let n = (b - a).cross(&(c - a));
    let scale = (b - a).norm() * (c - a).norm();
    if !(n.norm() > 1e-12 * scale) {
        return None;
    }
    Plane::from_point_normal(a, &n).ok()
}

/// RANSAC plane fit; returns the plane with the most inliers within
/// `distance_tol` and the cloud with those inliers removed.
///
/// Ties keep the earliest hypothesis, so results are a pure function of
/// `(cloud, distance_tol, min_inliers, seed)`.
pub fn segment_plane(cloud: &PointCloud, distance_tol: f64, min_inliers: usize, seed: u64) -> Result<Segmentation> {
    if cloud.len() < 3 {
        return Err(Error::InsufficientPoints {
            required: 3,
            actual: cloud.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = cloud.points();
    let mut best: Option<(usize, Plane)> = None;
    for _ in 0..RANSAC_ITERATIONS {
        let pick = rand::seq::index::sample(&mut rng, pts.len(), 3);
        let Some(plane) = plane_through(&pts[pick.index(0)], &pts[pick.index(1)], &pts[pick.index(2)]) else {
            continue;
        };
        let count = pts
            .iter()
            .filter(|p| plane.signed_distance(p).abs() <= distance_tol)
            .count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, plane));
        }
    }
    let (count, plane) = best.ok_or(Error::NoPlaneFound {
        best: 0,
        required: min_inliers,
    })?;
    if count < min_inliers {
        return Err(Error::NoPlaneFound {
            best: count,
            required: min_inliers,
        });
    }
    let (inliers, outliers): (Vec<usize>, Vec<usize>) =
        (0..pts.len()).partition(|&i| plane.signed_distance(&pts[i]).abs() <= distance_tol);

    let outlier_side: f64 = outliers.iter().map(|&i| plane.signed_distance(&pts[i])).sum();
    let plane = if outlier_side < 0.0 || (outliers.is_empty() && canonical_negative(plane.normal())) {
        plane.flipped()
    } else {
        plane
    };
    let object = cloud.select(&outliers);
    Ok(Segmentation {
        plane,
        inliers,
        outliers,
        object,
    })
}

/// First nonzero component negative.
fn canonical_negative(n: &Vector3) -> bool {
    n.iter().find(|c| **c != 0.0).is_some_and(|c| *c < 0.0)
}
