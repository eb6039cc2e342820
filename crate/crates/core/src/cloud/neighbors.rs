//! Brute-force k-nearest neighbours and PCA normal estimation.
//!
//! Clouds in this toolkit are a few thousand points, where an exhaustive scan
//! is fast enough and trivially deterministic.

use rayon::prelude::*;

use super::{covariance, sorted_eigen, Point3, PointCloud, Vector3};

/// Indices of the `k` nearest points to `query` (including any coincident
/// point), nearest first; ties broken by index.
pub fn k_nearest(cloud: &PointCloud, query: &Point3, k: usize) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = cloud
        .iter()
        .enumerate()
        .map(|(i, p)| ((p - query).norm_squared(), i))
        .collect();
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    scored.into_iter().map(|(_, i)| i).collect()
}

/// How to pick the sign of each estimated normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalOrientation {
    /// Normals point toward this viewpoint.
    Viewpoint(Point3),
    /// Normals point away from this interior point.
    Outward(Point3),
}

/// Unit normal per point: smallest-variance direction of its `k` nearest
/// neighbours, signed by `orientation`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, orientation: NormalOrientation) -> Vec<Vector3> {
    cloud
        .points()
        .par_iter()
        .map(|p| {
            let nn = k_nearest(cloud, p, k);
            let n = match covariance(nn.iter().map(|&i| cloud[i])) {
                Some((_, cov)) if nn.len() >= 3 => sorted_eigen(cov).1[0],
                _ => Vector3::z(),
            };
            let reference = match orientation {
                NormalOrientation::Viewpoint(v) => v - p,
                NormalOrientation::Outward(c) => p - c,
            };
            if n.dot(&reference) < 0.0 {
                -n
            } else {
                n
            }
        })
        .collect()
}
