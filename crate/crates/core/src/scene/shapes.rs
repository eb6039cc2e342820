use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::Point3;

/// Primitive objects, in an object frame with the base on `z = 0` and the
/// vertical axis through the origin. Dimensions in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectShape {
    Box { size: [f64; 3] },
    Cylinder { radius: f64, height: f64 },
    Sphere { radius: f64 },
}

impl ObjectShape {
    /// `n` points uniform by area over the closed surface.
    pub fn sample_surface<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Point3> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    fn sample_one<R: Rng>(&self, rng: &mut R) -> Point3 {
        match *self {
            ObjectShape::Box { size: [sx, sy, sz] } => {
                let areas = [sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy];
                let total: f64 = areas.iter().sum();
                let mut pick = rng.random::<f64>() * total;
                let mut face = 5;
                for (i, a) in areas.iter().enumerate() {
                    if pick < *a {
                        face = i;
                        break;
                    }
                    pick -= a;
                }
                let (u, v) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                let (hx, hy) = (sx / 2.0, sy / 2.0);
                match face {
                    0 => Point3::new(-hx, u * sy, (v + 0.5) * sz),
                    1 => Point3::new(hx, u * sy, (v + 0.5) * sz),
                    2 => Point3::new(u * sx, -hy, (v + 0.5) * sz),
                    3 => Point3::new(u * sx, hy, (v + 0.5) * sz),
                    4 => Point3::new(u * sx, v * sy, 0.0),
                    _ => Point3::new(u * sx, v * sy, sz),
                }
            }
            ObjectShape::Cylinder { radius, height } => {
                let side = 2.0 * PI * radius * height;
                let cap = PI * radius * radius;
                let pick = rng.random::<f64>() * (side + 2.0 * cap);
                let theta = rng.random::<f64>() * 2.0 * PI;
                if pick < side {
                    Point3::new(radius * theta.cos(), radius * theta.sin(), rng.random::<f64>() * height)
                } else {
                    let r = radius * rng.random::<f64>().sqrt();
                    let z = if pick < side + cap { 0.0 } else { height };
                    Point3::new(r * theta.cos(), r * theta.sin(), z)
                }
            }
            ObjectShape::Sphere { radius } => {
                let z: f64 = rng.random_range(-1.0..1.0);
                let theta = rng.random::<f64>() * 2.0 * PI;
                let r = (1.0 - z * z).sqrt();
                Point3::new(radius * r * theta.cos(), radius * r * theta.sin(), radius * (1.0 + z))
            }
        }
    }

    pub fn height(&self) -> f64 {
        match *self {
            ObjectShape::Box { size } => size[2],
            ObjectShape::Cylinder { height, .. } => height,
            ObjectShape::Sphere { radius } => 2.0 * radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_lie_on_surfaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cyl = ObjectShape::Cylinder { radius: 0.04, height: 0.2 };
        for p in cyl.sample_surface(500, &mut rng) {
            let r = (p.x * p.x + p.y * p.y).sqrt();
            assert!((r - 0.04).abs() < 1e-12 || p.z == 0.0 || p.z == 0.2);
        }
        let sphere = ObjectShape::Sphere { radius: 0.05 };
        for p in sphere.sample_surface(500, &mut rng) {
            assert!(((p - Point3::new(0.0, 0.0, 0.05)).norm() - 0.05).abs() < 1e-12);
        }
        let b = ObjectShape::Box { size: [0.05, 0.1, 0.2] };
        for p in b.sample_surface(500, &mut rng) {
            let on = (p.x.abs() - 0.025).abs() < 1e-12
                || (p.y.abs() - 0.05).abs() < 1e-12
                || p.z == 0.0
                || p.z == 0.2;
            assert!(on, "{p:?}");
        }
    }
}
