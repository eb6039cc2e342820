//! Symmetry-based toy completer with dropout-style stochasticity.
//!
//! The deterministic completion reflects the partial cloud through an
//! estimated symmetry plane. Stochasticity comes from a lattice of fixed
//! control displacements over the generated region: each draw applies a
//! Bernoulli keep-mask with inverted-dropout scaling and adds the deviation
//! from the mask-free output,
//!
//! ```text
//! Δ(x) = a(x) · Σ_k w_k(x) · (m_k / (1 - p) - 1) · v_k
//! ```
//!
//! so `p = 0` reproduces the reflection exactly and every draw is bounded by
//! `|v| · a(x) · Σ_k w_k(x)`. `a(x) = 1 + depth(x) / 2` grows with distance
//! behind the symmetry plane, putting most uncertainty on the far side.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CompletionBackend;
use crate::cloud::{covariance, sorted_eigen, Point3, PointCloud, Vector3};
use crate::error::{Error, Result};
use crate::numeric::derive_seed;

/// How to orient the symmetry plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetryHint {
    /// Normal = camera view direction projected onto the table plane.
    ViewAligned { camera: [f64; 3], table_normal: [f64; 3] },
    /// Normal = principal axis of smallest extent.
    PrincipalAxis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MirrorCompleterConfig {
    pub seed: u64,
    /// In `[0, 0.5]`.
    pub dropout_rate: f64,
    /// Control displacement magnitude, meters.
    pub perturbation_scale: f64,
    /// Control lattice nodes per axis.
    pub grid: [usize; 3],
    /// `N`.
    pub output_size: usize,
    /// Deterministic offset of the generated side along the plane normal,
    /// scaled by depth behind the plane (positive moves away from the
    /// partial). Zero for an unbiased completer.
    pub far_side_bias: f64,
    pub symmetry: SymmetryHint,
}

impl Default for MirrorCompleterConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dropout_rate: 0.15,
            perturbation_scale: 0.004,
            grid: [4, 4, 4],
            output_size: 2048,
            far_side_bias: 0.0,
            symmetry: SymmetryHint::PrincipalAxis,
        }
    }
}

impl MirrorCompleterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.dropout_rate) {
            return Err(Error::InvalidValue(format!(
                "dropout_rate must be in [0, 0.5], got {}",
                self.dropout_rate
            )));
        }
        if !(self.perturbation_scale > 0.0 && self.perturbation_scale.is_finite()) {
            return Err(Error::InvalidValue("perturbation_scale must be positive".into()));
        }
        if self.grid.contains(&0) {
            return Err(Error::InvalidValue("grid resolution must be >= 1 per axis".into()));
        }
        if self.output_size == 0 {
            return Err(Error::InvalidValue("output_size must be positive".into()));
        }
        if !self.far_side_bias.is_finite() {
            return Err(Error::InvalidValue("far_side_bias must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MirrorCompleter {
    config: MirrorCompleterConfig,
}

/// Deterministic part of a completion, shared by every draw.
#[derive(Clone, Debug)]
pub struct MirrorLayout {
    pub plane_point: Point3,
    /// Unit normal, pointing from the partial toward the generated side.
    pub plane_normal: Vector3,
    /// Generated points before perturbation (`N - P` of them).
    pub base: Vec<Point3>,
    /// Amplitude factor `a(x)` per generated point.
    pub amplitude: Vec<f64>,
    pub nodes: Vec<Point3>,
    /// Control displacement per node, magnitude `perturbation_scale`.
    pub controls: Vec<Vector3>,
    pub kernel_width: f64,
}

impl MirrorLayout {
    pub fn weight(&self, x: &Point3, node: usize) -> f64 {
        let d2 = (x - self.nodes[node]).norm_squared();
        (-d2 / (2.0 * self.kernel_width * self.kernel_width)).exp()
    }

    /// `a(x) Σ_k w_k(x)` for generated point `j`.
    pub fn weight_sum(&self, j: usize) -> f64 {
        self.amplitude[j] * (0..self.nodes.len()).map(|k| self.weight(&self.base[j], k)).sum::<f64>()
    }
}

impl MirrorCompleter {
    pub fn new(config: MirrorCompleterConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &MirrorCompleterConfig {
        &self.config
    }

    fn plane(&self, partial: &PointCloud) -> (Point3, Vector3) {
        let centroid = partial.centroid().expect("non-empty partial");
        if let SymmetryHint::ViewAligned { camera, table_normal } = self.config.symmetry {
            let up = Vector3::from(table_normal).try_normalize(1e-12);
            let view = centroid - Point3::from(camera);
            if let Some(up) = up {
                if let Some(n) = (view - up * view.dot(&up)).try_normalize(1e-9) {
                    return (centroid, n);
                }
            }
        }
        let (_, cov) = covariance(partial.iter().copied()).expect("non-empty partial");
        let mut n = sorted_eigen(cov).1[0];
        if let Some(first) = n.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                n = -n;
            }
        }
        (centroid, n)
    }

    /// Everything but the per-draw mask.
    pub fn layout(&self, partial: &PointCloud) -> Result<MirrorLayout> {
        let cfg = &self.config;
        if partial.is_empty() {
            return Err(Error::EmptyPartial);
        }
        let p = partial.len();
        if p >= cfg.output_size {
            return Err(Error::PartialTooLarge {
                partial: p,
                output: cfg.output_size,
            });
        }
        let (c, n) = self.plane(partial);
        let reflected: Vec<Point3> = partial
            .iter()
            .map(|q| q - n * (2.0 * (q - c).dot(&n)))
            .collect();
        let g = cfg.output_size - p;
        let mut base: Vec<Point3> = (0..g)
            .map(|j| {
                let src = if g <= p { j * p / g } else { j % p };
                reflected[src]
            })
            .collect();

        let depth: Vec<f64> = base.iter().map(|x| (x - c).dot(&n).max(0.0)).collect();
        let max_depth = depth.iter().copied().fold(0.0, f64::max);
        let ramp: Vec<f64> = depth
            .iter()
            .map(|d| if max_depth > 0.0 { d / max_depth } else { 0.0 })
            .collect();
        if cfg.far_side_bias != 0.0 {
            for (x, r) in base.iter_mut().zip(&ramp) {
                *x += n * (cfg.far_side_bias * r);
            }
        }
        let amplitude = ramp.iter().map(|r| 1.0 + 0.5 * r).collect();

        let aabb = crate::cloud::Aabb::from_points(&base).expect("non-empty generated set");
        let ext = aabb.extents();
        let mut spacings = Vec::new();
        let mut nodes = Vec::with_capacity(cfg.grid.iter().product());
        for i in 0..cfg.grid[0] {
            for j in 0..cfg.grid[1] {
                for k in 0..cfg.grid[2] {
                    let frac = |idx: usize, res: usize| if res == 1 { 0.5 } else { idx as f64 / (res - 1) as f64 };
                    nodes.push(Point3::new(
                        aabb.min.x + ext.x * frac(i, cfg.grid[0]),
                        aabb.min.y + ext.y * frac(j, cfg.grid[1]),
                        aabb.min.z + ext.z * frac(k, cfg.grid[2]),
                    ));
                }
            }
        }
        for axis in 0..3 {
            if cfg.grid[axis] > 1 && ext[axis] > 0.0 {
                spacings.push(ext[axis] / (cfg.grid[axis] - 1) as f64);
            }
        }
        let kernel_width = if spacings.is_empty() {
            1.0
        } else {
            spacings.iter().sum::<f64>() / spacings.len() as f64
        };

        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));
        let controls = (0..nodes.len())
            .map(|_| random_unit(&mut rng) * cfg.perturbation_scale)
            .collect();
        Ok(MirrorLayout {
            plane_point: c,
            plane_normal: n,
            base,
            amplitude,
            nodes,
            controls,
            kernel_width,
        })
    }

    /// The per-draw scaled mask coefficients `m_k / (1 - p) - 1`.
    pub fn mask_coefficients(&self, nodes: usize, draw_seed: u64) -> Vec<f64> {
        let p = self.config.dropout_rate;
        if p == 0.0 {
            return vec![0.0; nodes];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.config.seed, draw_seed));
        (0..nodes)
            .map(|_| if rng.random::<f64>() < p { -1.0 } else { p / (1.0 - p) })
            .collect()
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Vector3 {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n2 = v.norm_squared();
        if n2 > 1e-6 && n2 <= 1.0 {
            return v / n2.sqrt();
        }
    }
}

impl CompletionBackend for MirrorCompleter {
    fn output_size(&self) -> usize {
        self.config.output_size
    }

    fn id(&self) -> &str {
        "mirror"
    }

    fn complete_once(&self, partial: &PointCloud, draw_seed: u64) -> Result<PointCloud> {
        let layout = self.layout(partial)?;
        let coef = self.mask_coefficients(layout.nodes.len(), draw_seed);
        let active: Vec<(usize, Vector3)> = coef
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| (k, layout.controls[k] * *c))
            .collect();
        let generated = layout.base.iter().enumerate().map(|(j, x)| {
            let mut d = Vector3::zeros();
            for (k, v) in &active {
                d += v * layout.weight(x, *k);
            }
            x + d * layout.amplitude[j]
        });
        let mut points = Vec::with_capacity(self.config.output_size);
        points.extend_from_slice(partial.points());
        points.extend(generated);
        PointCloud::new(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::complete_ensemble;

    fn half_cylinder() -> PointCloud {
        // Front half (y < 0) of a vertical cylinder, camera on -y.
        let mut pts = Vec::new();
        for i in 0..40 {
            for k in 0..20 {
                let theta = std::f64::consts::PI * (1.0 + i as f64 / 39.0);
                pts.push(Point3::new(0.03 * theta.cos(), 0.03 * theta.sin(), 0.01 * k as f64));
            }
        }
        PointCloud::new(pts).unwrap()
    }

    fn view_hint() -> SymmetryHint {
        SymmetryHint::ViewAligned {
            camera: [0.0, -0.5, 0.3],
            table_normal: [0.0, 0.0, 1.0],
        }
    }

    fn completer(rate: f64) -> MirrorCompleter {
        MirrorCompleter::new(MirrorCompleterConfig {
            dropout_rate: rate,
            symmetry: view_hint(),
            seed: 3,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn zero_dropout_is_plain_reflection() {
        let partial = half_cylinder();
        let m = completer(0.0);
        let a = m.complete_once(&partial, 1).unwrap();
        let b = m.complete_once(&partial, 999).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2048);
        assert_eq!(&a.points()[..partial.len()], partial.points());
        // Plane normal is +y through the centroid; reflection flips y about it.
        let cy = partial.centroid().unwrap().y;
        let p = partial.len();
        for j in 0..(2048 - p) {
            let src = partial[j % p];
            let g = a[p + j];
            assert!((g.x - src.x).abs() < 1e-15 && (g.z - src.z).abs() < 1e-15);
            assert!((g.y - (2.0 * cy - src.y)).abs() < 1e-15);
        }
    }

    #[test]
    fn draws_are_deterministic_and_bounded() {
        let partial = half_cylinder();
        let m = completer(0.3);
        let a = m.complete_once(&partial, 10).unwrap();
        assert_eq!(a, m.complete_once(&partial, 10).unwrap());
        let b = m.complete_once(&partial, 11).unwrap();
        let p = partial.len();
        assert_eq!(&a.points()[..p], &b.points()[..p]);

        let layout = m.layout(&partial).unwrap();
        let mut max_disp: f64 = 0.0;
        for j in 0..layout.base.len() {
            // Each draw moves a point at most scale * a(x) * Σ w_k from base.
            let bound = m.config().perturbation_scale * layout.weight_sum(j);
            for draw in [&a, &b] {
                let d = (draw[p + j] - layout.base[j]).norm();
                assert!(d <= bound * (1.0 + 1e-12), "j={j} d={d} bound={bound}");
            }
            max_disp = max_disp.max((a[p + j] - b[p + j]).norm());
        }
        assert!(max_disp > 0.0);
    }

    #[test]
    fn errors() {
        let m = completer(0.3);
        assert_eq!(m.complete_once(&PointCloud::empty(), 0).unwrap_err().kind(), "empty-partial-error");
        let big = MirrorCompleter::new(MirrorCompleterConfig { output_size: 10, ..Default::default() }).unwrap();
        assert_eq!(big.complete_once(&half_cylinder(), 0).unwrap_err().kind(), "partial-too-large-error");
        for bad in [0.6, -0.1] {
            let cfg = MirrorCompleterConfig { dropout_rate: bad, ..Default::default() };
            assert!(MirrorCompleter::new(cfg).is_err());
        }
        let cfg = MirrorCompleterConfig { perturbation_scale: 0.0, ..Default::default() };
        assert!(MirrorCompleter::new(cfg).is_err());
    }

    #[test]
    fn ensemble_shapes() {
        let partial = half_cylinder();
        let m = completer(0.0);
        let s = complete_ensemble(&m, &partial, 2, 5).unwrap();
        assert_eq!(s.passes()[0], s.passes()[1]);
        let m = completer(0.3);
        let s = complete_ensemble(&m, &partial, 60, 5).unwrap();
        assert_eq!((s.pass_count(), s.point_count(), s.partial_count()), (60, 2048, partial.len()));
        assert_eq!(s, complete_ensemble(&m, &partial, 60, 5).unwrap());
        assert_eq!(complete_ensemble(&m, &partial, 1, 5).unwrap_err().kind(), "invalid-T-error");
    }
}
