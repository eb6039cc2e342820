//! Scene fixtures on disk: one directory per scene holding
//! `ground_truth.ply` and `scene.json`.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ObjectShape, Plane, Scene, VirtualCamera};
use crate::cloud::{
    apply_transform, load_cloud, save_cloud, CloudFormat, Point3, PointCloud, RigidTransform, SaveOptions, Vector3,
};
use crate::error::{Error, Result};
use crate::numeric::derive_seed;

/// Recipe for one synthetic scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub id: String,
    pub shape: ObjectShape,
    /// Rotation about the table normal, radians.
    pub yaw: f64,
    /// Object base position on the table (x, y), meters.
    pub position: [f64; 2],
    /// Camera azimuth and elevation about the object, radians.
    pub camera_azimuth: f64,
    pub camera_elevation: f64,
    pub camera_distance: f64,
    pub points: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct SceneFixture {
    pub id: String,
    pub scene: Scene,
    pub camera: VirtualCamera,
    /// Seeds every stochastic stage run on this scene.
    pub seed: u64,
    pub shape: Option<ObjectShape>,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    id: String,
    table_plane: Plane,
    object_pose: RigidTransform,
    camera: VirtualCamera,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape: Option<ObjectShape>,
}

const GROUND_TRUTH_FILE: &str = "ground_truth.ply";
const SCENE_FILE: &str = "scene.json";

impl SceneSpec {
    pub fn build(&self) -> Result<SceneFixture> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, 0));
        let local = self.shape.sample_surface(self.points, &mut rng);
        let pose = RigidTransform::from_axis_angle(
            Vector3::z(),
            self.yaw,
            Vector3::new(self.position[0], self.position[1], 0.0),
        );
        // Stored as float32 on disk; round now so a reloaded fixture is identical.
        let world = apply_transform(&PointCloud::new(local)?, &pose)
            .into_points()
            .into_iter()
            .map(|p| p.map(|c| c as f32 as f64))
            .collect();
        let target = Point3::new(self.position[0], self.position[1], 0.5 * self.shape.height());
        let (az, el, d) = (self.camera_azimuth, self.camera_elevation, self.camera_distance);
        let eye = target + Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()) * d;
        Ok(SceneFixture {
            id: self.id.clone(),
            scene: Scene::new(PointCloud::new(world)?, Plane::ground(), pose),
            camera: VirtualCamera::look_at(eye, target, Vector3::z())?,
            seed: self.seed,
            shape: Some(self.shape),
        })
    }
}

impl SceneFixture {
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_cloud(
            &self.scene.ground_truth,
            dir.join(GROUND_TRUTH_FILE),
            CloudFormat::PlyBinaryLe,
            &SaveOptions::default(),
        )?;
        let file = SceneFile {
            id: self.id.clone(),
            table_plane: self.scene.table_plane,
            object_pose: self.scene.object_pose,
            camera: self.camera,
            seed: self.seed,
            shape: self.shape,
        };
        let json = serde_json::to_string_pretty(&file).expect("scene file serializes");
        let path = dir.join(SCENE_FILE);
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(SCENE_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let file: SceneFile = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), e.line()), e.to_string()))?;
        let gt = load_cloud(dir.join(GROUND_TRUTH_FILE), CloudFormat::PlyBinaryLe)?.cloud;
        Ok(SceneFixture {
            id: file.id,
            scene: Scene::new(gt, file.table_plane, file.object_pose),
            camera: file.camera,
            seed: file.seed,
            shape: file.shape,
        })
    }
}

/// The standard desk-scale set: a mix of boxes, cylinders and spheres placed
/// at seeded random poses, each seen from a seeded random viewpoint.
pub fn generate_fixture_set(count: usize, seed: u64) -> Vec<SceneSpec> {
    fixture_set(count, seed, 3)
}

/// A tall chip-tube-like can, 7.5 cm across and 23 cm high, seen from a
/// raised side view. Used to calibrate completion dispersion.
pub fn can_fixture(seed: u64) -> SceneSpec {
    SceneSpec {
        id: "can".into(),
        shape: ObjectShape::Cylinder {
            radius: 0.0375,
            height: 0.23,
        },
        yaw: 0.0,
        position: [0.0, 0.0],
        camera_azimuth: -std::f64::consts::FRAC_PI_2,
        camera_elevation: 0.5,
        camera_distance: 0.6,
        points: 2048,
        seed,
    }
}

/// Boxes and cylinders only, for runs with a biased completer. Spheres are
/// left out because every antipodal grasp on them succeeds whatever the far
/// side looks like, so they cannot separate two rankings.
pub fn adversarial_fixture_set(count: usize, seed: u64) -> Vec<SceneSpec> {
    fixture_set(count, seed, 2)
}

fn fixture_set(count: usize, seed: u64, kinds: usize) -> Vec<SceneSpec> {
    use rand::Rng;
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let shape = match i % kinds {
                0 => ObjectShape::Box {
                    size: [
                        rng.random_range(0.04..0.065),
                        rng.random_range(0.09..0.14),
                        rng.random_range(0.12..0.2),
                    ],
                },
                1 => ObjectShape::Cylinder {
                    radius: rng.random_range(0.028..0.038),
                    height: rng.random_range(0.12..0.22),
                },
                _ => ObjectShape::Sphere {
                    radius: rng.random_range(0.03..0.038),
                },
            };
            SceneSpec {
                id: format!("scene_{i:02}"),
                shape,
                yaw: rng.random_range(0.0..std::f64::consts::TAU),
                position: [rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)],
                camera_azimuth: rng.random_range(0.0..std::f64::consts::TAU),
                camera_elevation: rng.random_range(0.35..0.7),
                camera_distance: rng.random_range(0.5..0.7),
                points: 2048,
                seed: derive_seed(seed, 1000 + i as u64),
            }
        })
        .collect()
}

/// Loads every fixture subdirectory of `dir`, sorted by directory name.
pub fn load_fixture_set(dir: impl AsRef<Path>) -> Result<Vec<SceneFixture>> {
    let dir = dir.as_ref();
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.join(SCENE_FILE).is_file())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::Format(format!("no scene fixtures under {}", dir.display())));
    }
    subdirs.iter().map(SceneFixture::load).collect()
}
