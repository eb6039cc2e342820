//! Writes the shipped fixtures:
//!
//! - `scenes/`: the 10-scene standard set (seed 2024)
//! - `can/`: the can calibration scene, `can_partial.ply` its segmented view,
//!   `can_grasps.json` sampled candidates on its completed cloud
//! - `config.json`: the default pipeline config
//!
//! Usage: `cargo run --release --example make_fixtures [DIR]` (default `fixtures`).

use std::path::PathBuf;

use uncertain_grasp::cli::PipelineConfig;
use uncertain_grasp::cloud::{save_cloud, CloudFormat, Precision, SaveOptions};
use uncertain_grasp::completion::{complete_ensemble, MirrorCompleter};
use uncertain_grasp::eval::observe_scene;
use uncertain_grasp::gripper::{export_grasps, sample_grasps_with, SamplerConfig, ScoreScale};
use uncertain_grasp::scene::{can_fixture, generate_fixture_set};
use uncertain_grasp::uncertainty::aggregate;

pub const STANDARD_SEED: u64 = 2024;

fn main() -> uncertain_grasp::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    for spec in generate_fixture_set(10, STANDARD_SEED) {
        spec.build()?.save(root.join("scenes").join(&spec.id))?;
    }

    let cfg = PipelineConfig::default();
    let can = can_fixture(0).build()?;
    can.save(root.join("can"))?;
    let (partial, table_normal) = observe_scene(&can, &cfg.experiment)?;
    let opts = SaveOptions {
        precision: Precision::F64,
        ..Default::default()
    };
    save_cloud(&partial, root.join("can_partial.ply"), CloudFormat::PlyBinaryLe, &opts)?;

    let completer = MirrorCompleter::new(cfg.experiment.completer.clone())?;
    let uc = aggregate(&complete_ensemble(&completer, &partial, cfg.experiment.passes, cfg.experiment.seed)?)?;
    let sampler = SamplerConfig {
        up: Some(table_normal.into()),
        ..cfg.experiment.sampler.clone()
    };
    let cands = sample_grasps_with(uc.mean(), &cfg.experiment.gripper, 15, 1, &sampler)?;
    export_grasps(&cands, &cfg.experiment.gripper, ScoreScale::Unnormalized, root.join("can_grasps.json"))?;

    cfg.save(root.join("config.json"))?;
    println!("wrote fixtures under {}", root.display());
    Ok(())
}
