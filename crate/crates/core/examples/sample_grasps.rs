//! Antipodal grasp sampling on a completed cloud, exported as JSON.
//!
//! Usage: `cargo run --release --example sample_grasps [OUT.json]`

use uncertain_grasp::completion::{complete_ensemble, MirrorCompleter};
use uncertain_grasp::eval::{observe_scene, ExperimentConfig};
use uncertain_grasp::gripper::{export_grasps, sample_grasps_with, SamplerConfig, ScoreScale};
use uncertain_grasp::scene::generate_fixture_set;
use uncertain_grasp::uncertainty::aggregate;

fn main() -> uncertain_grasp::Result<()> {
    let cfg = ExperimentConfig::default();
    let fixture = generate_fixture_set(1, 3)[0].build()?;
    let (partial, table_normal) = observe_scene(&fixture, &cfg)?;
    let completer = MirrorCompleter::new(cfg.completer.clone())?;
    let uc = aggregate(&complete_ensemble(&completer, &partial, cfg.passes, 0)?)?;

    let sampler = SamplerConfig {
        up: Some(table_normal.into()),
        ..Default::default()
    };
    let cands = sample_grasps_with(uc.mean(), &cfg.gripper, cfg.k_generate, 5, &sampler)?;
    println!("{:?}: {} candidates", fixture.shape.unwrap(), cands.len());
    for (i, c) in cands.iter().enumerate() {
        let (p, a, y) = (c.grasp.center(), c.grasp.approach(), c.grasp.closing());
        println!(
            "#{:<2} S {:7.1}  center [{:+.3} {:+.3} {:+.3}]  approach [{:+.2} {:+.2} {:+.2}]  closing [{:+.2} {:+.2} {:+.2}]",
            i + 1,
            c.score,
            p.x, p.y, p.z, a.x, a.y, a.z, y.x, y.y, y.z
        );
    }
    if let Some(out) = std::env::args().nth(1) {
        export_grasps(&cands, &cfg.gripper, ScoreScale::Unnormalized, &out)?;
        println!("wrote {out}");
    }
    Ok(())
}
