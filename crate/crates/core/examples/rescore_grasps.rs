//! Uncertainty rescoring on the can scene: far-side grasps get demoted.

use uncertain_grasp::eval::{mirror_backend, run_scene, ExperimentConfig};
use uncertain_grasp::scene::can_fixture;

fn main() -> uncertain_grasp::Result<()> {
    let cfg = ExperimentConfig::default();
    let fixture = can_fixture(0).build()?;
    let out = run_scene(&fixture, &cfg, &mirror_backend(&cfg.completer))?;
    let hidden = out.hidden_direction(&uncertain_grasp::cloud::Vector3::z()).expect("camera is not overhead");

    println!("W_u = {:e}", cfg.rescore.w_u);
    println!("rank  depth_mm  crop  penalty_m        S        S'  new");
    for r in &out.records {
        let depth = (uncertain_grasp::cloud::Point3::from(r.center) - out.partial_centroid).dot(&hidden);
        let new = out.permutation.iter().position(|&p| p == r.original_rank).unwrap() + 1;
        println!(
            "{:>4}  {:>8.1}  {:>4}  {:>9.4}  {:>7.1}  {:>8.1}  {:>3}",
            r.original_rank,
            depth * 1e3,
            r.crop_size,
            r.penalty_m,
            r.score,
            r.rescored,
            new
        );
    }
    println!("top-5 after rescoring: {:?}", &out.permutation[..5]);
    Ok(())
}
