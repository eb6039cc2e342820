//! Stochastic completion ensemble and its per-point dispersion.
//!
//! Usage: `cargo run --release --example mc_ensemble [OUT.ply]`

use uncertain_grasp::completion::{complete_ensemble, MirrorCompleter, MirrorCompleterConfig, SymmetryHint};
use uncertain_grasp::eval::{observe_scene, ExperimentConfig};
use uncertain_grasp::scene::can_fixture;
use uncertain_grasp::uncertainty::{aggregate, generated_band_fraction, save_uncertain, std_summary};

fn main() -> uncertain_grasp::Result<()> {
    let cfg = ExperimentConfig::default();
    let fixture = can_fixture(0).build()?;
    let (partial, table_normal) = observe_scene(&fixture, &cfg)?;
    let cam = fixture.camera.origin();
    let completer = MirrorCompleter::new(MirrorCompleterConfig {
        symmetry: SymmetryHint::ViewAligned {
            camera: [cam.x, cam.y, cam.z],
            table_normal: table_normal.into(),
        },
        ..cfg.completer.clone()
    })?;

    let stack = complete_ensemble(&completer, &partial, cfg.passes, 0)?;
    let uc = aggregate(&stack)?;
    let s = std_summary(&uc);
    println!("T={} N={} P={}", stack.pass_count(), stack.point_count(), stack.partial_count());
    println!("observed  std: max {:.3} mm over {} points", s.observed.max_mm, s.observed.count);
    println!(
        "generated std: {:.2}..{:.2} mm, mean {:.2} mm, {:.1}% in [2, 6] mm",
        s.generated.min_mm,
        s.generated.max_mm,
        s.generated.mean_mm,
        100.0 * generated_band_fraction(&uc, 0.002, 0.006)
    );

    if let Some(out) = std::env::args().nth(1) {
        save_uncertain(&uc, &out, Default::default(), true)?;
        println!("wrote {out}");
    }
    Ok(())
}
