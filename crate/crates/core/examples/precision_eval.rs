//! Baseline vs rescored Precision@k on the standard and adversarial sets.
//!
//! Usage: `cargo run --release --example precision_eval [OUT_DIR]`

use uncertain_grasp::eval::{adversarial_scenes, run_experiment, write_experiment, ExperimentConfig, ExperimentOutcome};
use uncertain_grasp::scene::generate_fixture_set;

fn print(name: &str, out: &ExperimentOutcome) {
    println!("{name}");
    for m in &out.report.methods {
        println!(
            "  {:<9} trials {:>2}  P@1 {:.2}  P@5 {:.2}",
            m.method.as_str(),
            m.trials,
            m.precision_at_1,
            m.precision_at_5
        );
    }
}

fn main() -> uncertain_grasp::Result<()> {
    let cfg = ExperimentConfig::default();
    let standard = generate_fixture_set(10, 2024)
        .iter()
        .map(|s| s.build())
        .collect::<uncertain_grasp::Result<Vec<_>>>()?;
    let out = run_experiment(&standard, &cfg)?;
    print("standard set, unbiased completer", &out);

    let adv_cfg = ExperimentConfig::adversarial();
    let adversarial = adversarial_scenes(20, 2024, &adv_cfg)?;
    let adv = run_experiment(&adversarial, &adv_cfg)?;
    print(
        &format!("adversarial set, far side biased by {} m", adv_cfg.completer.far_side_bias),
        &adv,
    );

    if let Some(dir) = std::env::args().nth(1) {
        write_experiment(&adv, &dir)?;
        println!("wrote {dir}");
    }
    Ok(())
}
