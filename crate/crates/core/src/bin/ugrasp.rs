use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uncertain_grasp::cli::{cmd_complete, cmd_eval, cmd_rescore, cmd_viz, error_json, PipelineConfig};
use uncertain_grasp::{Error, Result};

/// Uncertainty-aware grasp re-ranking over stochastic shape completions.
///
/// Settings are read from --config (JSON), then overridden by flags.
#[derive(Parser)]
#[command(name = "ugrasp", version)]
struct Cli {
    /// JSON pipeline config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete a partial cloud T times and aggregate mean and per-point std.
    Complete {
        partial: PathBuf,
        /// Number of stochastic passes.
        #[arg(long = "T")]
        passes: Option<usize>,
    },
    /// Re-rank grasp candidates by penalizing uncertainty in their closing region.
    Rescore {
        uncertain: PathBuf,
        grasps: PathBuf,
        /// Uncertainty weight.
        #[arg(long = "W_u")]
        w_u: Option<f64>,
    },
    /// Run baseline and rescored arms over a fixture directory.
    Eval {
        /// Defaults to the config's `fixtures`.
        fixtures: Option<PathBuf>,
        #[arg(long)]
        k_generate: Option<usize>,
        #[arg(long)]
        k_execute: Option<usize>,
    },
    /// Write a std heat-map PLY.
    Viz { uncertain: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = Some(threads);
    }
    if let Some(output) = cli.output {
        cfg.output = output;
    }
    match &cli.command {
        Command::Complete { passes: Some(t), .. } => cfg.experiment.passes = *t,
        Command::Rescore { w_u: Some(w), .. } => cfg.experiment.rescore.w_u = *w,
        Command::Eval { k_generate, k_execute, .. } => {
            cfg.experiment.k_generate = k_generate.unwrap_or(cfg.experiment.k_generate);
            cfg.experiment.k_execute = k_execute.unwrap_or(cfg.experiment.k_execute);
        }
        _ => {}
    }
    cfg.validate()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidValue(format!("thread pool: {e}")))?;
    }

    match &cli.command {
        Command::Complete { partial, .. } => {
            let r = cmd_complete(partial, &cfg)?;
            println!(
                "T={} N={} P={}  generated std {:.2}-{:.2} mm (mean {:.2}), {:.1}% in band",
                r.passes,
                r.points,
                r.partial_count,
                r.summary.generated.min_mm,
                r.summary.generated.max_mm,
                r.summary.generated.mean_mm,
                100.0 * r.generated_in_band
            );
        }
        Command::Rescore { uncertain, grasps, .. } => {
            let list = cmd_rescore(uncertain, grasps, &cfg)?;
            println!("permutation {:?}", list.permutation);
        }
        Command::Eval { fixtures, .. } => {
            let dir = fixtures
                .clone()
                .or_else(|| cfg.fixtures.clone())
                .ok_or_else(|| Error::InvalidValue("no fixture directory given".into()))?;
            let report = cmd_eval(&dir, &cfg)?;
            for m in &report.methods {
                println!(
                    "{:<9} trials {:>3}  P@1 {:.3}  P@5 {:.3}",
                    m.method.as_str(),
                    m.trials,
                    m.precision_at_1,
                    m.precision_at_5
                );
            }
        }
        Command::Viz { uncertain } => {
            println!("{}", cmd_viz(uncertain, &cfg)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}
