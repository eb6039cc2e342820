//! Commands behind the `ugrasp` binary. Each one is a pure function of its
//! input files and a [`PipelineConfig`]; all randomness comes from the
//! config's seeds.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cloud::{load_cloud, save_cloud, CloudFormat, ColorMap, Precision, SaveOptions};
use crate::completion::{complete_ensemble, write_ensemble_dir, MirrorCompleter};
use crate::error::{Error, Result};
use crate::eval::{run_experiment, write_experiment, ExperimentConfig, PrecisionReport};
use crate::gripper::{export_grasps, read_grasp_file, GraspCandidate};
use crate::rescore::{rescore, RankedList, RescoreReport};
use crate::scene::load_fixture_set;
use crate::uncertainty::{aggregate, generated_band_fraction, load_uncertain, save_uncertain, std_summary, StdSummary};

pub const ENSEMBLE_DIR: &str = "ensemble";
pub const UNCERTAIN_PLY: &str = "uncertain.ply";
pub const COMPLETE_REPORT: &str = "complete_report.json";
pub const RESCORE_REPORT: &str = "rescore_report.json";
pub const RANKED_GRASPS: &str = "ranked_grasps.json";

/// Lower and upper edge of the reported std band, meters.
pub const STD_BAND: (f64, f64) = (0.002, 0.006);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mirror,
}

/// Everything a run depends on, stored as one JSON file. Pipeline settings
/// sit at the top level next to the run settings below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub backend: BackendKind,
    /// Worker threads; `None` uses one per core.
    pub threads: Option<usize>,
    pub output: PathBuf,
    /// Scene fixture directory for `eval`.
    pub fixtures: Option<PathBuf>,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Mirror,
            threads: None,
            output: PathBuf::from("out"),
            fixtures: None,
            experiment: ExperimentConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::InvalidValue("threads must be at least 1".into()));
        }
        self.experiment.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), e.line()), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }
}

/// The stderr payload for a failed command.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteReport {
    #[serde(rename = "T")]
    pub passes: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "P")]
    pub partial_count: usize,
    pub seed: u64,
    pub summary: StdSummary,
    /// Fraction of generated points whose std lies in [`STD_BAND`].
    pub generated_in_band: f64,
}

/// Completes `partial` `T` times, writes the passes under `ensemble/`, the
/// aggregated cloud as `uncertain.ply` (float64, `std` property) and a
/// summary as `complete_report.json`.
pub fn cmd_complete(partial: &Path, cfg: &PipelineConfig) -> Result<CompleteReport> {
    cfg.validate()?;
    let input = load_cloud(partial, CloudFormat::from_path(partial))?.cloud;
    let exp = &cfg.experiment;
    let backend = match cfg.backend {
        BackendKind::Mirror => MirrorCompleter::new(exp.completer.clone())?,
    };
    let stack = complete_ensemble(&backend, &input, exp.passes, exp.seed)?;
    let uc = aggregate(&stack)?;

    create_dir(&cfg.output)?;
    write_ensemble_dir(&stack, cfg.output.join(ENSEMBLE_DIR), exp.seed, "mirror")?;
    save_uncertain(&uc, cfg.output.join(UNCERTAIN_PLY), Precision::F64, false)?;
    let report = CompleteReport {
        passes: stack.pass_count(),
        points: stack.point_count(),
        partial_count: stack.partial_count(),
        seed: exp.seed,
        summary: std_summary(&uc),
        generated_in_band: generated_band_fraction(&uc, STD_BAND.0, STD_BAND.1),
    };
    write_json(&cfg.output.join(COMPLETE_REPORT), &report)?;
    Ok(report)
}

/// Rescores the grasps in `grasps` against `uncertain`, writing the report
/// and the candidates in their new order with `S'` as score. A gripper
/// declared in the grasp file takes precedence over the config's.
pub fn cmd_rescore(uncertain: &Path, grasps: &Path, cfg: &PipelineConfig) -> Result<RankedList> {
    cfg.validate()?;
    let uc = load_uncertain(uncertain)?;
    let (cands, gripper, scale) = read_grasp_file(grasps)?;
    let gripper = gripper.unwrap_or(cfg.experiment.gripper);
    let list = rescore(&cands, &uc, &gripper, &cfg.experiment.rescore)?;

    create_dir(&cfg.output)?;
    RescoreReport::new(&list, &cfg.experiment.rescore).write(cfg.output.join(RESCORE_REPORT))?;
    let ranked = list
        .entries
        .iter()
        .map(|e| GraspCandidate::new(e.candidate.grasp, e.rescored, e.candidate.source))
        .collect::<Result<Vec<_>>>()?;
    export_grasps(&ranked, &gripper, scale, cfg.output.join(RANKED_GRASPS))?;
    Ok(list)
}

/// Runs both methods over every fixture under `fixtures` and writes the
/// report, the per-trial CSV and the timings file.
pub fn cmd_eval(fixtures: &Path, cfg: &PipelineConfig) -> Result<PrecisionReport> {
    cfg.validate()?;
    let set = load_fixture_set(fixtures)?;
    let outcome = run_experiment(&set, &cfg.experiment)?;
    write_experiment(&outcome, &cfg.output)?;
    Ok(outcome.report)
}

/// Writes `<stem>_viz.ply` into the output directory: the mean cloud with its
/// std and a blue (low) to red (high) color per vertex.
pub fn cmd_viz(uncertain: &Path, cfg: &PipelineConfig) -> Result<PathBuf> {
    let uc = load_uncertain(uncertain)?;
    let stem = uncertain.file_stem().and_then(|s| s.to_str()).unwrap_or("cloud");
    create_dir(&cfg.output)?;
    let path = cfg.output.join(format!("{stem}_viz.ply"));
    let opts = SaveOptions {
        precision: Precision::F32,
        scalar: Some(("std", uc.std())),
        color_map: Some(ColorMap::BlueRed),
    };
    save_cloud(uc.mean(), &path, CloudFormat::PlyBinaryLe, &opts)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::default();
        cfg.threads = Some(3);
        cfg.fixtures = Some("fixtures/scenes".into());
        cfg.experiment.seed = u64::MAX - 7;
        cfg.experiment.rescore.w_u = 0.1;
        cfg.experiment.completer.perturbation_scale = 0.1 + 0.2;
        let path = dir.path().join("c.json");
        cfg.save(&path).unwrap();
        assert_eq!(PipelineConfig::load(&path).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"T": 8, "rescore": {"W_u": 0.0}, "seed": 4}"#).unwrap();
        let cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.experiment.passes, 8);
        assert_eq!(cfg.experiment.rescore.w_u, 0.0);
        assert_eq!(cfg.experiment.seed, 4);
        assert_eq!(cfg.experiment.k_generate, 15);
    }

    #[test]
    fn invalid_config_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"T": 1}"#).unwrap();
        assert_eq!(PipelineConfig::load(&path).unwrap_err().kind(), "invalid-T-error");
        fs::write(&path, r#"{"k_generate": 3, "k_execute": 5}"#).unwrap();
        assert_eq!(PipelineConfig::load(&path).unwrap_err().kind(), "invalid-value-error");
        fs::write(&path, "{").unwrap();
        assert_eq!(PipelineConfig::load(&path).unwrap_err().kind(), "parse-error");
    }

    #[test]
    fn error_payload_is_json() {
        let v: serde_json::Value = serde_json::from_str(&error_json(&Error::NoCandidates)).unwrap();
        assert_eq!(v["error"], "no-candidates-error");
        assert_eq!(v["message"], "no grasp candidates found");
    }
}
