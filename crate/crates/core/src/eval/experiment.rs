//! Scene-by-scene pipeline: capture, table removal, ensemble completion,
//! aggregation, grasp sampling, rescoring, and oracle judgement.
//!
//! Both methods execute from the same candidate list; they differ only in
//! ranking.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{judge_grasp, ExecutedGrasp, Method, OracleConfig, OracleVerdict, PrecisionReport, StageTimings, TrialResult};
use crate::cloud::{Point3, PointCloud, Vector3};
use crate::completion::{complete_ensemble, CompletionBackend, MirrorCompleter, MirrorCompleterConfig, SymmetryHint};
use crate::error::{Error, Result, ResultExt};
use crate::gripper::{sample_grasps_with, GraspCandidate, GripperModel, SamplerConfig};
use crate::numeric::derive_seed;
use crate::rescore::{rescore, RescoreConfig};
use crate::scene::{adversarial_fixture_set, capture_view, segment_plane, SceneFixture, TablePatch};
use crate::uncertainty::{aggregate, UncertainCloud};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    pub distance_tol: f64,
    pub min_inliers: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            distance_tol: 0.001,
            min_inliers: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(rename = "T")]
    pub passes: usize,
    pub k_generate: usize,
    pub k_execute: usize,
    pub seed: u64,
    pub gripper: GripperModel,
    pub rescore: RescoreConfig,
    pub completer: MirrorCompleterConfig,
    pub sampler: SamplerConfig,
    pub oracle: OracleConfig,
    pub table_patch: TablePatch,
    pub segmentation: SegmentationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            passes: 60,
            k_generate: 15,
            k_execute: 5,
            seed: 0,
            gripper: GripperModel::default(),
            rescore: RescoreConfig::default(),
            completer: MirrorCompleterConfig::default(),
            sampler: SamplerConfig::default(),
            oracle: OracleConfig::default(),
            table_patch: TablePatch::default(),
            segmentation: SegmentationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.passes < 2 {
            return Err(Error::InvalidPassCount(self.passes));
        }
        if self.k_execute == 0 || self.k_execute > self.k_generate {
            return Err(Error::InvalidValue(format!(
                "need 1 <= k_execute <= k_generate, got {} and {}",
                self.k_execute, self.k_generate
            )));
        }
        self.gripper.validate()?;
        self.rescore.validate()?;
        self.completer.validate()
    }
}

/// What a completion backend factory sees for one scene.
pub struct SceneContext<'a> {
    pub fixture: &'a SceneFixture,
    /// Segmented object points.
    pub partial: &'a PointCloud,
    /// Fitted table normal, pointing toward the object.
    pub table_normal: Vector3,
    pub seed: u64,
}

pub type BackendFactory<'f> = dyn Fn(&SceneContext) -> Result<Box<dyn CompletionBackend>> + Sync + 'f;

/// The default backend: the mirror completer with its symmetry plane aligned
/// to the view and its lattice seeded per scene.
pub fn mirror_backend(cfg: &MirrorCompleterConfig) -> impl Fn(&SceneContext) -> Result<Box<dyn CompletionBackend>> + Sync + '_ {
    move |ctx| {
        let cam = ctx.fixture.camera.origin();
        let config = MirrorCompleterConfig {
            seed: derive_seed(ctx.seed, cfg.seed),
            symmetry: SymmetryHint::ViewAligned {
                camera: [cam.x, cam.y, cam.z],
                table_normal: ctx.table_normal.into(),
            },
            ..cfg.clone()
        };
        Ok(Box::new(MirrorCompleter::new(config)?) as Box<dyn CompletionBackend>)
    }
}

/// Per-candidate record kept for analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub original_rank: usize,
    pub center: [f64; 3],
    #[serde(rename = "S")]
    pub score: f64,
    #[serde(rename = "S_prime")]
    pub rescored: f64,
    pub penalty_m: f64,
    pub crop_size: usize,
    pub verdict: OracleVerdict,
}

#[derive(Clone, Debug)]
pub struct SceneOutcome {
    pub scene_id: String,
    pub camera: Point3,
    /// Centroid of the segmented partial cloud.
    pub partial_centroid: Point3,
    pub uncertain: UncertainCloud,
    pub candidates: Vec<GraspCandidate>,
    /// In original-rank order.
    pub records: Vec<CandidateRecord>,
    pub permutation: Vec<usize>,
    pub trials: Vec<TrialResult>,
    pub timings: StageTimings,
}

impl SceneOutcome {
    /// Unit view direction projected onto the table plane, pointing away
    /// from the camera; positive offsets along it are on the hidden side.
    pub fn hidden_direction(&self, table_normal: &Vector3) -> Option<Vector3> {
        let view = self.partial_centroid - self.camera;
        (view - table_normal * view.dot(table_normal)).try_normalize(1e-9)
    }
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot = start.elapsed().as_secs_f64() * 1e3;
    out
}

fn stage_seed(fixture: &SceneFixture, cfg: &ExperimentConfig, stage: u64) -> u64 {
    derive_seed(derive_seed(cfg.seed, fixture.seed), stage)
}

/// The segmented object cloud and table normal, exactly as [`run_scene`]
/// sees them.
pub fn observe_scene(fixture: &SceneFixture, cfg: &ExperimentConfig) -> Result<(PointCloud, Vector3)> {
    let capture = capture_view(&fixture.scene, &fixture.camera, &cfg.table_patch, stage_seed(fixture, cfg, 0))?;
    let seg = segment_plane(
        &capture,
        cfg.segmentation.distance_tol,
        cfg.segmentation.min_inliers,
        stage_seed(fixture, cfg, 1),
    )?;
    Ok((seg.object, *seg.plane.normal()))
}

pub fn run_scene(fixture: &SceneFixture, cfg: &ExperimentConfig, factory: &BackendFactory) -> Result<SceneOutcome> {
    let seed = |stage: u64| stage_seed(fixture, cfg, stage);
    let mut t = StageTimings::default();

    let capture = timed(&mut t.capture_ms, || {
        capture_view(&fixture.scene, &fixture.camera, &cfg.table_patch, seed(0))
    })?;
    let seg = timed(&mut t.segment_ms, || {
        segment_plane(&capture, cfg.segmentation.distance_tol, cfg.segmentation.min_inliers, seed(1))
    })?;
    let partial = seg.object;
    let partial_centroid = partial.centroid().ok_or(Error::EmptyPartial)?;
    let ctx = SceneContext {
        fixture,
        partial: &partial,
        table_normal: *seg.plane.normal(),
        seed: seed(2),
    };
    let backend = factory(&ctx)?;
    let stack = timed(&mut t.complete_ms, || complete_ensemble(backend.as_ref(), &partial, cfg.passes, seed(3)))?;
    let uc = timed(&mut t.aggregate_ms, || aggregate(&stack))?;
    drop(stack);
    let sampler = SamplerConfig {
        up: cfg.sampler.up.or(Some((*seg.plane.normal()).into())),
        ..cfg.sampler.clone()
    };
    let cands = timed(&mut t.sample_ms, || {
        sample_grasps_with(uc.mean(), &cfg.gripper, cfg.k_generate, seed(4), &sampler)
    })?;
    let ranked = timed(&mut t.rescore_ms, || rescore(&cands, &uc, &cfg.gripper, &cfg.rescore))?;
    let verdicts: Vec<OracleVerdict> = timed(&mut t.judge_ms, || {
        cands
            .par_iter()
            .map(|c| judge_grasp(c, &fixture.scene, &cfg.gripper, &cfg.oracle))
            .collect()
    });

    let mut records: Vec<CandidateRecord> = ranked
        .entries
        .iter()
        .map(|e| CandidateRecord {
            original_rank: e.original_rank,
            center: e.candidate.grasp.center().coords.into(),
            score: e.candidate.score,
            rescored: e.rescored,
            penalty_m: e.penalty,
            crop_size: e.crop_size,
            verdict: verdicts[e.original_rank - 1],
        })
        .collect();
    records.sort_by_key(|r| r.original_rank);

    let executed = |ranks: &mut dyn Iterator<Item = usize>| -> Vec<ExecutedGrasp> {
        ranks
            .take(cfg.k_execute)
            .map(|r| {
                let rec = &records[r - 1];
                ExecutedGrasp {
                    original_rank: r,
                    score: rec.score,
                    rescored: rec.rescored,
                    penalty_m: rec.penalty_m,
                    crop_size: rec.crop_size,
                    verdict: rec.verdict,
                    success: rec.verdict.success(),
                }
            })
            .collect()
    };
    let trials = vec![
        TrialResult {
            scene_id: fixture.id.clone(),
            method: Method::Baseline,
            executed: executed(&mut (1..=cands.len())),
            timings: t.clone(),
        },
        TrialResult {
            scene_id: fixture.id.clone(),
            method: Method::Rescored,
            executed: executed(&mut ranked.permutation.iter().copied()),
            timings: t.clone(),
        },
    ];
    Ok(SceneOutcome {
        scene_id: fixture.id.clone(),
        camera: fixture.camera.origin(),
        partial_centroid,
        uncertain: uc,
        candidates: cands,
        records,
        permutation: ranked.permutation,
        trials,
        timings: t,
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub report: PrecisionReport,
    pub scenes: Vec<SceneOutcome>,
}

impl ExperimentOutcome {
    pub fn trials(&self) -> Vec<TrialResult> {
        let mut out = Vec::new();
        for m in Method::ALL {
            out.extend(self.scenes.iter().flat_map(|s| s.trials.iter().filter(|t| t.method == m).cloned()));
        }
        out
    }
}

/// Far-side offset of the completer in adversarial runs, meters at full
/// depth behind the symmetry plane.
pub const ADVERSARIAL_FAR_SIDE_BIAS: f64 = 0.05;

impl ExperimentConfig {
    /// Default settings with a completer whose far side is pushed away from
    /// the partial view, so the far side it hallucinates is wrong exactly
    /// where its dispersion is largest.
    pub fn adversarial() -> Self {
        let mut cfg = Self::default();
        cfg.completer.far_side_bias = ADVERSARIAL_FAR_SIDE_BIAS;
        cfg
    }
}

/// The first `count` scenes of [`adversarial_fixture_set`] for which the
/// pipeline under `cfg` yields at least `k_execute` candidates. A stretched
/// far side can leave a box wider than the gripper opening everywhere; such
/// scenes cannot be scored and are skipped. Selection looks at the candidate
/// count only, never at oracle verdicts. At most `4 * count` scenes are drawn.
pub fn adversarial_scenes(count: usize, seed: u64, cfg: &ExperimentConfig) -> Result<Vec<SceneFixture>> {
    cfg.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let factory = mirror_backend(&cfg.completer);
    let specs = adversarial_fixture_set(4 * count, seed);
    let mut kept = Vec::with_capacity(count);
    for chunk in specs.chunks(count) {
        let built = chunk
            .par_iter()
            .map(|spec| {
                let fixture = spec.build()?;
                let usable = match run_scene(&fixture, cfg, &factory) {
                    Ok(o) => o.candidates.len() >= cfg.k_execute,
                    Err(Error::NoCandidates) => false,
                    Err(e) => return Err(e.context(format!("scene {}", spec.id))),
                };
                Ok(usable.then_some(fixture))
            })
            .collect::<Result<Vec<_>>>()?;
        kept.extend(built.into_iter().flatten().take(count - kept.len()));
        if kept.len() == count {
            return Ok(kept);
        }
    }
    Err(Error::InvalidValue(format!(
        "only {} of {} adversarial scenes are usable",
        kept.len(),
        count
    )))
}

pub fn run_experiment(fixtures: &[SceneFixture], cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(fixtures, cfg, &mirror_backend(&cfg.completer))
}

/// Scenes run concurrently; outputs keep fixture order.
pub fn run_experiment_with(
    fixtures: &[SceneFixture],
    cfg: &ExperimentConfig,
    factory: &BackendFactory,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    if fixtures.is_empty() {
        return Err(Error::InvalidValue("no scenes to evaluate".into()));
    }
    let scenes = fixtures
        .par_iter()
        .map(|f| run_scene(f, cfg, factory).context_with(|| format!("scene {}", f.id)))
        .collect::<Result<Vec<_>>>()?;
    let mut outcome = ExperimentOutcome {
        report: PrecisionReport {
            oracle: String::new(),
            methods: Vec::new(),
        },
        scenes,
    };
    outcome.report = PrecisionReport::from_trials(&outcome.trials())?;
    Ok(outcome)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    report: &'a PrecisionReport,
    trials: Vec<TrialResult>,
}

#[derive(Serialize)]
struct SceneTimings<'a> {
    scene_id: &'a str,
    #[serde(flatten)]
    timings: &'a StageTimings,
    total_ms: f64,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scene_id: &'a str,
    method: &'a str,
    executed: usize,
    successes: usize,
    precision_at_1: f64,
    precision_at_5: f64,
    original_ranks: String,
    flags: String,
}

pub const REPORT_FILE: &str = "report.json";
pub const TRIALS_CSV: &str = "trials.csv";
pub const TIMINGS_FILE: &str = "timings.json";

/// Writes `report.json` and `trials.csv` (reproducible) and `timings.json`
/// (wall-clock, varies between runs).
pub fn write_experiment(outcome: &ExperimentOutcome, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let trials = outcome.trials();

    let file = ReportFile {
        report: &outcome.report,
        trials: trials.clone(),
    };
    let path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(&file).expect("report serializes");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;

    let path = dir.join(TRIALS_CSV);
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(&path, source),
        other => Error::Format(format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(&path).map_err(io_err)?;
    for t in &trials {
        let successes = t.executed.iter().filter(|e| e.success).count();
        let at = |k: usize| t.executed.iter().take(k).filter(|e| e.success).count() as f64 / k as f64;
        w.serialize(CsvRow {
            scene_id: &t.scene_id,
            method: t.method.as_str(),
            executed: t.executed.len(),
            successes,
            precision_at_1: at(1),
            precision_at_5: at(5),
            original_ranks: t.executed.iter().map(|e| e.original_rank.to_string()).collect::<Vec<_>>().join(" "),
            flags: t.executed.iter().map(|e| if e.success { 'T' } else { 'F' }).collect(),
        })
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let timings: Vec<SceneTimings> = outcome
        .scenes
        .iter()
        .map(|s| SceneTimings {
            scene_id: &s.scene_id,
            timings: &s.timings,
            total_ms: s.timings.total_ms(),
        })
        .collect();
    let path = dir.join(TIMINGS_FILE);
    let json = serde_json::to_string_pretty(&timings).expect("timings serialize");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}
