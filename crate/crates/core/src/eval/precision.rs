use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::OracleVerdict;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Top candidates by generator score `S`.
    Baseline,
    /// Top candidates by `S'`.
    Rescored,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Baseline, Method::Rescored];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Rescored => "rescored",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutedGrasp {
    /// Rank in the generator's list, 1-based.
    pub original_rank: usize,
    #[serde(rename = "S")]
    pub score: f64,
    #[serde(rename = "S_prime")]
    pub rescored: f64,
    pub penalty_m: f64,
    pub crop_size: usize,
    pub verdict: OracleVerdict,
    pub success: bool,
}

/// Stage durations in milliseconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub capture_ms: f64,
    pub segment_ms: f64,
    pub complete_ms: f64,
    pub aggregate_ms: f64,
    pub sample_ms: f64,
    pub rescore_ms: f64,
    pub judge_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.capture_ms
            + self.segment_ms
            + self.complete_ms
            + self.aggregate_ms
            + self.sample_ms
            + self.rescore_ms
            + self.judge_ms
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub scene_id: String,
    pub method: Method,
    /// Executed grasps in execution (rank) order.
    pub executed: Vec<ExecutedGrasp>,
    /// Kept out of the serialized report so reports stay reproducible.
    #[serde(skip)]
    pub timings: StageTimings,
}

impl TrialResult {
    pub fn flags(&self) -> Vec<bool> {
        self.executed.iter().map(|e| e.success).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionSlice {
    pub k: usize,
    /// One value per trial, in input order.
    pub per_trial: Vec<f64>,
    pub aggregate: f64,
}

/// Per trial, successes among the first `k` executions divided by `k`;
/// aggregate is the mean over trials.
pub fn precision_at_k(results: &[TrialResult], k: usize) -> Result<PrecisionSlice> {
    if k == 0 {
        return Err(Error::InvalidValue("k must be at least 1".into()));
    }
    let per_trial = results
        .iter()
        .enumerate()
        .map(|(trial, r)| {
            if r.executed.len() < k {
                return Err(Error::InsufficientExecutions {
                    trial,
                    executed: r.executed.len(),
                    k,
                });
            }
            Ok(r.executed[..k].iter().filter(|e| e.success).count() as f64 / k as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = if per_trial.is_empty() {
        0.0
    } else {
        crate::numeric::compensated_sum(per_trial.iter().copied()) / per_trial.len() as f64
    };
    Ok(PrecisionSlice { k, per_trial, aggregate })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenePrecision {
    pub scene_id: String,
    pub precision_at_1: f64,
    pub precision_at_5: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodPrecision {
    pub method: Method,
    pub trials: usize,
    pub precision_at_1: f64,
    pub precision_at_5: f64,
    pub per_scene: Vec<ScenePrecision>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    /// Names the success criterion, which is a geometric proxy.
    pub oracle: String,
    pub methods: Vec<MethodPrecision>,
}

pub const ORACLE_LABEL: &str = "geometric proxy: containment + antipodal pair + finger clearance on ground truth";

impl PrecisionReport {
    /// Groups trials by method. Every trial must have executed at least 5
    /// grasps.
    pub fn from_trials(trials: &[TrialResult]) -> Result<Self> {
        let mut by_method: BTreeMap<Method, Vec<TrialResult>> = BTreeMap::new();
        for t in trials {
            by_method.entry(t.method).or_default().push(t.clone());
        }
        let methods = by_method
            .into_iter()
            .map(|(method, trials)| {
                let p1 = precision_at_k(&trials, 1)?;
                let p5 = precision_at_k(&trials, 5)?;
                let per_scene = trials
                    .iter()
                    .zip(p1.per_trial.iter().zip(&p5.per_trial))
                    .map(|(t, (a, b))| ScenePrecision {
                        scene_id: t.scene_id.clone(),
                        precision_at_1: *a,
                        precision_at_5: *b,
                    })
                    .collect();
                Ok(MethodPrecision {
                    method,
                    trials: trials.len(),
                    precision_at_1: p1.aggregate,
                    precision_at_5: p5.aggregate,
                    per_scene,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            oracle: ORACLE_LABEL.into(),
            methods,
        })
    }

    pub fn method(&self, m: Method) -> Option<&MethodPrecision> {
        self.methods.iter().find(|x| x.method == m)
    }
}
