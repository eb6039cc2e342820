//! Uncertainty-penalized re-ranking of grasp candidates.
//!
//! Each candidate's closing region crops the mean completed cloud; the std
//! of the cropped points is summed into a penalty and
//!
//! ```text
//! S' = S - W_u · Σ σ
//! ```
//!
//! Candidates are then stably sorted by `S'` descending, so ties keep the
//! generator's original order. Ranks are 1-based throughout.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{points_in_obb, Obb, PointCloud};
use crate::error::{Error, Result};
use crate::gripper::{closing_region, GraspCandidate, GripperModel};
use crate::numeric::compensated_sum;
use crate::uncertainty::UncertainCloud;

/// `W_u` for GPD-scale (hundreds to thousands) scores.
pub const W_U_UNNORMALIZED: f64 = 1e5;
/// `W_u` for unit-interval scores.
pub const W_U_UNIT: f64 = 1e-1;

/// Points of the mean cloud inside one closing region.
#[derive(Clone, Debug, PartialEq)]
pub struct CropResult {
    pub indices: Vec<usize>,
    pub points: PointCloud,
    pub stds: Vec<f64>,
    pub region: Obb,
}

impl CropResult {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    /// Σ σ over the crop.
    Sum,
    /// Mean σ over the crop (0 when empty).
    Mean,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RescoreConfig {
    #[serde(rename = "W_u")]
    pub w_u: f64,
    pub penalty: PenaltyMode,
}

impl Default for RescoreConfig {
    fn default() -> Self {
        Self {
            w_u: W_U_UNNORMALIZED,
            penalty: PenaltyMode::Sum,
        }
    }
}

impl RescoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_u >= 0.0 && self.w_u.is_finite()) {
            return Err(Error::InvalidValue(format!("W_u must be nonnegative, got {}", self.w_u)));
        }
        Ok(())
    }
}

pub fn crop_for_grasp(uc: &UncertainCloud, cand: &GraspCandidate, g: &GripperModel) -> CropResult {
    let region = closing_region(g, &cand.grasp);
    let indices = points_in_obb(uc.mean(), &region);
    CropResult {
        points: uc.mean().select(&indices),
        stds: indices.iter().map(|&i| uc.std()[i]).collect(),
        indices,
        region,
    }
}

/// Σ σ over the crop, in meters, with compensated summation.
pub fn uncertainty_penalty(crop: &CropResult) -> f64 {
    compensated_sum(crop.stds.iter().copied())
}

fn penalty_for(crop: &CropResult, mode: PenaltyMode) -> f64 {
    match mode {
        PenaltyMode::Sum => uncertainty_penalty(crop),
        PenaltyMode::Mean if crop.is_empty() => 0.0,
        PenaltyMode::Mean => uncertainty_penalty(crop) / crop.len() as f64,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedEntry {
    pub candidate: GraspCandidate,
    pub original_rank: usize,
    pub crop_size: usize,
    /// Meters.
    pub penalty: f64,
    pub rescored: f64,
    pub new_rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedList {
    /// Sorted by `S'` descending.
    pub entries: Vec<RankedEntry>,
    /// `permutation[i]` is the original rank of the grasp now at rank `i + 1`.
    pub permutation: Vec<usize>,
}

impl RankedList {
    pub fn top(&self, k: usize) -> impl Iterator<Item = &RankedEntry> {
        self.entries.iter().take(k)
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &r)| r == i + 1)
    }

    /// New rank of the candidate originally at `original_rank`.
    pub fn new_rank_of(&self, original_rank: usize) -> Option<usize> {
        self.permutation.iter().position(|&r| r == original_rank).map(|i| i + 1)
    }
}

/// Ranks candidates given precomputed `(crop_size, penalty)` pairs.
pub fn rank_with_penalties(cands: &[GraspCandidate], penalties: &[(usize, f64)], w_u: f64) -> Result<RankedList> {
    if cands.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if penalties.len() != cands.len() {
        return Err(Error::LengthMismatch {
            expected: cands.len(),
            actual: penalties.len(),
        });
    }
    let mut entries: Vec<RankedEntry> = cands
        .iter()
        .zip(penalties)
        .enumerate()
        .map(|(i, (c, &(crop_size, penalty)))| RankedEntry {
            candidate: *c,
            original_rank: i + 1,
            crop_size,
            penalty,
            rescored: c.score - w_u * penalty,
            new_rank: 0,
        })
        .collect();
    entries.sort_by(|a, b| b.rescored.total_cmp(&a.rescored));
    for (i, e) in entries.iter_mut().enumerate() {
        e.new_rank = i + 1;
    }
    let permutation = entries.iter().map(|e| e.original_rank).collect();
    Ok(RankedList { entries, permutation })
}

/// Crops and penalizes every candidate (in parallel) and re-ranks.
pub fn rescore(
    cands: &[GraspCandidate],
    uc: &UncertainCloud,
    g: &GripperModel,
    cfg: &RescoreConfig,
) -> Result<RankedList> {
    cfg.validate()?;
    if cands.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let penalties: Vec<(usize, f64)> = cands
        .par_iter()
        .map(|c| {
            let crop = crop_for_grasp(uc, c, g);
            (crop.len(), penalty_for(&crop, cfg.penalty))
        })
        .collect();
    rank_with_penalties(cands, &penalties, cfg.w_u)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub original_rank: usize,
    #[serde(rename = "S")]
    pub score: f64,
    pub crop_size: usize,
    pub penalty_m: f64,
    #[serde(rename = "S_prime")]
    pub rescored: f64,
    pub new_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescoreReport {
    #[serde(rename = "W_u")]
    pub w_u: f64,
    pub penalty: PenaltyMode,
    /// In original-rank order.
    pub candidates: Vec<ReportEntry>,
    pub permutation: Vec<usize>,
}

impl RescoreReport {
    pub fn new(list: &RankedList, cfg: &RescoreConfig) -> Self {
        let mut candidates: Vec<ReportEntry> = list
            .entries
            .iter()
            .map(|e| ReportEntry {
                original_rank: e.original_rank,
                score: e.candidate.score,
                crop_size: e.crop_size,
                penalty_m: e.penalty,
                rescored: e.rescored,
                new_rank: e.new_rank,
            })
            .collect();
        candidates.sort_by_key(|e| e.original_rank);
        Self {
            w_u: cfg.w_u,
            penalty: cfg.penalty,
            candidates,
            permutation: list.permutation.clone(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}
