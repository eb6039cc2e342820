//! Stochastic shape completion.
//!
//! A [`CompletionBackend`] maps a partial cloud to a completed cloud whose
//! layout is `[partial | generated]`: the first `P` points are the partial
//! input verbatim and point `i` names the same surface location in every
//! draw. [`complete_ensemble`] stacks `T` such draws for aggregation.

mod ensemble_io;
mod mirror;

pub use ensemble_io::{load_ensemble, read_ensemble_dir, write_ensemble_dir, EnsembleManifest};
pub use mirror::{MirrorCompleter, MirrorCompleterConfig, SymmetryHint};

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::numeric::derive_seed;

/// Tolerance on the shared partial prefix when stacks come from files.
pub const PARTIAL_MATCH_TOLERANCE: f64 = 1e-9;

pub trait CompletionBackend: Send + Sync {
    /// Points per completion (`N`).
    fn output_size(&self) -> usize;

    /// Short identifier recorded in ensemble manifests.
    fn id(&self) -> &str;

    /// One stochastic forward pass. Must be a pure function of
    /// `(self, partial, draw_seed)`.
    fn complete_once(&self, partial: &PointCloud, draw_seed: u64) -> Result<PointCloud>;
}

/// `T` index-corresponded completions of one partial cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStack {
    passes: Vec<PointCloud>,
    partial_count: usize,
}

impl EnsembleStack {
    /// Validates `T >= 2`, equal pass sizes, `P <= N`, and that the first `P`
    /// points agree across passes within [`PARTIAL_MATCH_TOLERANCE`].
    pub fn new(passes: Vec<PointCloud>, partial_count: usize) -> Result<Self> {
        if passes.len() < 2 {
            return Err(Error::InvalidPassCount(passes.len()));
        }
        let n = passes[0].len();
        for (t, pass) in passes.iter().enumerate().skip(1) {
            if pass.len() != n {
                return Err(Error::CountMismatch {
                    pass: t,
                    expected: n,
                    actual: pass.len(),
                });
            }
        }
        if partial_count > n {
            return Err(Error::InvalidStack(format!(
                "partial count {partial_count} exceeds pass size {n}"
            )));
        }
        let first = &passes[0];
        for (t, pass) in passes.iter().enumerate().skip(1) {
            if let Some(index) = (0..partial_count)
                .find(|&i| (pass[i] - first[i]).amax() > PARTIAL_MATCH_TOLERANCE)
            {
                return Err(Error::PartialMismatch { pass: t, index });
            }
        }
        Ok(Self {
            passes,
            partial_count,
        })
    }

    pub fn passes(&self) -> &[PointCloud] {
        &self.passes
    }

    /// `T`.
    pub fn pass_count(&self) -> usize {
        self.passes.len()
    }

    /// `N`.
    pub fn point_count(&self) -> usize {
        self.passes[0].len()
    }

    /// `P`.
    pub fn partial_count(&self) -> usize {
        self.partial_count
    }
}

pub fn complete_once(backend: &dyn CompletionBackend, partial: &PointCloud, draw_seed: u64) -> Result<PointCloud> {
    backend.complete_once(partial, draw_seed)
}

/// `T` draws with seeds `derive_seed(seed, t)`, computed in parallel.
pub fn complete_ensemble(
    backend: &dyn CompletionBackend,
    partial: &PointCloud,
    passes: usize,
    seed: u64,
) -> Result<EnsembleStack> {
    if passes < 2 {
        return Err(Error::InvalidPassCount(passes));
    }
    if partial.is_empty() {
        return Err(Error::EmptyPartial);
    }
    let clouds = (0..passes)
        .into_par_iter()
        .map(|t| backend.complete_once(partial, derive_seed(seed, t as u64)))
        .collect::<Result<Vec<_>>>()?;
    EnsembleStack::new(clouds, partial.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point3;

    fn cloud(points: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(points.iter().map(|p| Point3::from(*p)).collect()).unwrap()
    }

    #[test]
    fn stack_invariants() {
        let a = cloud(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        let b = cloud(&[[0.0, 0.0, 0.0], [1.5, 0.0, 0.0]]);
        assert!(EnsembleStack::new(vec![a.clone(), b.clone()], 1).is_ok());
        assert_eq!(EnsembleStack::new(vec![a.clone()], 1).unwrap_err().kind(), "invalid-T-error");
        assert_eq!(EnsembleStack::new(vec![a.clone(), b.clone()], 2).unwrap_err().kind(), "partial-mismatch-error");
        let short = cloud(&[[0.0, 0.0, 0.0]]);
        assert_eq!(EnsembleStack::new(vec![a.clone(), short], 1).unwrap_err().kind(), "count-mismatch-error");
        assert_eq!(EnsembleStack::new(vec![a.clone(), a], 3).unwrap_err().kind(), "invalid-stack-error");
    }
}
