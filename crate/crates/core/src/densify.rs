//! Result type shared by the densification routines and the deterministic
//! coefficient search they run.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{self, StructureClass};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::ComplexMatrix;
use crate::product::IndefiniteProduct;
use crate::spectral;
use crate::tolerance::{SearchConfig, ToleranceConfig};

/// Certificate of the polynomial fit used by the normal-class pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCertificate {
    /// `||p(S_c) - K_H||_2`
    pub residual: f64,
    /// Gate the residual had to pass.
    pub bound: f64,
    /// Degree-ascending monomial coefficients of `p`.
    #[serde(with = "crate::matrix::serde_complex_vec")]
    pub coeffs: Vec<Complex64>,
}

/// A perturbed matrix `A'` with the certificates it passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensifyResult {
    pub class: StructureClass,
    #[serde(with = "crate::matrix::serde_matrix")]
    pub perturbed: ComplexMatrix,
    /// `||A - A'||_2`
    pub distance: f64,
    /// Structure-equation residual of `A'` for `class`.
    pub class_residual: f64,
    /// Threshold `class_residual` was checked against.
    pub class_bound: f64,
    /// `|prod_{k != j} (l_k - l_j)|`; may underflow to zero for large `n`.
    pub discriminant_mag: f64,
    /// `ln` of the above, which does not underflow.
    pub log_discriminant_mag: f64,
    pub min_gap: f64,
    pub diagonalizable: bool,
    /// Accepted perturbation coefficient.
    #[serde(with = "crate::matrix::serde_complex")]
    pub c_used: Complex64,
    /// Trials used by the accepting search stage.
    pub trials: usize,
    /// Seed of the accepting search stage.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<FitCertificate>,
}

impl DensifyResult {
    /// Measures every certificate of `perturbed` against `original`.
    pub fn measure(
        original: &ComplexMatrix,
        perturbed: ComplexMatrix,
        p: &IndefiniteProduct,
        class: StructureClass,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let eigs = linalg::eigenvalues(&perturbed)?;
        let log_disc = spectral::log_discriminant_mag(&eigs);
        let class_residual = classes::class_residual(&perturbed, p, class)?;
        let class_bound = classes::class_threshold(class, linalg::norm2(&perturbed), p, cfg);
        Ok(DensifyResult {
            class,
            distance: linalg::norm2(&(original - &perturbed)),
            class_residual,
            class_bound,
            discriminant_mag: log_disc.exp(),
            log_discriminant_mag: log_disc,
            min_gap: spectral::min_gap_of(&eigs),
            diagonalizable: spectral::is_diagonalizable(&perturbed, cfg)?,
            perturbed,
            c_used: Complex64::new(0.0, 0.0),
            trials: 0,
            seed: 0,
            fit: None,
        })
    }

    /// Distinct-eigenvalue certificate: gap above `gap_tol` and a discriminant
    /// above `gap_tol^{n(n-1)}` (compared in log form).
    pub fn distinct(&self, cfg: &ToleranceConfig) -> bool {
        let n = self.perturbed.nrows() as f64;
        let floor = n * (n - 1.0) * cfg.gap_tol.ln();
        self.min_gap > cfg.gap_tol && (n < 2.0 || self.log_discriminant_mag > floor)
    }

    pub fn in_class(&self) -> bool {
        self.class_residual <= self.class_bound
    }

    /// All certificates needed for a `J`, `L` or `G` result.
    pub fn certified(&self, eps: f64, cfg: &ToleranceConfig) -> bool {
        self.distance < eps && self.in_class() && self.distinct(cfg) && self.diagonalizable
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("eps must be positive and finite, got {eps}")));
    }
    Ok(())
}

pub(crate) fn require_member(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    class: StructureClass,
    cfg: &ToleranceConfig,
) -> Result<()> {
    p.check_size(a)?;
    if !classes::is_member(a, p, class, cfg)? {
        let r = classes::class_residual(a, p, class)?;
        return Err(Error::Precondition(format!("input is not in class {class} (residual {r:.3e})")));
    }
    Ok(())
}

/// Outcome of evaluating one trial.
pub(crate) struct Trial<T> {
    pub accepted: bool,
    /// Larger is better; used to pick the best rejected candidate.
    pub score: f64,
    pub value: T,
}

pub(crate) enum SearchOutcome<T> {
    Accepted { trial: usize, value: T },
    Exhausted { best: Option<T> },
}

/// Evaluates trials `1..=max_trials` and returns the first accepted one in
/// trial order. With `threads > 1` trials run in parallel batches; the
/// result is the same as the sequential scan.
pub(crate) fn run_search<T, F>(max_trials: usize, search: &SearchConfig, eval: F) -> Result<SearchOutcome<T>>
where
    T: Send,
    F: Fn(usize) -> Result<Trial<T>> + Sync,
{
    let threads = search.threads.max(1);
    let mut best: Option<(f64, T)> = None;
    let mut m = 1;
    while m <= max_trials {
        let hi = (m + threads - 1).min(max_trials);
        let batch: Vec<Result<Trial<T>>> = if threads == 1 {
            vec![eval(m)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = (m..=hi).map(|k| s.spawn({
                    let eval = &eval;
                    move || eval(k)
                })).collect();
                handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
            })
        };
        for (offset, res) in batch.into_iter().enumerate() {
            let trial = res?;
            if trial.accepted {
                return Ok(SearchOutcome::Accepted {
                    trial: m + offset,
                    value: trial.value,
                });
            }
            if best.as_ref().is_none_or(|(s, _)| trial.score > *s) {
                best = Some((trial.score, trial.value));
            }
        }
        m = hi + 1;
    }
    Ok(SearchOutcome::Exhausted {
        best: best.map(|(_, v)| v),
    })
}
