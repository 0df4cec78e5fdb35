use thiserror::Error;

use crate::densify::DensifyResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is numerically singular (sigma_min / sigma_max = {ratio:.3e})")]
    Singular { ratio: f64 },

    #[error("degenerate form: B is numerically singular (sigma_min / sigma_max = {ratio:.3e})")]
    DegenerateForm { ratio: f64 },

    #[error("unsupported form: B is neither Hermitian nor skew-Hermitian (relative residuals {herm:.3e}, {skew:.3e})")]
    UnsupportedForm { herm: f64, skew: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("resolvent is singular: {0}")]
    ResolventSingular(String),

    #[error("{stage}: search exhausted after {trials} trials")]
    SearchExhausted {
        stage: &'static str,
        trials: usize,
        best: Option<Box<DensifyResult>>,
    },

    #[error("{stage}: no convergence after {iterations} iterations")]
    Convergence {
        stage: &'static str,
        iterations: usize,
        best: Option<Box<DensifyResult>>,
    },

    #[error("ill-conditioned Jordan structure: {0}; try a different cluster_tol")]
    IllConditionedStructure(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("target is not in the centralizer: residual {residual:.3e} exceeds bound {bound:.3e}")]
    NotInCentralizer { residual: f64, bound: f64 },

    #[error("budget too tight: {0}; retry with a larger eps")]
    BudgetTooTight(String),

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
}

impl Error {
    /// Best candidate carried by a failed search, if any.
    pub fn best_candidate(&self) -> Option<&DensifyResult> {
        match self {
            Error::SearchExhausted { best, .. } | Error::Convergence { best, .. } => best.as_deref(),
            _ => None,
        }
    }
}
