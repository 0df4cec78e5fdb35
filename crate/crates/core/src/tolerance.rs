use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every module. Passed explicitly; there are
/// no global defaults beyond [`Default`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Residual threshold for structure equations.
    pub eq_tol: f64,
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tol: f64,
    /// Minimum eigenvalue separation declared "distinct".
    pub gap_tol: f64,
    /// Eigenvalue clustering radius for Jordan analysis.
    pub cluster_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            eq_tol: 1e-10,
            rank_tol: 1e-8,
            gap_tol: 1e-8,
            cluster_tol: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eq_tol", self.eq_tol),
            ("rank_tol", self.rank_tol),
            ("gap_tol", self.gap_tol),
            ("cluster_tol", self.cluster_tol),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Controls for the randomized coefficient searches.
///
/// The searches are deterministic given `seed`; `threads > 1` evaluates
/// candidate coefficients in parallel batches but still accepts the first
/// passing candidate in sequence order, so results do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { seed: 0, threads: 1 }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig { seed, ..Self::default() }
    }

    /// Child configuration for a named sub-search.
    pub fn child(&self, label: u64) -> Self {
        SearchConfig {
            seed: crate::rng::derive_seed(self.seed, label),
            threads: self.threads,
        }
    }
}
