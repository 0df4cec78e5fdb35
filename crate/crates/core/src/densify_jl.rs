//! Perturbation to distinct eigenvalues inside `J(B)` and `L(B)`, and the
//! sum-of-two / sum-of-four decompositions built on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{self, StructureClass};
use crate::densify::{check_eps, require_member, run_search, DensifyResult, SearchOutcome, Trial};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, ComplexMatrix};
use crate::product::{FormKind, IndefiniteProduct};
use crate::rng::jitter;
use crate::spectral;
use crate::tolerance::{SearchConfig, ToleranceConfig};

/// Trials in the coefficient search.
pub const MAX_TRIALS: usize = 64;

fn distinct_element(p: &IndefiniteProduct, step: Complex64) -> Result<ComplexMatrix> {
    if p.kind() != FormKind::Hermitian {
        return Err(Error::Precondition("distinct element needs a Hermitian B; hermitize first".into()));
    }
    let (q, q_inv) = p.sylvester_pair()?;
    let n = p.dim();
    let mut d = q.clone();
    for k in 0..n {
        let s = step * (k + 1) as f64;
        for i in 0..n {
            d[(i, k)] *= s;
        }
    }
    Ok(d * q_inv)
}

/// `Q diag(1, ..., n) Q^{-1}` for the Sylvester congruence `Q` of `B`.
pub fn distinct_element_j(p: &IndefiniteProduct) -> Result<ComplexMatrix> {
    distinct_element(p, c64(1.0, 0.0))
}

/// `Q diag(i, ..., ni) Q^{-1}`.
pub fn distinct_element_l(p: &IndefiniteProduct) -> Result<ComplexMatrix> {
    distinct_element(p, c64(0.0, 1.0))
}

fn element_for(p: &IndefiniteProduct, class: StructureClass, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    // J(B) and L(B) coincide with J(iB) and L(iB).
    let h = p.to_hermitian(cfg)?;
    let e = match class {
        StructureClass::J => distinct_element_j(&h)?,
        StructureClass::L => distinct_element_l(&h)?,
        _ => unreachable!("only J and L have a linear perturbation direction"),
    };
    // Project onto the class to remove rounding from Q and Q^{-1}.
    let e_star = p.adjoint(&e)?;
    Ok(match class {
        StructureClass::J => (&e + e_star) * c64(0.5, 0.0),
        _ => (&e - e_star) * c64(0.5, 0.0),
    })
}

/// Candidate coefficient for trial `m`: `c_max * 2^{1-m} * rho_m`.
fn coefficient(c_max: f64, seed: u64, m: usize) -> f64 {
    c_max * 0.5f64.powi(m as i32 - 1) * jitter(seed, m as u64)
}

struct PairCandidate {
    x: DensifyResult,
    y_gap: f64,
}

/// Searches `c` so that `A + cE` is certified; with `also_y`, also requires
/// `-cE` to have distinct eigenvalues (for the sum-of-two split).
fn search_along(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    e: &ComplexMatrix,
    class: StructureClass,
    eps: f64,
    also_y: bool,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<(DensifyResult, f64)> {
    let e_norm = linalg::norm2(e);
    let e_gap = spectral::min_eig_gap(e)?;
    let c_max = eps / (2.0 * e_norm);
    let seed = search.seed;
    let eval = |m: usize| -> Result<Trial<PairCandidate>> {
        let c = coefficient(c_max, seed, m);
        let perturbed = a + e * c64(c, 0.0);
        let mut x = DensifyResult::measure(a, perturbed, p, class, cfg)?;
        x.c_used = c64(c, 0.0);
        x.trials = m;
        x.seed = seed;
        // -cE shares the eigenvectors of E, so its gap is |c| times that of E.
        let y_gap = c.abs() * e_gap;
        let accepted = x.certified(eps, cfg) && (!also_y || y_gap > cfg.gap_tol);
        Ok(Trial {
            accepted,
            score: x.min_gap,
            value: PairCandidate { x, y_gap },
        })
    };
    match run_search(MAX_TRIALS, search, eval)? {
        SearchOutcome::Accepted { value, .. } => Ok((value.x, value.y_gap)),
        SearchOutcome::Exhausted { best } => Err(Error::SearchExhausted {
            stage: "densify_jl",
            trials: MAX_TRIALS,
            best: best.map(|b| Box::new(b.x)),
        }),
    }
}

fn densify_class(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    eps: f64,
    class: StructureClass,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DensifyResult> {
    check_eps(eps)?;
    require_member(a, p, class, cfg)?;
    let e = element_for(p, class, cfg)?;
    Ok(search_along(a, p, &e, class, eps, false, cfg, search)?.0)
}

/// Diagonalizable `A' in J(B)` with distinct eigenvalues and `||A - A'||_2 < eps`.
pub fn densify_j(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    eps: f64,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DensifyResult> {
    densify_class(a, p, eps, StructureClass::J, cfg, search)
}

/// Diagonalizable `A' in L(B)` with distinct eigenvalues and `||A - A'||_2 < eps`.
pub fn densify_l(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    eps: f64,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DensifyResult> {
    densify_class(a, p, eps, StructureClass::L, cfg, search)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumOfTwo {
    pub class: StructureClass,
    #[serde(with = "crate::matrix::serde_matrix")]
    pub x: ComplexMatrix,
    #[serde(with = "crate::matrix::serde_matrix")]
    pub y: ComplexMatrix,
    #[serde(with = "crate::matrix::serde_complex")]
    pub c_used: Complex64,
    pub x_min_gap: f64,
    pub y_min_gap: f64,
}

/// `A = X + Y` with `X = A + cE`, `Y = -cE`, both in `class` with distinct
/// eigenvalues. The search budget is `max(||A||_2, 1)`.
pub fn sum_of_two(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    class: StructureClass,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<SumOfTwo> {
    if !matches!(class, StructureClass::J | StructureClass::L) {
        return Err(Error::Precondition(format!("sum_of_two supports J and L, got {class}")));
    }
    require_member(a, p, class, cfg)?;
    let e = element_for(p, class, cfg)?;
    let eps = linalg::norm2(a).max(1.0);
    let (x, y_gap) = search_along(a, p, &e, class, eps, true, cfg, search)?;
    let y = -(&e * x.c_used);
    Ok(SumOfTwo {
        class,
        x_min_gap: x.min_gap,
        y_min_gap: y_gap,
        c_used: x.c_used,
        x: x.perturbed,
        y,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumOfFour {
    /// Split of the selfadjoint part.
    pub selfadjoint: SumOfTwo,
    /// Split of the skewadjoint part.
    pub skewadjoint: SumOfTwo,
}

impl SumOfFour {
    pub fn parts(&self) -> [&ComplexMatrix; 4] {
        [&self.selfadjoint.x, &self.selfadjoint.y, &self.skewadjoint.x, &self.skewadjoint.y]
    }

    pub fn sum(&self) -> ComplexMatrix {
        let [a, b, c, d] = self.parts();
        a + b + c + d
    }
}

/// Any `A` as a sum of four `B`-normal matrices with distinct eigenvalues:
/// two from `J(B)` summing to the selfadjoint part and two from `L(B)`
/// summing to the skewadjoint part.
pub fn sum_of_four(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<SumOfFour> {
    let (s, k) = classes::toeplitz_split(a, p)?;
    Ok(SumOfFour {
        selfadjoint: sum_of_two(&s, p, StructureClass::J, cfg, &search.child(1))?,
        skewadjoint: sum_of_two(&k, p, StructureClass::L, cfg, &search.child(2))?,
    })
}
