//! Cayley transform between `J(B)` and `G(B)`, and perturbation to
//! diagonalizable form inside `G(B)` by way of `J(B)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::StructureClass;
use crate::densify::{check_eps, require_member, DensifyResult};
use crate::densify_jl::densify_j;
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::{c64, ComplexMatrix, I};
use crate::product::IndefiniteProduct;
use crate::tolerance::{SearchConfig, ToleranceConfig};

/// Grid resolution of [`pick_alpha`].
pub const ALPHA_GRID: usize = 720;
/// Halvings of the inner budget in [`densify_g`].
pub const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CayleyParams {
    /// Nonreal pole.
    #[serde(with = "crate::matrix::serde_complex")]
    pub w: Complex64,
    /// Unimodular scale.
    #[serde(with = "crate::matrix::serde_complex")]
    pub alpha: Complex64,
}

impl Default for CayleyParams {
    fn default() -> Self {
        CayleyParams {
            w: I,
            alpha: c64(1.0, 0.0),
        }
    }
}

impl CayleyParams {
    pub fn new(w: Complex64, alpha: Complex64) -> Result<Self> {
        if w.im == 0.0 || !w.is_finite() {
            return Err(Error::Precondition(format!("w must be nonreal, got {w}")));
        }
        if (alpha.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::Precondition(format!("|alpha| must be 1, got {}", alpha.norm())));
        }
        Ok(CayleyParams { w, alpha })
    }

    /// `w = i` with the given `alpha`.
    pub fn with_alpha(alpha: Complex64) -> Result<Self> {
        Self::new(I, alpha)
    }
}

fn spectral_distance(a: &ComplexMatrix, z: Complex64) -> Result<f64> {
    Ok(linalg::eigenvalues(a)?
        .iter()
        .map(|l| (l - z).norm())
        .fold(f64::INFINITY, f64::min))
}

fn resolvent_solve(m: &ComplexMatrix, rhs: &ComplexMatrix, cfg: &ToleranceConfig, what: &str) -> Result<ComplexMatrix> {
    linalg::solve(m, rhs, cfg).map_err(|e| match e {
        Error::Singular { ratio } => Error::ResolventSingular(format!("{what} (sigma ratio {ratio:.3e})")),
        other => other,
    })
}

/// `U = alpha (A - conj(w) I)(A - w I)^{-1}`, mapping `J(B)` into `G(B)`.
pub fn cayley_to_unitary(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    prm: &CayleyParams,
    cfg: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    require_member(a, p, StructureClass::J, cfg)?;
    let n = a.nrows();
    let d = spectral_distance(a, prm.w)?;
    if d <= cfg.gap_tol {
        return Err(Error::ResolventSingular(format!("w is {d:.3e} from the spectrum of A")));
    }
    let id = ComplexMatrix::identity(n, n);
    let num = a - &id * prm.w.conj();
    let den = a - &id * prm.w;
    Ok(resolvent_solve(&den, &num, cfg, "A - wI")? * prm.alpha)
}

/// `A = (w U - conj(w) alpha I)(U - alpha I)^{-1}`, the inverse map.
pub fn cayley_to_selfadjoint(
    u: &ComplexMatrix,
    p: &IndefiniteProduct,
    prm: &CayleyParams,
    cfg: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    require_member(u, p, StructureClass::G, cfg)?;
    let n = u.nrows();
    let d = spectral_distance(u, prm.alpha)?;
    if d <= cfg.gap_tol {
        return Err(Error::ResolventSingular(format!("alpha is {d:.3e} from the spectrum of U")));
    }
    let id = ComplexMatrix::identity(n, n);
    let num = u * prm.w - &id * (prm.w.conj() * prm.alpha);
    let den = u - &id * prm.alpha;
    resolvent_solve(&den, &num, cfg, "U - alpha I")
}

/// Point on the unit circle farthest from the spectrum of `U`, over a
/// 720-point grid starting at `1`; ties keep the earliest grid point.
pub fn pick_alpha(u: &ComplexMatrix) -> Result<Complex64> {
    let eigs = linalg::eigenvalues(u)?;
    let mut best = (f64::NEG_INFINITY, c64(1.0, 0.0));
    for k in 0..ALPHA_GRID {
        let theta = 2.0 * PI * k as f64 / ALPHA_GRID as f64;
        let z = Complex64::from_polar(1.0, theta);
        let d = eigs.iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min);
        if d > best.0 + 1e-12 {
            best = (d, z);
        }
    }
    Ok(best.1)
}

/// Diagonalizable `G' in G(B)` with distinct eigenvalues and `||G - G'||_2 < eps`.
///
/// Maps `G` to `J(B)`, perturbs there with budgets `2^{-k}`, maps back and
/// keeps the first image that is within `eps` and certified.
pub fn densify_g(
    g: &ComplexMatrix,
    p: &IndefiniteProduct,
    eps: f64,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DensifyResult> {
    check_eps(eps)?;
    require_member(g, p, StructureClass::G, cfg)?;
    let prm = CayleyParams::with_alpha(pick_alpha(g)?)?;
    let a = cayley_to_selfadjoint(g, p, &prm, cfg)?;

    let mut best: Option<DensifyResult> = None;
    for k in 1..=MAX_HALVINGS {
        let delta = 0.5f64.powi(k as i32);
        let inner = search.child(k as u64);
        let f_prime = match densify_j(&a, p, delta, cfg, &inner) {
            Ok(r) => r,
            Err(Error::SearchExhausted { .. }) => continue,
            Err(e) => return Err(e),
        };
        let f = match cayley_to_unitary(&f_prime.perturbed, p, &prm, cfg) {
            Ok(f) => f,
            Err(Error::ResolventSingular(_)) | Err(Error::Precondition(_)) => continue,
            Err(e) => return Err(e),
        };
        let mut r = DensifyResult::measure(g, f, p, StructureClass::G, cfg)?;
        r.c_used = f_prime.c_used;
        r.trials = k;
        r.seed = inner.seed;
        if r.certified(eps, cfg) {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| r.distance < b.distance) {
            best = Some(r);
        }
    }
    Err(Error::Convergence {
        stage: "densify_G",
        iterations: MAX_HALVINGS,
        best: best.map(Box::new),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{classify, res_g};
    use crate::matrix::{diag, jordan_block, real_diag, reverse_identity};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn prod(b: ComplexMatrix) -> IndefiniteProduct {
        IndefiniteProduct::new(b, &cfg()).unwrap()
    }

    #[test]
    fn params_validate() {
        assert!(CayleyParams::new(c64(1.0, 0.0), c64(1.0, 0.0)).is_err());
        assert!(CayleyParams::new(I, c64(2.0, 0.0)).is_err());
        assert!(CayleyParams::new(c64(0.3, -2.0), Complex64::from_polar(1.0, 0.7)).is_ok());
    }

    #[test]
    fn to_unitary_examples() {
        let p = prod(ComplexMatrix::identity(2, 2));
        let u = cayley_to_unitary(&real_diag(&[1.0, -1.0]), &p, &CayleyParams::default(), &cfg()).unwrap();
        assert!((u - diag(&[c64(0.0, 1.0), c64(0.0, -1.0)])).norm() < 1e-15);

        let u = cayley_to_unitary(&ComplexMatrix::zeros(2, 2), &p, &CayleyParams::default(), &cfg()).unwrap();
        assert!((u + ComplexMatrix::identity(2, 2)).norm() < 1e-15);

        let p4 = prod(reverse_identity(4));
        let a = jordan_block(4, c64(0.3, 0.0));
        let u = cayley_to_unitary(&a, &p4, &CayleyParams::default(), &cfg()).unwrap();
        assert!(res_g(&u, &p4).unwrap() < 1e-12);
    }

    #[test]
    fn to_unitary_rejects_pole_on_spectrum() {
        let p = prod(real_diag(&[1.0, -1.0]));
        let prm = CayleyParams::new(c64(0.0, 1.0), c64(1.0, 0.0)).unwrap();
        // diag(1,-1)-selfadjoint with eigenvalues +-i.
        let a = crate::matrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(matches!(cayley_to_unitary(&a, &p, &prm, &cfg()), Err(Error::ResolventSingular(_))));
    }

    #[test]
    fn to_selfadjoint_examples() {
        let p = prod(ComplexMatrix::identity(2, 2));
        let u = diag(&[c64(0.0, 1.0), c64(0.0, -1.0)]);
        let a = cayley_to_selfadjoint(&u, &p, &CayleyParams::default(), &cfg()).unwrap();
        assert!((a - real_diag(&[1.0, -1.0])).norm() < 1e-15);

        let minus = -ComplexMatrix::identity(2, 2);
        let a = cayley_to_selfadjoint(&minus, &p, &CayleyParams::default(), &cfg()).unwrap();
        assert!(a.norm() < 1e-15);

        let one = ComplexMatrix::identity(2, 2);
        assert!(matches!(
            cayley_to_selfadjoint(&one, &p, &CayleyParams::default(), &cfg()),
            Err(Error::ResolventSingular(_))
        ));
    }

    #[test]
    fn round_trip() {
        let p = prod(reverse_identity(3));
        let a = jordan_block(3, c64(-0.7, 0.0));
        let prm = CayleyParams::default();
        let u = cayley_to_unitary(&a, &p, &prm, &cfg()).unwrap();
        let back = cayley_to_selfadjoint(&u, &p, &prm, &cfg()).unwrap();
        assert!(linalg::norm2(&(back - &a)) <= 1e-10 * (1.0 + linalg::norm2(&a)));
    }

    #[test]
    fn pick_alpha_examples() {
        let a = pick_alpha(&ComplexMatrix::identity(2, 2)).unwrap();
        assert!((a + c64(1.0, 0.0)).norm() < 1e-12);
        let a = pick_alpha(&diag(&[c64(0.0, 1.0), c64(0.0, -1.0)])).unwrap();
        assert!((a - c64(1.0, 0.0)).norm() < 1e-12 || (a + c64(1.0, 0.0)).norm() < 1e-12);
        let a = pick_alpha(&-ComplexMatrix::identity(3, 3)).unwrap();
        assert!((a - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn densify_g_examples() {
        let p = prod(ComplexMatrix::identity(2, 2));
        let g = -ComplexMatrix::identity(2, 2);
        let sc = SearchConfig::with_seed(1);
        let r = densify_g(&g, &p, 0.1, &cfg(), &sc).unwrap();
        assert!(r.distance < 0.1 && r.min_gap > 1e-8 && r.diagonalizable && r.in_class());

        let r = densify_g(&g, &p, 1e6, &cfg(), &sc).unwrap();
        assert_eq!(r.trials, 1);

        let p3 = prod(reverse_identity(3));
        let u = cayley_to_unitary(&jordan_block(3, c64(0.5, 0.0)), &p3, &CayleyParams::default(), &cfg()).unwrap();
        assert!(!crate::spectral::is_diagonalizable(&u, &cfg()).unwrap());
        let r = densify_g(&u, &p3, 1e-3, &cfg(), &sc).unwrap();
        assert!(r.distance < 1e-3 && r.diagonalizable && r.min_gap > 1e-8);
        assert!(classify(&r.perturbed, &p3, &cfg()).unwrap().contains(StructureClass::G));
    }

    #[test]
    fn densify_g_rejects_nonmembers() {
        let p = prod(reverse_identity(2));
        let a = jordan_block(2, c64(0.0, 0.0));
        assert!(matches!(
            densify_g(&a, &p, 0.1, &cfg(), &SearchConfig::default()),
            Err(Error::Precondition(_))
        ));
    }
}
