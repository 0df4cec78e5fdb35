//! Membership in the four structure classes and the maps between them.
//!
//! For a product with matrix `B`:
//!
//! * `J(B)`: selfadjoint, `A = A*`
//! * `L(B)`: skewadjoint, `A = -A*`
//! * `G(B)`: unitary, `A^H B A = B`
//! * `N(B)`: normal, `A A* = A* A`
//!
//! Membership is decided from residuals against relative thresholds so that
//! the verdict does not depend on the scale of `A`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ensure_square};
use crate::matrix::{times_i, ComplexMatrix};
use crate::product::{FormKind, IndefiniteProduct};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StructureClass {
    J,
    L,
    G,
    N,
}

impl StructureClass {
    pub const ALL: [StructureClass; 4] = [StructureClass::J, StructureClass::L, StructureClass::G, StructureClass::N];
}

impl fmt::Display for StructureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StructureClass::J => "J",
            StructureClass::L => "L",
            StructureClass::G => "G",
            StructureClass::N => "N",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for StructureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(StructureClass::J),
            "L" | "l" => Ok(StructureClass::L),
            "G" | "g" => Ok(StructureClass::G),
            "N" | "n" => Ok(StructureClass::N),
            other => Err(Error::Precondition(format!("unknown class {other:?}, expected J, L, G or N"))),
        }
    }
}

/// Per-class residuals of one matrix under one product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `||A - A*||_2`
    pub res_j: f64,
    /// `||A + A*||_2`
    pub res_l: f64,
    /// `||A^H B A - B||_2`
    pub res_g: f64,
    /// `||A A* - A* A||_2`
    pub res_n: f64,
    pub memberships: BTreeSet<StructureClass>,
}

impl StructureReport {
    pub fn contains(&self, class: StructureClass) -> bool {
        self.memberships.contains(&class)
    }

    pub fn residual(&self, class: StructureClass) -> f64 {
        match class {
            StructureClass::J => self.res_j,
            StructureClass::L => self.res_l,
            StructureClass::G => self.res_g,
            StructureClass::N => self.res_n,
        }
    }
}

/// Scale for the `J`, `L` and `N` membership thresholds.
pub fn algebra_scale(a_norm: f64) -> f64 {
    (1.0 + a_norm).powi(2)
}

/// Scale for the `G` membership threshold.
pub fn group_scale(a_norm: f64, b_norm: f64) -> f64 {
    b_norm * (1.0 + a_norm).powi(2)
}

pub fn res_j(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<f64> {
    Ok(linalg::norm2(&(a - p.adjoint(a)?)))
}

pub fn res_l(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<f64> {
    Ok(linalg::norm2(&(a + p.adjoint(a)?)))
}

pub fn res_g(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<f64> {
    p.check_size(a)?;
    let b = p.matrix();
    Ok(linalg::norm2(&(a.adjoint() * b * a - b)))
}

pub fn res_n(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<f64> {
    let s = p.adjoint(a)?;
    Ok(linalg::norm2(&(a * &s - &s * a)))
}

/// Residual of the structure equation for `class`.
pub fn class_residual(a: &ComplexMatrix, p: &IndefiniteProduct, class: StructureClass) -> Result<f64> {
    match class {
        StructureClass::J => res_j(a, p),
        StructureClass::L => res_l(a, p),
        StructureClass::G => res_g(a, p),
        StructureClass::N => res_n(a, p),
    }
}

/// Membership threshold for `class` at matrix norm `a_norm`.
pub fn class_threshold(class: StructureClass, a_norm: f64, p: &IndefiniteProduct, cfg: &ToleranceConfig) -> f64 {
    match class {
        StructureClass::G => cfg.eq_tol * group_scale(a_norm, p.norm()),
        _ => cfg.eq_tol * algebra_scale(a_norm),
    }
}

pub fn is_member(a: &ComplexMatrix, p: &IndefiniteProduct, class: StructureClass, cfg: &ToleranceConfig) -> Result<bool> {
    let r = class_residual(a, p, class)?;
    Ok(r <= class_threshold(class, linalg::norm2(a), p, cfg))
}

pub fn classify(a: &ComplexMatrix, p: &IndefiniteProduct, cfg: &ToleranceConfig) -> Result<StructureReport> {
    ensure_square(a, "A")?;
    p.check_size(a)?;
    let a_star = p.adjoint(a)?;
    let b = p.matrix();
    let res_j = linalg::norm2(&(a - &a_star));
    let res_l = linalg::norm2(&(a + &a_star));
    let res_g = linalg::norm2(&(a.adjoint() * b * a - b));
    let res_n = linalg::norm2(&(a * &a_star - &a_star * a));

    let a_norm = linalg::norm2(a);
    let alg = cfg.eq_tol * algebra_scale(a_norm);
    let grp = cfg.eq_tol * group_scale(a_norm, p.norm());

    let mut memberships = BTreeSet::new();
    if res_j <= alg {
        memberships.insert(StructureClass::J);
    }
    if res_l <= alg {
        memberships.insert(StructureClass::L);
    }
    if res_g <= grp {
        memberships.insert(StructureClass::G);
    }
    // J, L and G are subsets of N.
    if res_n <= alg || !memberships.is_empty() {
        memberships.insert(StructureClass::N);
    }
    Ok(StructureReport {
        res_j,
        res_l,
        res_g,
        res_n,
        memberships,
    })
}

/// `A = S + K` with `S = (A + A*)/2` selfadjoint and `K = A - S` skewadjoint.
pub fn toeplitz_split(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let a_star = p.adjoint(a)?;
    let s = (a + a_star) * num_complex::Complex64::new(0.5, 0.0);
    let k = a - &s;
    Ok((s, k))
}

fn require_unitary(p: &IndefiniteProduct) -> Result<()> {
    if !p.is_unitary() {
        return Err(Error::Precondition(
            "nearest-point projection needs a unitary B; use toeplitz_split for the plain split".into(),
        ));
    }
    Ok(())
}

/// Nearest `B`-selfadjoint matrix in any unitarily invariant norm (unitary `B`).
pub fn project_j(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<ComplexMatrix> {
    require_unitary(p)?;
    Ok(toeplitz_split(a, p)?.0)
}

/// Nearest `B`-skewadjoint matrix (unitary `B`).
pub fn project_l(a: &ComplexMatrix, p: &IndefiniteProduct) -> Result<ComplexMatrix> {
    require_unitary(p)?;
    let a_star = p.adjoint(a)?;
    Ok((a - a_star) * num_complex::Complex64::new(0.5, 0.0))
}

/// `iA`; swaps `J(B)` and `L(B)`.
pub fn switch(a: &ComplexMatrix) -> ComplexMatrix {
    times_i(a)
}

/// Congruence transport: `(T^{-1} A T, T^H B T)`. Class membership is
/// preserved in both directions.
pub fn transport(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    t: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<(ComplexMatrix, IndefiniteProduct)> {
    p.check_size(a)?;
    p.check_size(t)?;
    let a_new = linalg::solve(t, &(a * t), cfg)?;
    let mut b_new = t.adjoint() * p.matrix() * t;
    // Restore exact (skew-)Hermitian symmetry lost to rounding.
    b_new = match p.kind() {
        FormKind::Hermitian => (&b_new + b_new.adjoint()) * num_complex::Complex64::new(0.5, 0.0),
        FormKind::SkewHermitian => (&b_new - b_new.adjoint()) * num_complex::Complex64::new(0.5, 0.0),
    };
    Ok((a_new, IndefiniteProduct::new(b_new, cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c64, from_real_rows, jordan_block, real_diag, reverse_identity};
    use crate::rng::{random_complex, stream};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn r2() -> IndefiniteProduct {
        IndefiniteProduct::new(reverse_identity(2), &cfg()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let j = jordan_block(2, c64(0.5, 0.0));
        let rep = classify(&j, &r2(), &cfg()).unwrap();
        assert!(rep.contains(StructureClass::J));
        assert!(rep.contains(StructureClass::N));
        assert!(!rep.contains(StructureClass::L));

        let rep = classify(&switch(&j), &r2(), &cfg()).unwrap();
        assert!(rep.contains(StructureClass::L));
        assert!(!rep.contains(StructureClass::J));

        let mut rng = stream(9);
        let h = random_complex(&mut rng, 3, 3);
        let b = &h + h.adjoint() + ComplexMatrix::identity(3, 3) * c64(5.0, 0.0);
        let p = IndefiniteProduct::new(b, &cfg()).unwrap();
        let rep = classify(&ComplexMatrix::identity(3, 3), &p, &cfg()).unwrap();
        assert!(rep.contains(StructureClass::G) && rep.contains(StructureClass::N));
        assert_eq!(rep.res_g, 0.0);
    }

    #[test]
    fn classify_rejects_mismatch() {
        assert!(classify(&ComplexMatrix::identity(3, 3), &r2(), &cfg()).is_err());
    }

    #[test]
    fn split_examples() {
        let p = r2();
        let j = jordan_block(2, c64(1.0, 0.0));
        let (s, k) = toeplitz_split(&j, &p).unwrap();
        assert!((s - &j).norm() < 1e-15 && k.norm() < 1e-15);

        let l = switch(&j);
        let (s, k) = toeplitz_split(&l, &p).unwrap();
        assert!(s.norm() < 1e-15 && (k - &l).norm() < 1e-15);

        let id = IndefiniteProduct::new(ComplexMatrix::identity(2, 2), &cfg()).unwrap();
        let a = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let (s, k) = toeplitz_split(&a, &id).unwrap();
        assert_eq!(s, from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]));
        assert_eq!(k, from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]));
    }

    #[test]
    fn project_examples() {
        let id = IndefiniteProduct::new(ComplexMatrix::identity(2, 2), &cfg()).unwrap();
        let h = from_real_rows(&[&[2.0, 1.0], &[1.0, -3.0]]);
        assert_eq!(project_j(&h, &id).unwrap(), h);
        let a = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert_eq!(project_j(&a, &id).unwrap(), from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]));

        let p = r2();
        let a = jordan_block(2, c64(0.0, 0.0)).transpose();
        let s = project_j(&a, &p).unwrap();
        let expected = (&a + reverse_identity(2) * a.adjoint() * reverse_identity(2)) * c64(0.5, 0.0);
        assert!((&s - expected).norm() < 1e-15);
        assert!(is_member(&s, &p, StructureClass::J, &cfg()).unwrap());
        assert!(is_member(&project_l(&a, &p).unwrap(), &p, StructureClass::L, &cfg()).unwrap());

        let non_unitary = IndefiniteProduct::new(real_diag(&[-2.0, 5.0]), &cfg()).unwrap();
        assert!(matches!(project_j(&a, &non_unitary), Err(Error::Precondition(_))));
    }

    #[test]
    fn switch_examples() {
        let j = jordan_block(2, c64(0.5, 0.0));
        assert!(is_member(&switch(&j), &r2(), StructureClass::L, &cfg()).unwrap());
        assert_eq!(switch(&switch(&j)), -&j);
        assert_eq!(switch(&ComplexMatrix::zeros(2, 2)), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn transport_examples() {
        let p = r2();
        let a = jordan_block(2, c64(0.5, 0.0));
        let (a2, p2) = transport(&a, &p, &ComplexMatrix::identity(2, 2), &cfg()).unwrap();
        assert_eq!(a2, a);
        assert_eq!(p2.matrix(), p.matrix());

        let mut rng = stream(11);
        let t = random_complex(&mut rng, 2, 2) + ComplexMatrix::identity(2, 2) * c64(2.0, 0.0);
        let (a2, p2) = transport(&a, &p, &t, &cfg()).unwrap();
        assert!(classify(&a2, &p2, &cfg()).unwrap().contains(StructureClass::J));

        let singular = real_diag(&[1.0, 0.0]);
        assert!(transport(&a, &p, &singular, &cfg()).is_err());
    }

    #[test]
    fn class_parse_and_display() {
        for c in StructureClass::ALL {
            assert_eq!(c.to_string().parse::<StructureClass>().unwrap(), c);
        }
        assert!("Q".parse::<StructureClass>().is_err());
    }
}
