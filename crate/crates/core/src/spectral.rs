//! Characteristic polynomial, discriminant, eigenvalue gaps, Krylov rank and
//! diagonalizability.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, ensure_square};
use crate::matrix::ComplexMatrix;
use crate::tolerance::ToleranceConfig;

/// Monic characteristic polynomial `x^n + c_1 x^{n-1} + ... + c_n`,
/// stored highest degree first so `coeffs[0] == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    #[serde(with = "crate::matrix::serde_complex_vec")]
    pub coeffs: Vec<Complex64>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Coefficients of the derivative, highest degree first.
    pub fn derivative(&self) -> Vec<Complex64> {
        let n = self.degree();
        self.coeffs[..n]
            .iter()
            .enumerate()
            .map(|(k, &c)| c * (n - k) as f64)
            .collect()
    }
}

/// Faddeev–LeVerrier recurrence: `M_k = A M_{k-1} + c_{k-1} I`,
/// `c_k = -tr(A M_k) / k`.
pub fn char_poly(a: &ComplexMatrix) -> Result<CharPoly> {
    let n = ensure_square(a, "char_poly")?;
    let id = ComplexMatrix::identity(n, n);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[k - 1];
        let am = a * &m;
        coeffs.push(-linalg::trace(&am) / k as f64);
    }
    Ok(CharPoly { coeffs })
}

/// `ln |prod_{k != j} (l_k - l_j)|` from a list of eigenvalues; `-inf` when
/// two eigenvalues coincide exactly.
pub fn log_discriminant_mag(eigs: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for (k, a) in eigs.iter().enumerate() {
        for b in &eigs[k + 1..] {
            // Each unordered pair appears twice in the ordered product.
            acc += 2.0 * (a - b).norm().ln();
        }
    }
    acc
}

/// `prod_{k != j} (l_k - l_j)` over ordered pairs of eigenvalues.
pub fn discriminant_from_eigs(eigs: &[Complex64]) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for (k, a) in eigs.iter().enumerate() {
        for (j, b) in eigs.iter().enumerate() {
            if k != j {
                prod *= a - b;
            }
        }
    }
    prod
}

pub fn discriminant(a: &ComplexMatrix) -> Result<Complex64> {
    Ok(discriminant_from_eigs(&linalg::eigenvalues(a)?))
}

/// Smallest pairwise eigenvalue distance; `+inf` when there are fewer than
/// two eigenvalues.
pub fn min_gap_of(eigs: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (k, a) in eigs.iter().enumerate() {
        for b in &eigs[k + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

pub fn min_eig_gap(a: &ComplexMatrix) -> Result<f64> {
    Ok(min_gap_of(&linalg::eigenvalues(a)?))
}

/// The `n^2 x n` matrix whose column `k` is the column-major `vec(A^k)`.
pub fn krylov_matrix(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = ensure_square(a, "krylov_matrix")?;
    let mut out = ComplexMatrix::zeros(n * n, n);
    let mut power = ComplexMatrix::identity(n, n);
    for k in 0..n {
        out.column_mut(k).copy_from_slice(power.as_slice());
        power = a * &power;
    }
    Ok(out)
}

fn frob_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Dimension of `span{I, A, ..., A^{n-1}}`.
///
/// Built with an orthogonalized recurrence `X_{k+1} ∝ A X_k - sum h_j X_j`
/// (Frobenius inner product, two Gram–Schmidt passes) starting from
/// `I / sqrt(n)`. The span grows until the new direction is at most
/// `rank_tol * ||A||_2`, which keeps the decision scale invariant and avoids
/// the dynamic range of raw powers.
pub fn krylov_rank(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<usize> {
    let n = ensure_square(a, "krylov_rank")?;
    let a_norm = linalg::norm2(a);
    if a_norm == 0.0 {
        return Ok(1);
    }
    let mut basis = vec![ComplexMatrix::identity(n, n) / Complex64::new((n as f64).sqrt(), 0.0)];
    while basis.len() < n {
        let mut w = a * basis.last().unwrap();
        for _ in 0..2 {
            for x in &basis {
                let h = frob_inner(x, &w);
                w -= x * h;
            }
        }
        let h = w.norm();
        if h <= cfg.rank_tol * a_norm {
            break;
        }
        basis.push(w / Complex64::new(h, 0.0));
    }
    Ok(basis.len())
}

/// True when `I, A, ..., A^{n-1}` are numerically independent
/// (each eigenvalue has a one-dimensional eigenspace).
pub fn is_one_regular(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<bool> {
    let n = ensure_square(a, "is_one_regular")?;
    Ok(krylov_rank(a, cfg)? == n)
}

/// Single-linkage clusters of `eigs` at the given radius, as index lists in
/// order of first appearance.
pub fn cluster_eigenvalues(eigs: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(s) => clusters[s].push(i),
            None => {
                root_slot[r] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }
    clusters
}

pub fn cluster_mean(eigs: &[Complex64], idx: &[usize]) -> Complex64 {
    idx.iter().map(|&i| eigs[i]).sum::<Complex64>() / idx.len() as f64
}

/// Every eigenvalue cluster has as many independent eigenvectors as members.
///
/// Well-separated spectra are accepted directly. Otherwise eigenvalues are
/// clustered with radius `cluster_tol * (1 + ||A||_2)` and, for each cluster of
/// size `m` with mean `mu`, the number of singular values of `A - mu I` below
/// that radius must equal `m`.
pub fn is_diagonalizable(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<bool> {
    let n = ensure_square(a, "is_diagonalizable")?;
    let eigs = linalg::eigenvalues(a)?;
    let scale = 1.0 + linalg::norm2(a);
    if min_gap_of(&eigs) > cfg.gap_tol * scale {
        return Ok(true);
    }
    let radius = cfg.cluster_tol * scale;
    let threshold = radius.max(cfg.rank_tol * scale);
    for cluster in cluster_eigenvalues(&eigs, radius) {
        if cluster.len() == 1 {
            continue;
        }
        let mu = cluster_mean(&eigs, &cluster);
        let shifted = a - ComplexMatrix::identity(n, n) * mu;
        let geometric = linalg::singular_values(&shifted)
            .iter()
            .filter(|&&s| s <= threshold)
            .count();
        if geometric != cluster.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c64, diag, from_real_rows, jordan_block, real_diag};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn char_poly_examples() {
        let p = char_poly(&ComplexMatrix::identity(2, 2)).unwrap();
        assert_eq!(p.coeffs, vec![c64(1.0, 0.0), c64(-2.0, 0.0), c64(1.0, 0.0)]);
        let p = char_poly(&jordan_block(2, c64(0.0, 0.0))).unwrap();
        assert_eq!(p.coeffs, vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        let p = char_poly(&from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(p.coeffs, vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)]);
        assert!(char_poly(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn discriminant_examples() {
        let d = discriminant(&real_diag(&[1.0, 3.0])).unwrap();
        assert!((d - c64(-4.0, 0.0)).norm() < 1e-14);
        assert_eq!(discriminant(&jordan_block(2, c64(0.0, 0.0))).unwrap(), c64(0.0, 0.0));
        assert_eq!(discriminant(&ComplexMatrix::identity(3, 3)).unwrap(), c64(0.0, 0.0));
    }

    #[test]
    fn min_gap_examples() {
        assert!((min_eig_gap(&real_diag(&[1.0, 3.0])).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(min_eig_gap(&jordan_block(2, c64(0.0, 0.0))).unwrap(), 0.0);
        let g = min_eig_gap(&diag(&[c64(0.0, 0.0), c64(0.0, 1.0), c64(1.0, 0.0)])).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
        assert_eq!(min_eig_gap(&real_diag(&[4.0])).unwrap(), f64::INFINITY);
    }

    #[test]
    fn krylov_examples() {
        let k = krylov_matrix(&real_diag(&[7.0])).unwrap();
        assert_eq!(k.shape(), (1, 1));
        assert_eq!(k[(0, 0)], c64(1.0, 0.0));
        let k = krylov_matrix(&ComplexMatrix::identity(2, 2)).unwrap();
        assert_eq!(linalg::rank(&k, 1e-8), 1);
        let k = krylov_matrix(&jordan_block(2, c64(0.0, 0.0))).unwrap();
        assert_eq!(linalg::rank(&k, 1e-8), 2);
        assert_eq!(k[(2, 1)], c64(1.0, 0.0));
    }

    #[test]
    fn one_regular_examples() {
        assert!(!is_one_regular(&ComplexMatrix::identity(2, 2), &cfg()).unwrap());
        assert!(is_one_regular(&jordan_block(2, c64(0.0, 0.0)), &cfg()).unwrap());
        assert!(is_one_regular(&real_diag(&[1.0, 2.0, 3.0]), &cfg()).unwrap());
        assert!(is_one_regular(&ComplexMatrix::zeros(1, 1), &cfg()).unwrap());
        assert!(!is_one_regular(&ComplexMatrix::zeros(3, 3), &cfg()).unwrap());
        for n in 1..=8 {
            assert_eq!(krylov_rank(&ComplexMatrix::identity(n, n), &cfg()).unwrap(), 1);
            assert_eq!(krylov_rank(&jordan_block(n, c64(0.0, 0.0)), &cfg()).unwrap(), n);
        }
    }

    #[test]
    fn diagonalizable_examples() {
        assert!(is_diagonalizable(&real_diag(&[5.0, 5.0, 2.0]), &cfg()).unwrap());
        assert!(!is_diagonalizable(&jordan_block(2, c64(0.0, 0.0)), &cfg()).unwrap());
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0 + 1e-2]]);
        assert!(is_diagonalizable(&a, &cfg()).unwrap());
    }

    #[test]
    fn clustering_is_transitive() {
        let eigs = [c64(0.0, 0.0), c64(0.5, 0.0), c64(1.0, 0.0), c64(5.0, 0.0)];
        let c = cluster_eigenvalues(&eigs, 0.6);
        assert_eq!(c, vec![vec![0, 1, 2], vec![3]]);
    }
}
