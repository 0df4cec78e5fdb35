//! Dense kernels: norms, solves, eigenvalues, singular value decompositions,
//! null spaces.
//!
//! Factorizations come from `nalgebra`. Everything here works on
//! [`ComplexMatrix`] by value or reference and never mutates its inputs.

use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tolerance::ToleranceConfig;

const SVD_MAX_ITER: usize = 10_000;

pub fn ensure_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if a.nrows() == 0 {
        return Err(Error::Dimension(format!("{what} is empty")));
    }
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("{what} must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(a.nrows())
}

pub fn ensure_same_size(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "size mismatch: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Thin SVD with singular values sorted in descending order.
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

fn svd_impl(a: &ComplexMatrix, vectors: bool) -> Svd {
    let svd = SVD::try_new(a.clone(), vectors, vectors, f64::EPSILON, SVD_MAX_ITER)
        .or_else(|| SVD::try_new(a.clone(), vectors, vectors, 4.0 * f64::EPSILON, 0))
        .expect("SVD iteration failed to converge");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sorted: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    if !vectors {
        return Svd {
            u: DMatrix::zeros(0, 0),
            s: sorted,
            v: DMatrix::zeros(0, 0),
        };
    }
    let u0 = svd.u.expect("requested U");
    let vt0 = svd.v_t.expect("requested V^H");
    let u = DMatrix::from_fn(u0.nrows(), order.len(), |i, k| u0[(i, order[k])]);
    let v = DMatrix::from_fn(vt0.ncols(), order.len(), |i, k| vt0[(order[k], i)].conj());
    Svd { u, s: sorted, v }
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    svd_impl(a, true)
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    svd_impl(a, false).s
}

/// Largest singular value.
pub fn two_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Dimension("two_norm of an empty matrix".into()));
    }
    Ok(norm2(a))
}

/// Infallible variant of [`two_norm`]; empty matrices have norm zero.
pub fn norm2(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.iter().all(|z| *z == Complex64::default()) {
        return 0.0;
    }
    singular_values(a)[0]
}

/// `sigma_max / sigma_min`; infinite for singular input.
pub fn cond(a: &ComplexMatrix) -> f64 {
    let s = singular_values(a);
    let lo = *s.last().unwrap_or(&0.0);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        s[0] / lo
    }
}

fn check_nonsingular(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<()> {
    let s = singular_values(a);
    let hi = s[0];
    let lo = *s.last().unwrap();
    if hi == 0.0 || lo <= cfg.rank_tol * hi {
        return Err(Error::Singular {
            ratio: if hi == 0.0 { 0.0 } else { lo / hi },
        });
    }
    Ok(())
}

/// Solves `A X = Y` with LU after a singularity check on the singular values.
pub fn solve(a: &ComplexMatrix, y: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let n = ensure_square(a, "solve: A")?;
    if y.nrows() != n {
        return Err(Error::Dimension(format!("solve: A is {n}x{n} but Y has {} rows", y.nrows())));
    }
    check_nonsingular(a, cfg)?;
    a.clone().lu().solve(y).ok_or(Error::Singular { ratio: 0.0 })
}

pub fn inverse(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    let n = ensure_square(a, "inverse")?;
    solve(a, &ComplexMatrix::identity(n, n), cfg)
}

/// Eigenvalues with multiplicity, from the complex Schur form.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = ensure_square(a, "eigenvalues")?;
    if n == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 1000 * n)
        .or_else(|| Schur::try_new(a.clone(), 8.0 * f64::EPSILON, 10_000 * n))
        .ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Hermitian eigendecomposition. Eigenvalues ascending; each eigenvector is
/// normalized so that its largest-magnitude component is real and positive.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = ensure_square(a, "hermitian_eigen")?;
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000 * n).ok_or(Error::EigenFailure)?;
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let mut u = DMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            u[(i, k)] = col[i] * phase;
        }
    }
    Ok((order.iter().map(|&i| vals[i]).collect(), u))
}

/// Orthonormal basis for the right singular subspace of the `dim` smallest
/// singular values (a numerical null space of known dimension). Wide inputs
/// are padded with zero rows so the full right basis is available.
pub fn smallest_right_vectors(a: &ComplexMatrix, dim: usize) -> (ComplexMatrix, Vec<f64>) {
    let c = a.ncols();
    let padded;
    let m = if a.nrows() < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (a.nrows(), c)).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let d = svd(m);
    let start = c - dim;
    (d.v.columns(start, dim).into_owned(), d.s)
}

/// Orthonormal basis of the numerical null space: singular values
/// `<= threshold`, counting missing rows of a wide matrix as zeros.
pub fn null_space(a: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let s = singular_values_padded(a);
    let dim = s.iter().filter(|&&x| x <= threshold).count();
    smallest_right_vectors(a, dim).0
}

fn singular_values_padded(a: &ComplexMatrix) -> Vec<f64> {
    let mut s = singular_values(a);
    s.resize(a.ncols().max(s.len()), 0.0);
    s
}

/// Orthonormal basis of the column space, dropping directions with singular
/// value `<= rel_tol * sigma_max`.
pub fn orth(a: &ComplexMatrix, rel_tol: f64) -> ComplexMatrix {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let d = svd(a);
    let hi = d.s.first().copied().unwrap_or(0.0);
    let r = d.s.iter().filter(|&&x| hi > 0.0 && x > rel_tol * hi).count();
    d.u.columns(0, r).into_owned()
}

/// Numerical rank with a relative cutoff.
pub fn rank(a: &ComplexMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let hi = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| hi > 0.0 && x > rel_tol * hi).count()
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Horizontal concatenation.
pub fn hstack(parts: &[&ComplexMatrix]) -> ComplexMatrix {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}
