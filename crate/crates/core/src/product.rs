//! The indefinite scalar product `[x, y]_B = x^H B y`.
//!
//! [`IndefiniteProduct`] validates `B` once (Hermitian or skew-Hermitian,
//! nonsingular), caches its LU factorization for the adjoint
//! `A* = B^{-1} A^H B`, and records inertia for the Hermitian case.

use nalgebra::LU;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ensure_square};
use crate::matrix::{signature, times_i, ComplexMatrix};
use crate::tolerance::ToleranceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    Hermitian,
    SkewHermitian,
}

/// Counts of negative and positive eigenvalues of a Hermitian `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub minus: usize,
    pub plus: usize,
}

#[derive(Debug, Clone)]
pub struct IndefiniteProduct {
    b: ComplexMatrix,
    lu: LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    kind: FormKind,
    is_unitary: bool,
    inertia: Option<Inertia>,
    norm: f64,
    /// Hermitian eigendecomposition of `B`, kept for the Sylvester congruence.
    eig: Option<(Vec<f64>, ComplexMatrix)>,
}

impl IndefiniteProduct {
    pub fn new(b: ComplexMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        let n = ensure_square(&b, "B")?;
        let norm = linalg::norm2(&b);
        if norm == 0.0 {
            return Err(Error::DegenerateForm { ratio: 0.0 });
        }
        let herm = linalg::norm2(&(&b - b.adjoint())) / norm;
        let skew = linalg::norm2(&(&b + b.adjoint())) / norm;
        let kind = if herm <= cfg.eq_tol {
            FormKind::Hermitian
        } else if skew <= cfg.eq_tol {
            FormKind::SkewHermitian
        } else {
            return Err(Error::UnsupportedForm { herm, skew });
        };

        let s = linalg::singular_values(&b);
        let ratio = s[n - 1] / s[0];
        if ratio <= cfg.rank_tol {
            return Err(Error::DegenerateForm { ratio });
        }

        let (inertia, eig) = match kind {
            FormKind::Hermitian => {
                let (vals, vecs) = linalg::hermitian_eigen(&b)?;
                if let Some(v) = vals.iter().find(|v| v.abs() <= cfg.rank_tol * norm) {
                    return Err(Error::DegenerateForm { ratio: v.abs() / norm });
                }
                let minus = vals.iter().filter(|&&v| v < 0.0).count();
                (Some(Inertia { minus, plus: n - minus }), Some((vals, vecs)))
            }
            FormKind::SkewHermitian => (None, None),
        };

        let unitary_res = linalg::norm2(&(b.adjoint() * &b - ComplexMatrix::identity(n, n)));
        let lu = b.clone().lu();
        Ok(IndefiniteProduct {
            b,
            lu,
            kind,
            is_unitary: unitary_res <= cfg.eq_tol,
            inertia,
            norm,
            eig,
        })
    }

    /// The exact signature matrix `diag(-I_minus, I_plus)`.
    pub fn signature(minus: usize, plus: usize) -> Self {
        let cfg = ToleranceConfig::default();
        Self::new(signature(minus, plus), &cfg).expect("signature matrices are valid forms")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn is_unitary(&self) -> bool {
        self.is_unitary
    }

    pub fn inertia(&self) -> Option<Inertia> {
        self.inertia
    }

    /// `||B||_2`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub(crate) fn check_size(&self, a: &ComplexMatrix) -> Result<()> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but B is {n}x{n}",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(())
    }

    /// `B^{-1} Y`.
    pub fn solve_b(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.lu.solve(y).expect("B was verified nonsingular")
    }

    /// The `B`-adjoint `A* = B^{-1} A^H B`.
    pub fn adjoint(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_size(a)?;
        Ok(self.solve_b(&(a.adjoint() * &self.b)))
    }

    /// Nonsingular `Q` with `Q^H B Q = diag(-I, I)`, negative directions first.
    ///
    /// Built from `B = U Λ U^H` as `Q = U |Λ|^{-1/2}`; the residual is
    /// verified before returning.
    pub fn sylvester_congruence(&self, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
        let (q, _) = self.sylvester_pair()?;
        let inertia = self.inertia.expect("Hermitian kind has inertia");
        let target = signature(inertia.minus, inertia.plus);
        let res = linalg::norm2(&(q.adjoint() * &self.b * &q - target));
        if res > cfg.eq_tol * self.norm.max(1.0) * self.dim() as f64 {
            return Err(Error::Structure(format!("Sylvester congruence residual {res:.3e} too large")));
        }
        Ok(q)
    }

    /// `(Q, Q^{-1})` for the Sylvester congruence, with `Q^{-1} = |Λ|^{1/2} U^H`.
    pub(crate) fn sylvester_pair(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        if self.kind != FormKind::Hermitian {
            return Err(Error::Precondition("Sylvester congruence needs a Hermitian B".into()));
        }
        let (vals, u) = self.eig.as_ref().expect("Hermitian kind has an eigendecomposition");
        let n = self.dim();
        let mut q = u.clone();
        let mut q_inv = u.adjoint();
        for (k, v) in vals.iter().enumerate() {
            let s = v.abs().sqrt();
            for i in 0..n {
                q[(i, k)] /= s;
                q_inv[(k, i)] *= s;
            }
        }
        Ok((q, q_inv))
    }

    /// The product with matrix `iB`, which is Hermitian when `B` is
    /// skew-Hermitian and defines the same four structure classes.
    pub fn hermitize(&self, cfg: &ToleranceConfig) -> Result<IndefiniteProduct> {
        if self.kind != FormKind::SkewHermitian {
            return Err(Error::Precondition("hermitize needs a skew-Hermitian B".into()));
        }
        IndefiniteProduct::new(times_i(&self.b), cfg)
    }

    /// `self` if Hermitian, otherwise its hermitized form.
    pub fn to_hermitian(&self, cfg: &ToleranceConfig) -> Result<IndefiniteProduct> {
        match self.kind {
            FormKind::Hermitian => Ok(self.clone()),
            FormKind::SkewHermitian => self.hermitize(cfg),
        }
    }
}

/// Free-function spelling of [`IndefiniteProduct::new`].
pub fn make_product(b: ComplexMatrix, cfg: &ToleranceConfig) -> Result<IndefiniteProduct> {
    IndefiniteProduct::new(b, cfg)
}
