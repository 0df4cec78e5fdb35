//! Perturbation to diagonalizable form inside `N(B)`.
//!
//! A `B`-normal `N` splits as `S - i K_H` with commuting `S, K_H` in `J(B)`.
//! After shifting `S` to a 1-regular `S_c` that still commutes with `K_H`,
//! `K_H = p(S_c)` for a polynomial `p`. Perturbing `S_c` to a diagonalizable
//! `F` in `J(B)` and taking `F - i r(F)`, with `r` the selfadjoint part of
//! `p`, gives a diagonalizable normal matrix close to `N`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::canonical::commuting_one_regular;
use crate::classes::{self, StructureClass};
use crate::densify::{check_eps, require_member, run_search, DensifyResult, FitCertificate, SearchOutcome, Trial};
use crate::densify_jl::densify_j;
use crate::error::{Error, Result};
use crate::linalg::{self, ensure_same_size, ensure_square};
use crate::matrix::{c64, ComplexMatrix, I};
use crate::product::{FormKind, IndefiniteProduct};
use crate::rng::jitter;
use crate::spectral;
use crate::tolerance::{SearchConfig, ToleranceConfig};

/// Trials for the 1-regular shift.
pub const SHIFT_TRIALS: usize = 64;
/// Halvings of the inner budget.
pub const MAX_HALVINGS: usize = 40;

/// `N = S - i K_H` with `S`, `K_H` in `J(B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalSplit {
    #[serde(with = "crate::matrix::serde_matrix")]
    pub s: ComplexMatrix,
    #[serde(with = "crate::matrix::serde_matrix")]
    pub k_h: ComplexMatrix,
    /// `||S K_H - K_H S||_2`
    pub commutator: f64,
    /// `||(S - i K_H) - N||_2`
    pub reconstruction: f64,
}

impl NormalSplit {
    pub fn reconstruct(&self) -> ComplexMatrix {
        &self.s - &self.k_h * I
    }
}

/// `S = (N + N*)/2`, `K_H = i (N - S)`.
pub fn normal_split(n: &ComplexMatrix, p: &IndefiniteProduct, cfg: &ToleranceConfig) -> Result<NormalSplit> {
    require_member(n, p, StructureClass::N, cfg)?;
    let (s, k) = classes::toeplitz_split(n, p)?;
    let k_h = k * I;
    let commutator = linalg::norm2(&(&s * &k_h - &k_h * &s));
    let mut split = NormalSplit {
        s,
        k_h,
        commutator,
        reconstruction: 0.0,
    };
    split.reconstruction = linalg::norm2(&(split.reconstruct() - n));
    // S K_H - K_H S = (i/2)(N* N - N N*), so this is implied by membership up
    // to rounding.
    let bound = cfg.eq_tol * (1.0 + linalg::norm2(n)).powi(2);
    if split.commutator > bound {
        return Err(Error::Precondition(format!(
            "selfadjoint and skewadjoint parts do not commute ({:.3e} > {bound:.3e})",
            split.commutator
        )));
    }
    Ok(split)
}

/// A polynomial `p` with `p(S_c) ~ K_H`.
///
/// Stored as an expansion `sum_k w_k q_k(x)` in the polynomials generated by
/// the orthogonalized Krylov recurrence of `S_c`
/// (`x q_k = sum_{j <= k+1} h_{jk} q_j`), which evaluates stably at matrices
/// near `S_c`. `coeffs` holds the equivalent monomial coefficients
/// `a_0, a_1, ...` (ascending degree) for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    #[serde(with = "crate::matrix::serde_complex_vec")]
    pub coeffs: Vec<Complex64>,
    #[serde(skip)]
    recurrence: Option<Recurrence>,
}

#[derive(Debug, Clone, PartialEq)]
struct Recurrence {
    /// `q_0 = q0`.
    q0: Complex64,
    /// Column `k` holds `h_{0k}, ..., h_{k+1,k}`.
    h: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
}

impl Recurrence {
    fn conj(&self) -> Recurrence {
        Recurrence {
            q0: self.q0.conj(),
            h: self.h.iter().map(|col| col.iter().map(|z| z.conj()).collect()).collect(),
            w: self.w.iter().map(|z| z.conj()).collect(),
        }
    }

    /// `sum_k w_k q_k(F)`.
    fn eval(&self, f: &ComplexMatrix) -> ComplexMatrix {
        let n = f.nrows();
        let mut qs = vec![ComplexMatrix::identity(n, n) * self.q0];
        for col in self.h.iter().take(self.w.len() - 1) {
            let k = qs.len() - 1;
            let mut next = f * &qs[k];
            for (j, hj) in col.iter().take(k + 1).enumerate() {
                next -= &qs[j] * *hj;
            }
            qs.push(next / col[k + 1]);
        }
        let mut out = ComplexMatrix::zeros(n, n);
        for (q, w) in qs.iter().zip(&self.w) {
            out += q * *w;
        }
        out
    }

    /// Monomial coefficients, ascending degree.
    fn monomial(&self) -> Vec<Complex64> {
        let len = self.w.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut qs: Vec<Vec<Complex64>> = vec![vec![self.q0]];
        for col in self.h.iter().take(len - 1) {
            let k = qs.len() - 1;
            let mut next = vec![zero; k + 2];
            for (d, c) in qs[k].iter().enumerate() {
                next[d + 1] += c;
            }
            for (j, hj) in col.iter().take(k + 1).enumerate() {
                for (d, c) in qs[j].iter().enumerate() {
                    next[d] -= c * hj;
                }
            }
            qs.push(next.into_iter().map(|c| c / col[k + 1]).collect());
        }
        let mut out = vec![zero; len];
        for (q, w) in qs.iter().zip(&self.w) {
            for (d, c) in q.iter().enumerate() {
                out[d] += c * w;
            }
        }
        out
    }
}

impl PolyCoeffs {
    /// Polynomial with the given monomial coefficients (ascending degree).
    pub fn from_monomial(coeffs: Vec<Complex64>) -> Self {
        PolyCoeffs {
            coeffs,
            recurrence: None,
        }
    }

    /// `p(F)`.
    pub fn eval(&self, f: &ComplexMatrix) -> ComplexMatrix {
        match &self.recurrence {
            Some(r) => r.eval(f),
            None => horner(&self.coeffs, f),
        }
    }

    /// `conj(p)(F)`, the polynomial with conjugated coefficients.
    pub fn eval_conj(&self, f: &ComplexMatrix) -> ComplexMatrix {
        match &self.recurrence {
            Some(r) => r.conj().eval(f),
            None => horner(&self.coeffs.iter().map(|z| z.conj()).collect::<Vec<_>>(), f),
        }
    }
}

fn horner(coeffs: &[Complex64], f: &ComplexMatrix) -> ComplexMatrix {
    let n = f.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for c in coeffs.iter().rev() {
        out = f * out + ComplexMatrix::identity(n, n) * *c;
    }
    out
}

fn frob_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Least-squares fit of `K_H` in `span{I, S_c, ..., S_c^{n-1}}`, in the
/// orthonormal (Frobenius) basis produced by the Krylov recurrence.
///
/// The residual `||p(S_c) - K_H||_2` must stay below
/// `rank_tol * (1 + ||K_H||_2) * kappa` with
/// `kappa = 1 + sum_k |w_k| prod_{j<k} ||S_c||_2 / h_{j+1,j}`; otherwise `K_H` is
/// not a polynomial in `S_c`.
pub fn fit_polynomial(s_c: &ComplexMatrix, k_h: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<(PolyCoeffs, FitCertificate)> {
    let n = ensure_square(s_c, "fit_polynomial: S_c")?;
    ensure_same_size(s_c, k_h)?;
    if !spectral::is_one_regular(s_c, cfg)? {
        return Err(Error::Precondition("fit_polynomial needs a 1-regular S_c".into()));
    }
    let s_norm = linalg::norm2(s_c);
    let q0 = c64(1.0 / (n as f64).sqrt(), 0.0);
    let mut basis = vec![ComplexMatrix::identity(n, n) * q0];
    let mut h: Vec<Vec<Complex64>> = Vec::new();
    while basis.len() < n {
        let k = basis.len() - 1;
        let mut w = s_c * &basis[k];
        let mut col = vec![c64(0.0, 0.0); k + 2];
        for _ in 0..2 {
            for (j, x) in basis.iter().enumerate() {
                let hj = frob_inner(x, &w);
                w -= x * hj;
                col[j] += hj;
            }
        }
        let norm = w.norm();
        if norm <= cfg.rank_tol * s_norm {
            break;
        }
        col[k + 1] = c64(norm, 0.0);
        basis.push(w / c64(norm, 0.0));
        h.push(col);
    }
    let w: Vec<Complex64> = basis.iter().map(|x| frob_inner(x, k_h)).collect();
    // Rounding in q_k(S_c) grows like prod_{j<k} ||S_c|| / h_{j+1,j}.
    let mut amp = 1.0;
    let mut kappa = 1.0 + w[0].norm();
    for (col, wk) in h.iter().zip(&w[1..]) {
        amp *= s_norm / col[col.len() - 1].re;
        kappa += wk.norm() * amp;
    }
    let rec = Recurrence { q0, h, w };
    let poly = PolyCoeffs {
        coeffs: rec.monomial(),
        recurrence: Some(rec),
    };
    let residual = linalg::norm2(&(poly.eval(s_c) - k_h));
    let bound = cfg.rank_tol * (1.0 + linalg::norm2(k_h)) * kappa;
    if !(residual <= bound) {
        return Err(Error::NotInCentralizer { residual, bound });
    }
    let cert = FitCertificate {
        residual,
        bound,
        coeffs: poly.coeffs.clone(),
    };
    Ok((poly, cert))
}

/// `(p(F) + conj(p)(F)) / 2`, the polynomial in `F` with coefficients
/// `Re(a_k)`. For `F` in `J(B)` this equals `(p(F) + p(F)*) / 2` and lies in
/// `J(B)`; it always commutes with `F`.
pub fn realify_polynomial(p: &PolyCoeffs, f: &ComplexMatrix, prod: &IndefiniteProduct) -> Result<ComplexMatrix> {
    ensure_square(f, "realify_polynomial: F")?;
    prod.check_size(f)?;
    Ok((p.eval(f) + p.eval_conj(f)) * c64(0.5, 0.0))
}

struct Candidate {
    result: DensifyResult,
    selfadjoint_gap: f64,
    skew_gap: f64,
}

/// Diagonalizable `N'` in `N(B)` with `||N - N'||_2 <= eps`, for a Hermitian
/// unitary `B`.
pub fn densify_n_unitary(
    n: &ComplexMatrix,
    p: &IndefiniteProduct,
    eps: f64,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DensifyResult> {
    check_eps(eps)?;
    if p.kind() != FormKind::Hermitian || !p.is_unitary() {
        return Err(Error::Precondition("densify_n_unitary needs a Hermitian unitary B".into()));
    }
    let split = normal_split(n, p, cfg)?;
    let e = commuting_one_regular(&split.k_h, p, cfg)?;
    let e_norm = linalg::norm2(&e);

    // 1-regular shift S_c = S + cE.
    let c_max = eps / (4.0 * e_norm);
    let shift_cfg = search.child(1);
    let eval = |m: usize| -> Result<Trial<(f64, ComplexMatrix)>> {
        let c = c_max * 0.5f64.powi(m as i32 - 1) * jitter(shift_cfg.seed, m as u64);
        let s_c = &split.s + &e * c64(c, 0.0);
        let rank = spectral::krylov_rank(&s_c, cfg)?;
        Ok(Trial {
            accepted: rank == s_c.nrows(),
            score: rank as f64,
            value: (c, s_c),
        })
    };
    let (shift_trials, (c, s_c)) = match run_search(SHIFT_TRIALS, &shift_cfg, eval)? {
        SearchOutcome::Accepted { trial, value } => (trial, value),
        SearchOutcome::Exhausted { .. } => {
            return Err(Error::Convergence {
                stage: "densify_N: 1-regular shift",
                iterations: SHIFT_TRIALS,
                best: None,
            })
        }
    };
    let (poly, fit) = fit_polynomial(&s_c, &split.k_h, cfg)?;

    let mut best: Option<Candidate> = None;
    for k in 1..=MAX_HALVINGS {
        let delta = eps / 4.0 * 0.5f64.powi(k as i32 - 1);
        let inner = search.child(100 + k as u64);
        let f = match densify_j(&s_c, p, delta, cfg, &inner) {
            Ok(r) => r.perturbed,
            Err(Error::SearchExhausted { .. }) => continue,
            Err(e) => return Err(e),
        };
        let g = realify_polynomial(&poly, &f, p)?;
        let selfadjoint_gap = linalg::norm2(&(&split.s - &f));
        let skew_gap = linalg::norm2(&(&split.k_h - &g));
        let n_prime = &f - &g * I;
        let mut result = DensifyResult::measure(n, n_prime, p, StructureClass::N, cfg)?;
        result.c_used = c64(c, 0.0);
        result.trials = shift_trials + k;
        result.seed = inner.seed;
        result.fit = Some(fit.clone());
        let ok = selfadjoint_gap < eps / 2.0
            && skew_gap < eps / 2.0
            && result.distance <= eps
            && result.in_class()
            && result.diagonalizable;
        if ok {
            return Ok(result);
        }
        let better = best.as_ref().is_none_or(|b| {
            selfadjoint_gap.max(skew_gap) < b.selfadjoint_gap.max(b.skew_gap)
        });
        if better {
            best = Some(Candidate {
                result,
                selfadjoint_gap,
                skew_gap,
            });
        }
    }
    Err(Error::Convergence {
        stage: "densify_N: realified polynomial budget",
        iterations: MAX_HALVINGS,
        best: best.map(|b| Box::new(b.result)),
    })
}

/// Diagonalizable `N'` in `N(B)` with `||N - N'||_2 <= eps` for any Hermitian
/// or skew-Hermitian `B`.
///
/// A skew-Hermitian `B` is replaced by `iB`. A non-unitary Hermitian `B` is
/// reduced to `diag(-I, I)` by its Sylvester congruence `Q`; the inner budget
/// is `eps / cond(Q)` and the result is re-certified on the original pair.
pub fn densify_n(
    n: &ComplexMatrix,
    p: &IndefiniteProduct,
    eps: f64,
    cfg: &ToleranceConfig,
    search: &SearchConfig,
) -> Result<DensifyResult> {
    check_eps(eps)?;
    require_member(n, p, StructureClass::N, cfg)?;
    let h = p.to_hermitian(cfg)?;
    let (candidate, inner) = if h.is_unitary() {
        let r = densify_n_unitary(n, &h, eps, cfg, search)?;
        (r.perturbed.clone(), r)
    } else {
        let (q, q_inv) = h.sylvester_pair()?;
        let inertia = h.inertia().expect("Hermitian form has inertia");
        let target = IndefiniteProduct::signature(inertia.minus, inertia.plus);
        let n1 = &q_inv * n * &q;
        let kappa = linalg::norm2(&q) * linalg::norm2(&q_inv);
        let r = densify_n_unitary(&n1, &target, eps / kappa, cfg, search)?;
        (&q * &r.perturbed * &q_inv, r)
    };
    let mut result = DensifyResult::measure(n, candidate, p, StructureClass::N, cfg)?;
    result.c_used = inner.c_used;
    result.trials = inner.trials;
    result.seed = inner.seed;
    result.fit = inner.fit;
    if !(result.distance <= eps && result.in_class() && result.diagonalizable) {
        return Err(Error::BudgetTooTight(format!(
            "result on the original form has distance {:.3e} (eps {eps:.3e}), class residual {:.3e} \
             (bound {:.3e}), diagonalizable {}",
            result.distance, result.class_residual, result.class_bound, result.diagonalizable
        )));
    }
    Ok(result)
}
