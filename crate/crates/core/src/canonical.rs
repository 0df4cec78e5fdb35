//! Numerical canonical form of a pair `(A, B)` with `A` `B`-selfadjoint and
//! `B` Hermitian: `T^{-1} A T = J` (Jordan form) and `T^H B T` a direct sum of
//! signed reverse identities. Also builds a 1-regular selfadjoint matrix
//! commuting with `A`.
//!
//! Jordan structure is fragile in floating point, so every form is checked
//! against its defining residuals before it is returned.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{self, StructureClass};
use crate::densify::require_member;
use crate::error::{Error, Result};
use crate::linalg::{self, hstack};
use crate::matrix::{c64, direct_sum, jordan_block, reverse_identity, ComplexMatrix};
use crate::product::{FormKind, IndefiniteProduct};
use crate::spectral::{self, cluster_eigenvalues, cluster_mean};
use crate::tolerance::ToleranceConfig;

/// One diagonal block of the canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalBlock {
    /// Jordan block size. A nonreal pair occupies `2 * size` columns.
    pub size: usize,
    /// Eigenvalue; upper half-plane representative for a pair.
    #[serde(with = "crate::matrix::serde_complex")]
    pub eigenvalue: Complex64,
    /// Sign for a real-eigenvalue block, `None` for a nonreal pair.
    pub eta: Option<i8>,
}

impl CanonicalBlock {
    pub fn is_pair(&self) -> bool {
        self.eta.is_none()
    }

    /// Number of columns of `T` the block occupies.
    pub fn width(&self) -> usize {
        if self.is_pair() {
            2 * self.size
        } else {
            self.size
        }
    }

    fn jordan(&self) -> ComplexMatrix {
        if self.is_pair() {
            direct_sum(&[
                jordan_block(self.size, self.eigenvalue),
                jordan_block(self.size, self.eigenvalue.conj()),
            ])
        } else {
            jordan_block(self.size, self.eigenvalue)
        }
    }

    fn form(&self) -> ComplexMatrix {
        match self.eta {
            Some(s) => reverse_identity(self.size) * c64(s as f64, 0.0),
            None => reverse_identity(2 * self.size),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPairForm {
    #[serde(with = "crate::matrix::serde_matrix")]
    pub t: ComplexMatrix,
    #[serde(with = "crate::matrix::serde_matrix")]
    pub j: ComplexMatrix,
    #[serde(with = "crate::matrix::serde_matrix")]
    pub b_tilde: ComplexMatrix,
    /// Signs of the real-eigenvalue blocks, in block order.
    pub eta: Vec<i8>,
    /// Width of each diagonal block of `b_tilde` (`2p` for a nonreal pair).
    pub block_sizes: Vec<usize>,
    #[serde(with = "crate::matrix::serde_complex_vec")]
    pub block_eigs: Vec<Complex64>,
    pub blocks: Vec<CanonicalBlock>,
    /// `||T^{-1} A T - J||_2`
    pub similarity_residual: f64,
    /// `||T^H B T - b_tilde||_2`
    pub congruence_residual: f64,
    pub cond_t: f64,
}

impl CanonicalPairForm {
    fn from_blocks(t: ComplexMatrix, blocks: Vec<CanonicalBlock>) -> Self {
        let j = direct_sum(&blocks.iter().map(CanonicalBlock::jordan).collect::<Vec<_>>());
        let b_tilde = direct_sum(&blocks.iter().map(CanonicalBlock::form).collect::<Vec<_>>());
        CanonicalPairForm {
            cond_t: linalg::cond(&t),
            t,
            j,
            b_tilde,
            eta: blocks.iter().filter_map(|b| b.eta).collect(),
            block_sizes: blocks.iter().map(CanonicalBlock::width).collect(),
            block_eigs: blocks.iter().map(|b| b.eigenvalue).collect(),
            blocks,
            similarity_residual: f64::NAN,
            congruence_residual: f64::NAN,
        }
    }
}

/// Nullities `d_0 = 0, d_1, ..., d_m` of the powers of a nilpotent `m x m`
/// matrix, checked for the monotonicity a Jordan structure requires.
fn nullities(nil: &ComplexMatrix, scale: f64, cfg: &ToleranceConfig) -> Result<Vec<usize>> {
    let m = nil.nrows();
    let growth = 1.0 + linalg::norm2(nil);
    let mut d = vec![0usize];
    let mut power = ComplexMatrix::identity(m, m);
    for k in 1..=m {
        power = nil * &power;
        let tau = cfg.rank_tol * scale * growth.powi(k as i32 - 1);
        let dk = linalg::singular_values(&power).iter().filter(|&&s| s <= tau).count();
        d.push(dk);
        if dk == m {
            break;
        }
    }
    while d.len() <= m {
        d.push(*d.last().unwrap());
    }
    if d[m] != m {
        return Err(Error::IllConditionedStructure(format!(
            "cluster of size {m} is not numerically nilpotent (nullities {d:?})"
        )));
    }
    let b: Vec<usize> = (1..=m).map(|k| d[k].saturating_sub(d[k - 1])).collect();
    let monotone = d.windows(2).all(|w| w[0] <= w[1]) && b.windows(2).all(|w| w[0] >= w[1]);
    if !monotone {
        return Err(Error::IllConditionedStructure(format!("nullities {d:?} are not a Jordan staircase")));
    }
    Ok(d)
}

/// Jordan block sizes (descending) from nullities.
fn block_sizes_from(d: &[usize]) -> Vec<usize> {
    let m = d.len() - 1;
    let at_least = |k: usize| if k > m { 0 } else { d[k] - d[k - 1] };
    let mut sizes = Vec::new();
    for p in (1..=m).rev() {
        for _ in 0..at_least(p) - at_least(p + 1) {
            sizes.push(p);
        }
    }
    sizes
}

/// Orthonormal basis of the first `r` left singular directions.
fn leading_left(a: &ComplexMatrix, r: usize) -> (ComplexMatrix, Vec<f64>) {
    if r == 0 || a.ncols() == 0 {
        return (ComplexMatrix::zeros(a.nrows(), 0), Vec::new());
    }
    let d = linalg::svd(a);
    (d.u.columns(0, r).into_owned(), d.s)
}

/// Jordan chains of a nilpotent matrix, one `m x p` matrix per block with
/// columns `v_1, ..., v_p` satisfying `N v_j = v_{j-1}`.
fn generic_chains(nil: &ComplexMatrix, d: &[usize], sizes: &[usize], sep_tol: f64) -> Result<Vec<ComplexMatrix>> {
    let m = nil.nrows();
    let max = sizes.first().copied().unwrap_or(0);
    let kernel = |k: usize| -> ComplexMatrix {
        if k == 0 {
            return ComplexMatrix::zeros(m, 0);
        }
        let mut power = ComplexMatrix::identity(m, m);
        for _ in 0..k {
            power = nil * &power;
        }
        linalg::smallest_right_vectors(&power, d[k]).0
    };
    // tops[i] is the generator x of chain i; chain vectors are N^j x.
    let mut tops: Vec<(usize, ComplexMatrix)> = Vec::new();
    for p in (1..=max).rev() {
        let count = sizes.iter().filter(|&&s| s == p).count();
        if count == 0 {
            continue;
        }
        let mut parts = vec![kernel(p - 1)];
        for (q, x) in &tops {
            let mut v = x.clone();
            for _ in 0..q - p {
                v = nil * v;
            }
            parts.push(v);
        }
        let refs: Vec<&ComplexMatrix> = parts.iter().collect();
        let y = hstack(&refs);
        let y_rank = y.ncols();
        let (yo, _) = leading_left(&y, y_rank);
        let kp = kernel(p);
        let proj = &kp - &yo * (yo.adjoint() * &kp);
        let (new_tops, s) = leading_left(&proj, count);
        if s.len() < count || s[count - 1] <= sep_tol {
            return Err(Error::IllConditionedStructure(format!(
                "could not separate {count} chain(s) of length {p}"
            )));
        }
        for c in 0..count {
            tops.push((p, new_tops.columns(c, 1).into_owned()));
        }
    }
    Ok(tops
        .into_iter()
        .map(|(p, x)| {
            let mut cols = vec![ComplexMatrix::zeros(m, 1); p];
            let mut v = x;
            for j in (0..p).rev() {
                cols[j] = v.clone();
                v = nil * v;
            }
            hstack(&cols.iter().collect::<Vec<_>>())
        })
        .collect())
}

/// Truncated power series helpers, coefficients in ascending degree.
fn series_inverse(d: &[f64]) -> Vec<f64> {
    let p = d.len();
    let mut inv = vec![0.0; p];
    inv[0] = 1.0 / d[0];
    for k in 1..p {
        let s: f64 = (1..=k).map(|j| d[j] * inv[k - j]).sum();
        inv[k] = -s / d[0];
    }
    inv
}

fn series_sqrt(s: &[f64]) -> Vec<f64> {
    let p = s.len();
    let mut f = vec![0.0; p];
    f[0] = s[0].sqrt();
    for k in 1..p {
        let cross: f64 = (1..k).map(|j| f[j] * f[k - j]).sum();
        f[k] = (s[k] - cross) / (2.0 * f[0]);
    }
    f
}

/// `H`-orthogonal Jordan chains for a nilpotent `N` that is selfadjoint with
/// respect to the Hermitian `H`, normalized so each chain's Gram matrix is
/// `eta R_p`.
fn selfadjoint_chains(
    nil: &ComplexMatrix,
    h: &ComplexMatrix,
    sizes: &[usize],
    b_norm: f64,
    cfg: &ToleranceConfig,
) -> Result<Vec<(ComplexMatrix, i8)>> {
    let m = nil.nrows();
    let mut z = ComplexMatrix::identity(m, m);
    let mut out = Vec::new();
    for &p in sizes {
        let nz = z.adjoint() * nil * &z;
        let hz = z.adjoint() * h * &z;
        let mut pw = ComplexMatrix::identity(nz.nrows(), nz.nrows());
        for _ in 0..p - 1 {
            pw = &nz * pw;
        }
        let mz = &hz * &pw;
        let mz = (&mz + mz.adjoint()) * c64(0.5, 0.0);
        let (vals, vecs) = linalg::hermitian_eigen(&mz)?;
        let pick = if vals[0].abs() >= vals[vals.len() - 1].abs() { 0 } else { vals.len() - 1 };
        let gamma = vals[pick];
        if gamma.abs() <= cfg.rank_tol * b_norm.max(1.0) {
            return Err(Error::Structure(format!(
                "B-degenerate chain pairing for a block of size {p} (pivot {gamma:.3e})"
            )));
        }
        let x = &z * vecs.columns(pick, 1);
        let eta: i8 = if gamma > 0.0 { 1 } else { -1 };

        // c_k = x^H H N^k x for k < p; rescale x so that the chain Gram
        // matrix becomes eta R_p.
        let mut c = vec![0.0; p];
        let mut v = x.clone();
        for ck in c.iter_mut() {
            *ck = (x.adjoint() * h * &v)[(0, 0)].re;
            v = nil * v;
        }
        let d: Vec<f64> = (0..p).map(|i| c[p - 1 - i]).collect();
        let target: Vec<f64> = series_inverse(&d).iter().map(|&t| t * eta as f64).collect();
        let f = series_sqrt(&target);
        let mut xp = ComplexMatrix::zeros(m, 1);
        let mut v = x;
        for fk in &f {
            xp += &v * c64(*fk, 0.0);
            v = nil * v;
        }
        let mut cols = vec![ComplexMatrix::zeros(m, 1); p];
        let mut v = xp;
        for j in (0..p).rev() {
            cols[j] = v.clone();
            v = nil * v;
        }
        let chain = hstack(&cols.iter().collect::<Vec<_>>());

        // Restrict to the H-orthogonal complement of the chain.
        let constraint = chain.adjoint() * h * &z;
        let keep = z.ncols() - p;
        let (null, _) = linalg::smallest_right_vectors(&constraint, keep);
        z = &z * null;
        out.push((chain, eta));
    }
    Ok(out)
}

struct Cluster {
    mu: Complex64,
    size: usize,
}

fn clusters_of(a: &ComplexMatrix, radius_tol: f64) -> Result<(Vec<Cluster>, f64)> {
    let eigs = linalg::eigenvalues(a)?;
    let scale = 1.0 + linalg::norm2(a);
    let radius = radius_tol * scale;
    let clusters = cluster_eigenvalues(&eigs, radius)
        .into_iter()
        .map(|idx| Cluster {
            mu: cluster_mean(&eigs, &idx),
            size: idx.len(),
        })
        .collect();
    Ok((clusters, radius))
}

/// Orthonormal basis of the generalized eigenspace of `A` at `mu`, of known
/// dimension `m`.
fn generalized_eigenspace(a: &ComplexMatrix, mu: Complex64, m: usize) -> ComplexMatrix {
    let n = a.nrows();
    let shifted = a - ComplexMatrix::identity(n, n) * mu;
    let mut power = shifted.clone();
    for _ in 1..m {
        power = &shifted * power;
    }
    linalg::smallest_right_vectors(&power, m).0
}

/// Clustering radii tried by [`canonical_pair_form`], as multiples of
/// `cluster_tol`.
const RADIUS_STEPS: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Canonical pair form of `(A, B)` for `A` in `J(B)`, `B` Hermitian.
///
/// Blocks are ordered by eigenvalue (real ascending, then nonreal pairs by
/// ascending real part), then by size descending, then by sign.
///
/// Eigenvalues of a perturbed Jordan block of size `p` spread like
/// `delta^{1/p}`, which can exceed `cluster_tol`. When the structure found at
/// one clustering radius is inconsistent, the radius grows tenfold (up to
/// 1000x); any accepted form still passes the residual checks at
/// `cluster_tol`.
pub fn canonical_pair_form(a: &ComplexMatrix, p: &IndefiniteProduct, cfg: &ToleranceConfig) -> Result<CanonicalPairForm> {
    if p.kind() != FormKind::Hermitian {
        return Err(Error::Precondition("canonical pair form needs a Hermitian B".into()));
    }
    require_member(a, p, StructureClass::J, cfg)?;
    let mut last = None;
    for step in RADIUS_STEPS {
        match canonical_at_radius(a, p, cfg, cfg.cluster_tol * step) {
            Ok(form) => return Ok(form),
            Err(e @ (Error::IllConditionedStructure(_) | Error::Structure(_) | Error::Singular { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one radius was tried"))
}

fn canonical_at_radius(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    cfg: &ToleranceConfig,
    radius_tol: f64,
) -> Result<CanonicalPairForm> {
    let b = p.matrix();
    let n = a.nrows();
    let scale = 1.0 + linalg::norm2(a);
    let (clusters, radius) = clusters_of(a, radius_tol)?;

    let mut real: Vec<(f64, Vec<(ComplexMatrix, i8)>)> = Vec::new();
    let mut pairs: Vec<(Complex64, Vec<(ComplexMatrix, ComplexMatrix)>)> = Vec::new();
    let mut used = vec![false; clusters.len()];

    for (ci, cl) in clusters.iter().enumerate() {
        if used[ci] {
            continue;
        }
        used[ci] = true;
        if cl.mu.im.abs() <= radius {
            let mu = c64(cl.mu.re, 0.0);
            let w = generalized_eigenspace(a, mu, cl.size);
            let nil = w.adjoint() * a * &w - ComplexMatrix::identity(cl.size, cl.size) * mu;
            let d = nullities(&nil, scale, cfg)?;
            let sizes = block_sizes_from(&d);
            let h = w.adjoint() * b * &w;
            let h = (&h + h.adjoint()) * c64(0.5, 0.0);
            let chains = selfadjoint_chains(&nil, &h, &sizes, p.norm(), cfg)?;
            real.push((mu.re, chains.into_iter().map(|(c, e)| (&w * c, e)).collect()));
            continue;
        }
        // Nonreal: pair with the conjugate cluster.
        let partner = clusters.iter().enumerate().position(|(cj, other)| {
            !used[cj] && other.size == cl.size && (other.mu - cl.mu.conj()).norm() <= 2.0 * radius
        });
        let Some(cj) = partner else {
            return Err(Error::IllConditionedStructure(format!(
                "nonreal eigenvalue cluster at {} has no conjugate partner",
                cl.mu
            )));
        };
        used[cj] = true;
        // Representative in the upper half-plane, averaged with its partner.
        let mean = (cl.mu + clusters[cj].mu.conj()) * 0.5;
        let mu = if mean.im > 0.0 { mean } else { mean.conj() };
        let w1 = generalized_eigenspace(a, mu, cl.size);
        let w2 = generalized_eigenspace(a, mu.conj(), cl.size);
        let nil = w1.adjoint() * a * &w1 - ComplexMatrix::identity(cl.size, cl.size) * mu;
        let d = nullities(&nil, scale, cfg)?;
        let sizes = block_sizes_from(&d);
        let chains = generic_chains(&nil, &d, &sizes, cfg.cluster_tol)?;
        let u_blocks: Vec<ComplexMatrix> = chains.iter().map(|c| &w1 * c).collect();
        let u_all = hstack(&u_blocks.iter().collect::<Vec<_>>());
        let pairing = u_all.adjoint() * b * &w2;
        let r_hat = direct_sum(&sizes.iter().map(|&s| reverse_identity(s)).collect::<Vec<_>>());
        let v_all = &w2 * linalg::solve(&pairing, &r_hat, cfg).map_err(|_| {
            Error::Structure(format!("generalized eigenspaces at {mu} and its conjugate are not B-dual"))
        })?;
        let mut col = 0;
        let mut chain_pairs = Vec::new();
        for (u, &s) in u_blocks.into_iter().zip(&sizes) {
            chain_pairs.push((u, v_all.columns(col, s).into_owned()));
            col += s;
        }
        pairs.push((mu, chain_pairs));
    }

    real.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let mut blocks = Vec::new();
    let mut columns = Vec::new();
    for (mu, mut chains) in real {
        chains.sort_by(|x, y| y.0.ncols().cmp(&x.0.ncols()).then(x.1.cmp(&y.1)));
        for (c, eta) in chains {
            blocks.push(CanonicalBlock {
                size: c.ncols(),
                eigenvalue: c64(mu, 0.0),
                eta: Some(eta),
            });
            columns.push(c);
        }
    }
    for (mu, chains) in pairs {
        for (u, v) in chains {
            blocks.push(CanonicalBlock {
                size: u.ncols(),
                eigenvalue: mu,
                eta: None,
            });
            columns.push(u);
            columns.push(v);
        }
    }
    let t = hstack(&columns.iter().collect::<Vec<_>>());
    if t.ncols() != n {
        return Err(Error::IllConditionedStructure(format!("recovered {} of {n} columns", t.ncols())));
    }
    let mut form = CanonicalPairForm::from_blocks(t, blocks);
    verify(a, p, &mut form, cfg)?;
    Ok(form)
}

fn verify(a: &ComplexMatrix, p: &IndefiniteProduct, form: &mut CanonicalPairForm, cfg: &ToleranceConfig) -> Result<()> {
    let t_inv = linalg::inverse(&form.t, cfg)
        .map_err(|_| Error::IllConditionedStructure("transform T is numerically singular".into()))?;
    let scale = 1.0 + linalg::norm2(a);
    form.similarity_residual = linalg::norm2(&(&t_inv * a * &form.t - &form.j));
    form.congruence_residual = linalg::norm2(&(form.t.adjoint() * p.matrix() * &form.t - &form.b_tilde));
    let sim_bound = cfg.cluster_tol * scale * form.cond_t;
    let cong_bound = cfg.cluster_tol * p.norm() * form.cond_t * form.cond_t;
    if !(form.similarity_residual <= sim_bound) {
        return Err(Error::IllConditionedStructure(format!(
            "similarity residual {:.3e} exceeds {sim_bound:.3e}",
            form.similarity_residual
        )));
    }
    if !(form.congruence_residual <= cong_bound) {
        return Err(Error::Structure(format!(
            "congruence residual {:.3e} exceeds {cong_bound:.3e}",
            form.congruence_residual
        )));
    }
    Ok(())
}

/// Certificates of [`commuting_one_regular`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutingElement {
    #[serde(with = "crate::matrix::serde_matrix")]
    pub c: ComplexMatrix,
    pub res_j: f64,
    /// `||A C - C A||_2`
    pub commutator: f64,
    pub commutator_bound: f64,
    pub one_regular: bool,
}

/// A 1-regular `C` in `J(B)` commuting with `A`, built as `T C~ T^{-1}` where
/// `C~` repeats the block structure of the canonical form with eigenvalues
/// `1, 2, 3, ...` on real blocks and `k + i` on nonreal pairs.
pub fn commuting_one_regular(a: &ComplexMatrix, p: &IndefiniteProduct, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    Ok(commuting_one_regular_certified(a, p, cfg)?.c)
}

pub fn commuting_one_regular_certified(
    a: &ComplexMatrix,
    p: &IndefiniteProduct,
    cfg: &ToleranceConfig,
) -> Result<CommutingElement> {
    let form = canonical_pair_form(a, p, cfg)?;
    let mut real_k = 0.0;
    let mut pair_k = 0.0;
    let parts: Vec<ComplexMatrix> = form
        .blocks
        .iter()
        .map(|blk| {
            if blk.is_pair() {
                pair_k += 1.0;
                let z = c64(pair_k, 1.0);
                direct_sum(&[jordan_block(blk.size, z), jordan_block(blk.size, z.conj())])
            } else {
                real_k += 1.0;
                jordan_block(blk.size, c64(real_k, 0.0))
            }
        })
        .collect();
    let c_tilde = direct_sum(&parts);
    let c = linalg::solve(&form.t.transpose(), &(&form.t * c_tilde).transpose(), cfg)?.transpose();
    let c_star = p.adjoint(&c)?;
    let c = (&c + c_star) * c64(0.5, 0.0);

    let res_j = classes::res_j(&c, p)?;
    let commutator = linalg::norm2(&(a * &c - &c * a));
    let c_norm = linalg::norm2(&c);
    let commutator_bound = cfg.eq_tol * form.cond_t * (1.0 + linalg::norm2(a)) * (1.0 + c_norm);
    let one_regular = spectral::is_one_regular(&c, cfg)?;
    let cert = CommutingElement {
        res_j,
        commutator,
        commutator_bound,
        one_regular,
        c,
    };
    let res_bound = classes::class_threshold(StructureClass::J, c_norm, p, cfg);
    if res_j > res_bound || commutator > commutator_bound || !one_regular {
        return Err(Error::Structure(format!(
            "commuting element failed certification: res_J {res_j:.3e} (bound {res_bound:.3e}), \
             commutator {commutator:.3e} (bound {commutator_bound:.3e}), one_regular {one_regular}"
        )));
    }
    Ok(cert)
}
