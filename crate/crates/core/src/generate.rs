//! Test pairs `(A, B)` with known structure: Jordan blocks with reverse
//! identities, their Cayley images, commuting normal blocks, and random
//! congruence scrambling.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::cayley::{cayley_to_unitary, CayleyParams};
use crate::classes::transport;
use crate::error::{Error, Result};
use crate::matrix::{c64, direct_sum, jordan_block, reverse_identity, ComplexMatrix, I};
use crate::product::IndefiniteProduct;
use crate::rng::random_complex;
use crate::tolerance::ToleranceConfig;

/// A matrix together with the form it is structured for.
#[derive(Debug, Clone)]
pub struct Pair {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

impl Pair {
    pub fn product(&self, cfg: &ToleranceConfig) -> Result<IndefiniteProduct> {
        IndefiniteProduct::new(self.b.clone(), cfg)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Dimension("generator size must be at least 1".into()));
    }
    Ok(())
}

/// `(J_n(lambda), sign * R_n)`; `J_n(lambda)` is `R_n`-selfadjoint for real `lambda`.
pub fn jordan_pair(n: usize, lambda: f64, sign: f64) -> Result<Pair> {
    check_n(n)?;
    Ok(Pair {
        a: jordan_block(n, c64(lambda, 0.0)),
        b: reverse_identity(n) * c64(sign, 0.0),
    })
}

/// Random unitary matrix from the QR factorization of a complex Gaussian-like
/// matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let m = random_complex(rng, n, n) + ComplexMatrix::identity(n, n) * c64(1e-3, 0.0);
    m.qr().q()
}

/// `U diag(s) V` with random unitaries and singular values log-spaced from
/// `1` to a condition number drawn log-uniformly from `[1, cond_max]`.
pub fn random_well_conditioned<R: Rng>(rng: &mut R, n: usize, cond_max: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let kappa = cond_max.max(1.0).powf(rng.gen_range(0.0..=1.0));
    let s: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            c64(kappa.powf(t), 0.0)
        })
        .collect();
    u * crate::matrix::diag(&s) * v
}

/// `(T^{-1} A T, T^H B T)` for a random `T` with `cond(T) <= cond_max`.
/// Class membership is preserved.
pub fn random_congruence<R: Rng>(rng: &mut R, pair: &Pair, cond_max: f64, cfg: &ToleranceConfig) -> Result<Pair> {
    let n = pair.a.nrows();
    let t = random_well_conditioned(rng, n, cond_max);
    let p = pair.product(cfg)?;
    let (a, q) = transport(&pair.a, &p, &t, cfg)?;
    Ok(Pair { a, b: q.matrix().clone() })
}

/// Cayley image of `(J_n(lambda), sign * R_n)` with `w = i`, `alpha = 1`:
/// a non-diagonalizable `B`-unitary matrix for `n >= 2`.
pub fn unitary_example(n: usize, lambda: f64, sign: f64, cfg: &ToleranceConfig) -> Result<Pair> {
    let base = jordan_pair(n, lambda, sign)?;
    let p = base.product(cfg)?;
    let u = cayley_to_unitary(&base.a, &p, &CayleyParams::default(), cfg)?;
    Ok(Pair { a: u, b: base.b })
}

/// One block `J_p(a) - i (b I + c N_p)` of a normal example, with form
/// `sign * R_p`. The two parts commute and are both `R_p`-selfadjoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalBlock {
    pub size: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sign: f64,
}

/// `B`-normal `S - i K_H` built from commuting selfadjoint blocks. Blocks of
/// size at least two make it non-diagonalizable.
pub fn normal_example(blocks: &[NormalBlock]) -> Result<Pair> {
    if blocks.is_empty() {
        return Err(Error::Dimension("normal example needs at least one block".into()));
    }
    let mut parts = Vec::new();
    let mut forms = Vec::new();
    for blk in blocks {
        check_n(blk.size)?;
        let s = jordan_block(blk.size, c64(blk.a, 0.0));
        let nil = jordan_block(blk.size, c64(0.0, 0.0));
        let k = ComplexMatrix::identity(blk.size, blk.size) * c64(blk.b, 0.0) + nil * c64(blk.c, 0.0);
        parts.push(s - k * I);
        forms.push(reverse_identity(blk.size) * c64(blk.sign, 0.0));
    }
    Ok(Pair {
        a: direct_sum(&parts),
        b: direct_sum(&forms),
    })
}

/// Random normal example of total size `n` with blocks of size at most
/// `max_block` and at least one block of size two or more when `n >= 2`.
///
/// Blocks get distinct integer `a`, so the selfadjoint part has one Jordan
/// block per eigenvalue.
pub fn random_normal_blocks<R: Rng>(rng: &mut R, n: usize, max_block: usize) -> Vec<NormalBlock> {
    let half = n as i32 / 2;
    let mut centers: Vec<i32> = (-half..=half).collect();
    centers.shuffle(rng);
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let cap = left.min(max_block.max(1));
        let lo = if blocks.is_empty() && cap >= 2 { 2 } else { 1 };
        let size = rng.gen_range(lo..=cap);
        blocks.push(NormalBlock {
            size,
            a: centers[blocks.len()] as f64,
            b: rng.gen_range(-2i32..=2) as f64 + 0.5,
            c: if rng.gen_bool(0.5) { rng.gen_range(-1.0..1.0) } else { 0.0 },
            sign: if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
        });
        left -= size;
    }
    blocks
}

/// `(A, -iB)`: the same matrix with a skew-Hermitian form defining the same
/// four classes.
pub fn skew_variant(pair: &Pair) -> Pair {
    Pair {
        a: pair.a.clone(),
        b: &pair.b * c64(0.0, -1.0),
    }
}

/// Block description for a synthesized canonical pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthBlock {
    /// `J_p(lambda)` with form `eta R_p`.
    Real { size: usize, lambda: f64, eta: i8 },
    /// `J_p(z) + J_p(conj z)` with form `R_{2p}`, `Im z > 0`.
    Pair { size: usize, z: Complex64 },
}

/// Canonical `(J, B~)` for the given blocks.
pub fn canonical_pair(blocks: &[SynthBlock]) -> Result<Pair> {
    if blocks.is_empty() {
        return Err(Error::Dimension("canonical pair needs at least one block".into()));
    }
    let mut js = Vec::new();
    let mut bs = Vec::new();
    for blk in blocks {
        match *blk {
            SynthBlock::Real { size, lambda, eta } => {
                check_n(size)?;
                js.push(jordan_block(size, c64(lambda, 0.0)));
                bs.push(reverse_identity(size) * c64(eta as f64, 0.0));
            }
            SynthBlock::Pair { size, z } => {
                check_n(size)?;
                js.push(direct_sum(&[jordan_block(size, z), jordan_block(size, z.conj())]));
                bs.push(reverse_identity(2 * size));
            }
        }
    }
    Ok(Pair {
        a: direct_sum(&js),
        b: direct_sum(&bs),
    })
}

/// Normalized order of synthesized blocks, matching the canonical form's
/// ordering: real eigenvalues ascending (size descending, then sign), then
/// pairs by real part.
pub fn sort_blocks(blocks: &mut [SynthBlock]) {
    fn key(b: &SynthBlock) -> (u8, f64, f64, i64, i8) {
        match *b {
            SynthBlock::Real { size, lambda, eta } => (0, lambda, 0.0, -(size as i64), eta),
            SynthBlock::Pair { size, z } => (1, z.re, z.im, -(size as i64), 0),
        }
    }
    blocks.sort_by(|x, y| {
        let (a, b) = (key(x), key(y));
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.cmp(&b.3))
            .then(a.4.cmp(&b.4))
    });
}

/// Random canonical block list of total size `n` with Jordan blocks of size
/// at most `max_block`. Real eigenvalues are integers in `[-2, 2]`; pairs use
/// `k + i`.
pub fn random_synth_blocks<R: Rng>(rng: &mut R, n: usize, max_block: usize, allow_pairs: bool) -> Vec<SynthBlock> {
    let mut blocks = Vec::new();
    let mut left = n;
    while left > 0 {
        let cap = left.min(max_block.max(1));
        if allow_pairs && left >= 2 && rng.gen_bool(0.25) {
            let size = rng.gen_range(1..=(left / 2).min(cap));
            let z = c64(rng.gen_range(-2i32..=2) as f64, 1.0);
            blocks.push(SynthBlock::Pair { size, z });
            left -= 2 * size;
        } else {
            let size = rng.gen_range(1..=cap);
            blocks.push(SynthBlock::Real {
                size,
                lambda: rng.gen_range(-2i32..=2) as f64,
                eta: if rng.gen_bool(0.5) { 1 } else { -1 },
            });
            left -= size;
        }
    }
    sort_blocks(&mut blocks);
    blocks
}
