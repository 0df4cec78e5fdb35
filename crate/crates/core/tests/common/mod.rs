#![allow(dead_code)]

use indefinite::matrix::{c64, reverse_identity, signature};
use indefinite::rng::random_complex;
use indefinite::{ComplexMatrix, IndefiniteProduct, ToleranceConfig};
use num_complex::Complex64;
use rand::Rng;

pub fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

pub fn product(b: ComplexMatrix) -> IndefiniteProduct {
    IndefiniteProduct::new(b, &cfg()).expect("valid form")
}

/// Spectral norm from an independent SVD.
pub fn norm2(a: &ComplexMatrix) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

/// `I`, `R_n` or `diag(-I, I)`.
pub fn unitary_form(kind: usize, n: usize) -> ComplexMatrix {
    match kind % 3 {
        0 => ComplexMatrix::identity(n, n),
        1 => reverse_identity(n),
        _ => signature(n / 2, n - n / 2),
    }
}

/// Random nonsingular Hermitian form with well-separated eigenvalues.
pub fn random_hermitian_form<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let x = random_complex(rng, n, n);
    let q = x.qr().q();
    let d: Vec<f64> = (0..n)
        .map(|_| {
            let m: f64 = rng.gen_range(0.5..2.0);
            if rng.gen_bool(0.5) { m } else { -m }
        })
        .collect();
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|v| c64(*v, 0.0))));
    &q * d * q.adjoint()
}

/// Random nonsingular skew-Hermitian form.
pub fn random_skew_form<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_hermitian_form(rng, n) * c64(0.0, 1.0)
}

/// Random element of `J(B)`: `(X + B^{-1} X^H B) / 2`.
pub fn random_selfadjoint<R: Rng>(rng: &mut R, b: &ComplexMatrix) -> ComplexMatrix {
    let n = b.nrows();
    let x = random_complex(rng, n, n);
    let b_inv = b.clone().try_inverse().expect("nonsingular form");
    (&x + b_inv * x.adjoint() * b) * c64(0.5, 0.0)
}

/// `B^{-1} A^H B`.
pub fn adjoint(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let b_inv = b.clone().try_inverse().expect("nonsingular form");
    b_inv * a.adjoint() * b
}

/// Coefficients `c_0..c_n` of `det(zI - A)` from determinants on a circle,
/// inverted with a discrete Fourier transform.
pub fn char_poly_by_dft(a: &ComplexMatrix) -> Vec<Complex64> {
    let n = a.nrows();
    let m = n + 1;
    let r = 1.0 + norm2(a) / 2.0;
    let vals: Vec<Complex64> = (0..m)
        .map(|j| {
            let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            (ComplexMatrix::identity(n, n) * z - a).determinant()
        })
        .collect();
    (0..m)
        .map(|k| {
            let mut acc = c64(0.0, 0.0);
            for (j, v) in vals.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64);
            }
            acc / (m as f64 * r.powi(k as i32))
        })
        .collect()
}

/// `Res(f, g)` as the determinant of the Sylvester matrix; coefficients in
/// ascending degree.
pub fn resultant(f: &[Complex64], g: &[Complex64]) -> Complex64 {
    let df = f.len() - 1;
    let dg = g.len() - 1;
    let size = df + dg;
    let mut s = ComplexMatrix::zeros(size, size);
    for row in 0..dg {
        for (k, c) in f.iter().rev().enumerate() {
            s[(row, row + k)] = *c;
        }
    }
    for row in 0..df {
        for (k, c) in g.iter().rev().enumerate() {
            s[(dg + row, row + k)] = *c;
        }
    }
    s.determinant()
}

/// `prod_{i != j} (l_i - l_j) = Res(p, p')` for the monic characteristic
/// polynomial `p`.
pub fn discriminant_by_resultant(a: &ComplexMatrix) -> Complex64 {
    let p = char_poly_by_dft(a);
    let dp: Vec<Complex64> = p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
    resultant(&p, &dp)
}
