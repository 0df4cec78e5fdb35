//! Dense complex matrices and the JSON file format.
//!
//! [`ComplexMatrix`] is a plain `nalgebra` matrix over `Complex64`; all
//! arithmetic comes from `nalgebra`. The helpers here build the standard test
//! matrices (Jordan blocks, reverse identities) and convert to and from the
//! on-disk representation
//!
//! ```json
//! {"rows": 2, "cols": 2, "data": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]}
//! ```
//!
//! where `data` lists `[re, im]` pairs in row-major order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Builds a matrix from row-major complex entries.
pub fn from_row_major(rows: usize, cols: usize, data: &[Complex64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension("matrix must be nonempty".into()));
    }
    if data.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Dimension("matrix entries must be finite".into()));
    }
    Ok(DMatrix::from_row_slice(rows, cols, data))
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
}

pub fn diag(entries: &[Complex64]) -> ComplexMatrix {
    let n = entries.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { Complex64::default() })
}

pub fn real_diag(entries: &[f64]) -> ComplexMatrix {
    diag(&entries.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>())
}

/// Upper Jordan block `J_n(lambda)`.
pub fn jordan_block(n: usize, lambda: Complex64) -> ComplexMatrix {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            c64(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// Reverse identity `R_n` (ones on the anti-diagonal).
pub fn reverse_identity(n: usize) -> ComplexMatrix {
    DMatrix::from_fn(n, n, |i, j| {
        if i + j + 1 == n {
            c64(1.0, 0.0)
        } else {
            Complex64::default()
        }
    })
}

/// `diag(-I_neg, I_pos)`.
pub fn signature(neg: usize, pos: usize) -> ComplexMatrix {
    let mut d = vec![c64(-1.0, 0.0); neg];
    d.extend(std::iter::repeat_n(c64(1.0, 0.0), pos));
    diag(&d)
}

/// Block diagonal direct sum.
pub fn direct_sum(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn scale(a: &ComplexMatrix, s: Complex64) -> ComplexMatrix {
    a.map(|z| z * s)
}

/// `i * A`.
pub fn times_i(a: &ComplexMatrix) -> ComplexMatrix {
    a.map(|z| c64(-z.im, z.re))
}

/// On-disk representation of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(a: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(a.len());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                let z = a[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson {
            rows: a.nrows(),
            cols: a.ncols(),
            data,
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let entries: Vec<Complex64> = m.data.iter().map(|[re, im]| c64(*re, *im)).collect();
        from_row_major(m.rows, m.cols, &entries)
    }
}

pub fn to_json_string(a: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(a)).expect("matrix serialization cannot fail")
}

pub fn from_json_str(s: &str) -> Result<ComplexMatrix> {
    let m: MatrixJson =
        serde_json::from_str(s).map_err(|e| Error::Dimension(format!("invalid matrix JSON: {e}")))?;
    ComplexMatrix::try_from(m)
}

/// Serde adapter so report structs can hold matrices directly.
pub mod serde_matrix {
    use super::{ComplexMatrix, MatrixJson};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let m = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(m).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for complex scalars as `[re, im]`.
pub mod serde_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

pub mod serde_complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_identity_is_involution() {
        for n in 1..6 {
            let r = reverse_identity(n);
            assert_eq!(&r * &r, ComplexMatrix::identity(n, n));
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let a = from_row_major(
            2,
            2,
            &[c64(0.1, -1e-300), c64(1.0 / 3.0, 2.5), c64(-7.25e17, 0.0), c64(f64::MIN_POSITIVE, -0.0)],
        )
        .unwrap();
        let s = to_json_string(&a);
        assert_eq!(from_json_str(&s).unwrap(), a);
    }

    #[test]
    fn rejects_bad_shapes_and_nonfinite() {
        assert!(from_json_str(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
        assert!(from_row_major(1, 1, &[c64(f64::NAN, 0.0)]).is_err());
        assert!(from_row_major(0, 0, &[]).is_err());
    }

    #[test]
    fn direct_sum_places_blocks() {
        let s = direct_sum(&[jordan_block(2, c64(1.0, 0.0)), real_diag(&[3.0])]);
        assert_eq!(s[(0, 1)], c64(1.0, 0.0));
        assert_eq!(s[(2, 2)], c64(3.0, 0.0));
        assert_eq!(s[(1, 2)], c64(0.0, 0.0));
    }
}
