//! Structured matrices under an indefinite scalar product `[x, y]_B = x^H B y`.
//!
//! Classification into the selfadjoint, skewadjoint, unitary and normal
//! classes, and constructive perturbations that keep a matrix in its class
//! while making it diagonalizable with distinct eigenvalues.

pub mod cayley;
pub mod canonical;
pub mod classes;
pub mod cli;
pub mod densify;
pub mod densify_jl;
pub mod densify_n;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod matrix;
pub mod product;
pub mod rng;
pub mod spectral;
pub mod tolerance;

pub use classes::{classify, StructureClass, StructureReport};
pub use densify::DensifyResult;
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use product::IndefiniteProduct;
pub use tolerance::{SearchConfig, ToleranceConfig};
