//! Exact arithmetic: Gaussian-rational scalars, sparse polynomials, dual
//! numbers and polynomial matrices.

mod dual;
pub mod linalg;
mod matrix;
mod parse;
mod poly;
mod scalar;

pub use dual::{Dual, DualPoly};
pub use linalg::ScalarMatrix;
pub use matrix::MatrixPoly;
pub use parse::parse_poly;
pub use poly::{Monomial, Poly, PolyDisplay};
pub use scalar::{Field, Scalar};

/// Default ceiling on monomial degree for evaluation-based identity checks.
pub const DEFAULT_DEGREE_BOUND: u32 = 6;
