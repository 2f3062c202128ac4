//! Exact symbolic toolkit for derivative endomorphisms of trivial vector
//! bundles, Lie algebroids, their actions and representations, and
//! semi-linear and pseudo-linear operators. All arithmetic is over Q or
//! Q(i); every check either passes or returns a concrete polynomial witness.
//!
//! ```
//! use derivo::bundle::{DerivativeOp, TrivialBundle};
//! use derivo::geometry::{Chart, VectorField};
//! use derivo::ring::{Field, MatrixPoly};
//!
//! let chart = Chart::standard("x", 1, Field::Rational);
//! let e = TrivialBundle::new(&chart, 1).unwrap();
//! let d = DerivativeOp::new(&e, VectorField::coordinate(&chart, 0), MatrixPoly::zeros(1, 1, 1)).unwrap();
//! let x = DerivativeOp::new(&e, VectorField::zero(&chart), MatrixPoly::diagonal(1, &chart.var(0))).unwrap();
//! // [d/dx, x] = 1
//! let one = DerivativeOp::new(&e, VectorField::zero(&chart), MatrixPoly::identity(1, 1)).unwrap();
//! assert_eq!(d.commutator(&x).unwrap(), one);
//! ```

#![allow(clippy::needless_range_loop)]

pub mod actions;
pub mod algebroid;
pub mod bundle;
pub mod descriptor;
pub mod error;
pub mod geometry;
pub mod global;
pub mod pseudolinear;
pub mod random;
pub mod report;
pub mod representations;
pub mod ring;

pub use error::{Error, Result};
