//! Seedable generators for test and benchmark inputs. Coefficients are
//! small integers so exact arithmetic stays cheap.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bundle::{DerivativeOp, Section, TrivialBundle};
use crate::geometry::{AffineMap, Chart, VectorField};
use crate::global::{BundleAutomorphism, DualAutomorphismFamily};
use crate::ring::{linalg, MatrixPoly, Monomial, Poly, Scalar, ScalarMatrix};

/// Shape of random polynomials.
#[derive(Clone, Copy, Debug)]
pub struct PolyShape {
    pub max_degree: u32,
    pub max_terms: usize,
    pub coeff_range: i64,
}

impl PolyShape {
    pub fn new(max_degree: u32, max_terms: usize) -> Self {
        PolyShape { max_degree, max_terms, coeff_range: 3 }
    }
}

impl Default for PolyShape {
    fn default() -> Self {
        PolyShape::new(3, 4)
    }
}

fn scalar<R: Rng + ?Sized>(rng: &mut R, range: i64) -> Scalar {
    Scalar::from_int(rng.gen_range(-range..=range))
}

fn nonzero<R: Rng + ?Sized>(rng: &mut R, range: i64) -> Scalar {
    loop {
        let s = scalar(rng, range);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn poly<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, shape: PolyShape) -> Poly {
    let n = chart.dim();
    let terms = rng.gen_range(0..=shape.max_terms);
    Poly::from_terms(
        n,
        (0..terms).map(|_| {
            let deg = rng.gen_range(0..=shape.max_degree);
            let mut exps = vec![0u32; n];
            if n > 0 {
                for _ in 0..deg {
                    exps[rng.gen_range(0..n)] += 1;
                }
            }
            (Monomial::new(exps), nonzero(rng, shape.coeff_range))
        }),
    )
}

/// A polynomial that is not constant, for inputs that must vary.
pub fn nonconstant_poly<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, shape: PolyShape) -> Poly {
    assert!(chart.dim() > 0 && shape.max_degree > 0, "no non-constant polynomials on this chart");
    loop {
        let p = poly(rng, chart, shape);
        if !p.is_constant() {
            return p;
        }
    }
}

pub fn polys<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, len: usize, shape: PolyShape) -> Vec<Poly> {
    (0..len).map(|_| poly(rng, chart, shape)).collect()
}

pub fn vector_field<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, shape: PolyShape) -> VectorField {
    VectorField::new(chart, polys(rng, chart, chart.dim(), shape)).expect("on the chart")
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, k: usize, shape: PolyShape) -> MatrixPoly {
    let entries = polys(rng, chart, k * k, shape);
    MatrixPoly::from_fn(k, k, chart.dim(), |i, j| entries[i * k + j].clone())
}

pub fn section<R: Rng + ?Sized>(rng: &mut R, bundle: &TrivialBundle, shape: PolyShape) -> Section {
    Section::new(bundle, polys(rng, bundle.base(), bundle.rank(), shape)).expect("on the bundle")
}

pub fn derivative_op<R: Rng + ?Sized>(rng: &mut R, bundle: &TrivialBundle, shape: PolyShape) -> DerivativeOp {
    let chart = bundle.base();
    DerivativeOp::new(bundle, vector_field(rng, chart, shape), matrix(rng, chart, bundle.rank(), shape))
        .expect("on the bundle")
}

/// A bundle with base dimension in `1..=max_dim` and rank in
/// `1..=max_rank`, on the standard chart `x1..xn`.
pub fn bundle<R: Rng + ?Sized>(rng: &mut R, max_dim: usize, max_rank: usize) -> TrivialBundle {
    let n = rng.gen_range(1..=max_dim);
    let k = rng.gen_range(1..=max_rank);
    TrivialBundle::new(&Chart::standard("x", n, crate::ring::Field::Rational), k).expect("rank is positive")
}

/// An invertible scalar matrix with small entries.
pub fn invertible_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ScalarMatrix {
    loop {
        let m: ScalarMatrix = (0..n).map(|_| (0..n).map(|_| scalar(rng, 2)).collect()).collect();
        if linalg::invert(&m).is_some() {
            return m;
        }
    }
}

pub fn affine_map<R: Rng + ?Sized>(rng: &mut R, n: usize) -> AffineMap {
    let shift = (0..n).map(|_| scalar(rng, 3)).collect();
    AffineMap::new(invertible_matrix(rng, n), shift).expect("invertible")
}

/// A matrix field with constant nonzero determinant: a product of
/// elementary polynomial shears, a permutation and a constant diagonal.
pub fn unimodular<R: Rng + ?Sized>(rng: &mut R, chart: &Chart, k: usize, shape: PolyShape) -> MatrixPoly {
    let n = chart.dim();
    let mut m = MatrixPoly::identity(k, n);
    if k > 1 {
        for _ in 0..rng.gen_range(1..=3) {
            let a = rng.gen_range(0..k);
            let mut b = rng.gen_range(0..k - 1);
            if b >= a {
                b += 1;
            }
            let mut e = MatrixPoly::identity(k, n);
            e.set(a, b, poly(rng, chart, shape));
            m = &m * &e;
        }
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(rng);
        let p = MatrixPoly::from_fn(k, k, n, |i, j| if perm[i] == j { Poly::one(n) } else { Poly::zero(n) });
        m = &p * &m;
    }
    let diag: Vec<Scalar> = (0..k).map(|_| nonzero(rng, 2)).collect();
    let d =
        MatrixPoly::from_fn(k, k, n, |i, j| if i == j { Poly::constant(n, diag[i].clone()) } else { Poly::zero(n) });
    &d * &m
}

pub fn automorphism<R: Rng + ?Sized>(rng: &mut R, bundle: &TrivialBundle, shape: PolyShape) -> BundleAutomorphism {
    let g = unimodular(rng, bundle.base(), bundle.rank(), shape);
    BundleAutomorphism::new(bundle, affine_map(rng, bundle.base_dim()), g).expect("unimodular by construction")
}

pub fn dual_family<R: Rng + ?Sized>(rng: &mut R, bundle: &TrivialBundle, shape: PolyShape) -> DualAutomorphismFamily {
    let n = bundle.base_dim();
    let a1 = (0..n).map(|_| (0..n).map(|_| scalar(rng, 2)).collect()).collect();
    let b1 = (0..n).map(|_| scalar(rng, 3)).collect();
    DualAutomorphismFamily::new(bundle, a1, b1, matrix(rng, bundle.base(), bundle.rank(), shape)).expect("shapes match")
}
