//! Seeded fixtures shared by the benchmarks.

use derivo::bundle::{DerivativeOp, TrivialBundle};
use derivo::geometry::Chart;
use derivo::random::{self, PolyShape};
use derivo::ring::{Field, Poly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The rank-`k` trivial bundle over `n` coordinates.
pub fn bundle(n: usize, k: usize) -> TrivialBundle {
    TrivialBundle::new(&Chart::standard("x", n, Field::Rational), k).expect("positive rank")
}

/// A pair of random derivative endomorphisms of fixed size.
pub fn op_pair(n: usize, k: usize, degree: u32, seed: u64) -> (DerivativeOp, DerivativeOp) {
    let e = bundle(n, k);
    let mut r = rng(seed);
    let shape = PolyShape::new(degree, 4);
    (random::derivative_op(&mut r, &e, shape), random::derivative_op(&mut r, &e, shape))
}

pub fn poly_pair(n: usize, degree: u32, seed: u64) -> (Poly, Poly) {
    let c = Chart::standard("x", n, Field::Rational);
    let mut r = rng(seed);
    let shape = PolyShape::new(degree, 6);
    (random::poly(&mut r, &c, shape), random::poly(&mut r, &c, shape))
}
