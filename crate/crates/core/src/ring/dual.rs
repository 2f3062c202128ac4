use std::ops::{Add, Mul, Neg, Sub};

use super::poly::Poly;
use super::scalar::Scalar;

/// `a0 + eps*a1` with `eps^2 = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dual<T> {
    pub a0: T,
    pub a1: T,
}

pub type DualPoly = Dual<Poly>;

impl<T> Dual<T> {
    pub fn new(a0: T, a1: T) -> Self {
        Dual { a0, a1 }
    }
}

impl DualPoly {
    pub fn constant(p: Poly) -> Self {
        let z = Poly::zero(p.nvars());
        Dual::new(p, z)
    }

    pub fn scalar(nvars: usize, c: &Scalar) -> Self {
        Dual::constant(Poly::constant(nvars, c.clone()))
    }

    /// The infinitesimal `eps` itself.
    pub fn eps(nvars: usize) -> Self {
        Dual::new(Poly::zero(nvars), Poly::one(nvars))
    }

    /// Evaluates a polynomial at dual arguments: the first-order Taylor
    /// expansion computed purely by ring operations.
    pub fn eval(p: &Poly, args: &[DualPoly]) -> DualPoly {
        let nvars = args.first().map_or(0, |a| a.a0.nvars());
        p.eval_in(args, |c| DualPoly::scalar(nvars, c))
    }
}

impl<T> Add for Dual<T>
where
    T: Add<Output = T>,
{
    type Output = Dual<T>;
    fn add(self, rhs: Self) -> Self {
        Dual::new(self.a0 + rhs.a0, self.a1 + rhs.a1)
    }
}

impl<T> Sub for Dual<T>
where
    T: Sub<Output = T>,
{
    type Output = Dual<T>;
    fn sub(self, rhs: Self) -> Self {
        Dual::new(self.a0 - rhs.a0, self.a1 - rhs.a1)
    }
}

impl<T> Mul for Dual<T>
where
    T: Clone + Add<Output = T> + Mul<Output = T>,
{
    type Output = Dual<T>;
    fn mul(self, rhs: Self) -> Self {
        let a1 = self.a0.clone() * rhs.a1 + self.a1 * rhs.a0.clone();
        Dual::new(self.a0 * rhs.a0, a1)
    }
}

impl<T: Neg<Output = T>> Neg for Dual<T> {
    type Output = Dual<T>;
    fn neg(self) -> Self {
        Dual::new(-self.a0, -self.a1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_squares_to_zero() {
        let e = DualPoly::eps(1);
        let sq = e.clone() * e;
        assert!(sq.a0.is_zero() && sq.a1.is_zero());
    }

    #[test]
    fn product_rule_shape() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let a = Dual::new(x.clone(), y.clone());
        let b = Dual::new(y.clone(), x.clone());
        let p = a * b;
        assert_eq!(p.a0, &x * &y);
        assert_eq!(p.a1, &x * &x + &y * &y);
    }

    #[test]
    fn evaluation_gives_directional_derivative() {
        // f(x + eps*h) = f(x) + eps * f'(x) h
        let x = Poly::var(1, 0);
        let f = x.pow(3);
        let h = Poly::int(1, 2);
        let arg = Dual::new(x.clone(), h.clone());
        let r = DualPoly::eval(&f, &[arg]);
        assert_eq!(r.a0, f);
        assert_eq!(r.a1, f.partial(0) * h);
    }
}
