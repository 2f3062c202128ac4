//! Sparse multivariate polynomials with exact Gaussian-rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::{fmt_rational, forward_owned, Field, Scalar};
use num_traits::{Signed, Zero};

/// Exponent vector, ordered graded-lexicographically: total degree first,
/// then lexicographically with `x1 > x2 > ...`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars].into_boxed_slice())
    }

    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial::new(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in a fixed number of variables. Zero coefficients are never
/// stored, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Scalar::one())
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        Poly::term(Monomial::one(nvars), c)
    }

    pub fn int(nvars: usize, n: i64) -> Self {
        Poly::constant(nvars, Scalar::from_int(n))
    }

    /// The coordinate function `x_i` (zero-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        Poly::term(Monomial::var(nvars, i), Scalar::one())
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut p = Poly::zero(nvars);
        for (m, c) in it {
            assert_eq!(m.0.len(), nvars);
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(old) => {
                let s = &*old + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn field(&self) -> Field {
        if self.terms.values().all(Scalar::is_real) {
            Field::Rational
        } else {
            Field::Gaussian
        }
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        assert!(i < self.nvars, "variable index {i} out of range");
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.to_vec();
            exps[i] -= 1;
            out.add_term(Monomial::new(exps), c * &Scalar::from_int(e as i64));
        }
        out
    }

    /// Evaluates at a point.
    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        assert_eq!(point.len(), self.nvars);
        self.terms.iter().fold(Scalar::zero(), |acc, (m, c)| {
            let v = m.0.iter().zip(point).fold(c.clone(), |v, (&e, x)| if e == 0 { v } else { &v * &x.pow(e) });
            &acc + &v
        })
    }

    /// Evaluates in any commutative ring containing the coefficients, given
    /// images of the variables and of the constants.
    pub fn eval_in<R>(&self, args: &[R], lift: impl Fn(&Scalar) -> R) -> R
    where
        R: Clone + Add<Output = R> + Mul<Output = R>,
    {
        assert_eq!(args.len(), self.nvars);
        let mut acc = lift(&Scalar::zero());
        // powers are cached per variable since monomials share them heavily
        let mut powers: Vec<Vec<R>> = args.iter().map(|a| vec![a.clone()]).collect();
        for (m, c) in &self.terms {
            let mut t = lift(c);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() < e as usize {
                    let next = powers[i].last().unwrap().clone() * args[i].clone();
                    powers[i].push(next);
                }
                t = t * powers[i][e as usize - 1].clone();
            }
            acc = acc + t;
        }
        acc
    }

    /// Substitutes `x_i -> args[i]`; the result lives in the variables of
    /// `args`.
    pub fn substitute(&self, args: &[Poly]) -> Poly {
        assert_eq!(args.len(), self.nvars, "substitution arity mismatch");
        let target = args.first().map_or(0, Poly::nvars);
        assert!(args.iter().all(|a| a.nvars == target));
        self.eval_in(args, |c| Poly::constant(target, c.clone()))
    }

    /// Re-expresses the polynomial in `nvars` variables, sending variable
    /// `i` to variable `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars);
        let mut out = Poly::zero(nvars);
        for (m, c) in &self.terms {
            let mut exps = vec![0; nvars];
            for (i, &e) in m.0.iter().enumerate() {
                exps[map[i]] += e;
            }
            out.add_term(Monomial::new(exps), c.clone());
        }
        out
    }

    /// Appends `extra` fresh variables after the existing ones.
    pub fn extend(&self, extra: usize) -> Poly {
        let map: Vec<usize> = (0..self.nvars).collect();
        self.embed(self.nvars + extra, &map)
    }

    /// True when no variable outside `allowed` occurs.
    pub fn depends_only_on(&self, allowed: impl Fn(usize) -> bool) -> bool {
        self.terms.keys().all(|m| m.0.iter().enumerate().all(|(i, &e)| e == 0 || allowed(i)))
    }

    /// Drops trailing variables, which must not occur.
    pub fn truncate_vars(&self, nvars: usize) -> Option<Poly> {
        if !self.depends_only_on(|i| i < nvars) {
            return None;
        }
        Some(Poly {
            nvars,
            terms: self.terms.iter().map(|(m, c)| (Monomial::new(m.0[..nvars].to_vec()), c.clone())).collect(),
        })
    }

    /// All monomials (coefficient one) of total degree at most `deg`.
    pub fn monomials_up_to(nvars: usize, deg: u32) -> Vec<Poly> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; nvars];
        fn rec(i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Poly>) {
            if i == exps.len() {
                out.push(Poly::term(Monomial::new(exps.clone()), Scalar::one()));
                return;
            }
            for e in 0..=left {
                exps[i] = e;
                rec(i + 1, left - e, exps, out);
            }
            exps[i] = 0;
        }
        rec(0, deg, &mut exps, &mut out);
        out.sort_by(|a, b| a.terms.keys().cmp(b.terms.keys()));
        out
    }

    /// Canonical text using the given variable names.
    pub fn display<'a, S: AsRef<str>>(&'a self, names: &'a [S]) -> PolyDisplay<'a, S> {
        assert_eq!(names.len(), self.nvars);
        PolyDisplay { poly: self, names }
    }

    pub fn to_text<S: AsRef<str>>(&self, names: &[S]) -> String {
        self.display(names).to_string()
    }
}

pub struct PolyDisplay<'a, S> {
    poly: &'a Poly,
    names: &'a [S],
}

impl<S: AsRef<str>> fmt::Display for PolyDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.poly.terms.iter().rev() {
            for (part, imag) in [(c.re(), false), (c.im(), true)] {
                if part.is_zero() {
                    continue;
                }
                match (first, part.is_negative()) {
                    (true, true) => f.write_str("-")?,
                    (true, false) => {}
                    (false, true) => f.write_str(" - ")?,
                    (false, false) => f.write_str(" + ")?,
                }
                first = false;
                fmt_rational(&part.abs(), f)?;
                if imag {
                    f.write_str("*i")?;
                }
                for (name, &e) in self.names.iter().zip(m.exps()) {
                    match e {
                        0 => {}
                        1 => write!(f, "*{}", name.as_ref())?,
                        _ => write!(f, "*{}^{}", name.as_ref(), e)?,
                    }
                }
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomials over different charts");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomials over different charts");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "polynomials over different charts");
        let mut out = Poly::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

forward_owned!(Add, add, Poly);
forward_owned!(Sub, sub, Poly);
forward_owned!(Mul, mul, Poly);

impl std::iter::Sum for Poly {
    /// Panics on an empty iterator, since the variable count is unknown.
    fn sum<I: Iterator<Item = Poly>>(mut iter: I) -> Poly {
        let first = iter.next().expect("sum of an empty polynomial iterator");
        iter.fold(first, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    #[test]
    fn power_rule_partial() {
        // d/dx1 (x1^2 x2) = 2 x1 x2
        let f = &(&x(0) * &x(0)) * &x(1);
        let expected = (&x(0) * &x(1)).scale(&Scalar::from_int(2));
        assert_eq!(f.partial(0), expected);
        assert!(Poly::int(2, 7).partial(0).is_zero());
        assert_eq!((x(0) + x(1)).partial(1), Poly::one(2));
    }

    #[test]
    fn canonical_display_is_graded_lex_descending() {
        let f = x(1) - x(0) * x(0) * x(1).scale(&Scalar::ratio(-3, 2)) + Poly::int(2, 4);
        assert_eq!(f.to_text(&["x1", "x2"]), "3/2*x1^2*x2 + 1*x2 + 4");
        let g = x(0).scale(&Scalar::gaussian(Scalar::from_int(1), Scalar::from_int(-2)));
        assert_eq!(g.to_text(&["x1", "x2"]), "1*x1 - 2*i*x1");
        assert_eq!(Poly::zero(2).to_text(&["x1", "x2"]), "0");
    }

    #[test]
    fn substitution_and_eval_agree() {
        let f = x(0) * x(1) + x(0).pow(3);
        let swapped = f.substitute(&[x(1), x(0)]);
        assert_eq!(swapped, x(0) * x(1) + x(1).pow(3));
        let pt = [Scalar::from_int(2), Scalar::ratio(1, 3)];
        assert_eq!(f.eval(&pt), Scalar::ratio(2, 3) + Scalar::from_int(8));
    }

    #[test]
    fn monomial_enumeration_counts() {
        // C(2 + 3, 3) monomials of degree <= 3 in two variables
        assert_eq!(Poly::monomials_up_to(2, 3).len(), 10);
        assert_eq!(Poly::monomials_up_to(0, 6).len(), 1);
    }

    #[test]
    fn embedding_and_truncation() {
        let f = x(0) * x(1);
        let g = f.extend(2);
        assert_eq!(g.nvars(), 4);
        assert_eq!(g.truncate_vars(2).unwrap(), f);
        let h = Poly::var(3, 2);
        assert!(h.truncate_vars(2).is_none());
    }
}
