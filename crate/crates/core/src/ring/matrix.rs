use std::ops::{Add, Mul, Neg, Sub};

use super::poly::Poly;
use super::scalar::{forward_owned, Scalar};
use crate::error::{Error, Result};

/// A dense matrix of polynomials, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixPoly {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl MatrixPoly {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        MatrixPoly { rows, cols, nvars, entries: vec![Poly::zero(nvars); rows * cols] }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::scalar_identity(n, nvars, Scalar::one())
    }

    pub fn scalar_identity(n: usize, nvars: usize, c: Scalar) -> Self {
        let mut m = Self::zeros(n, n, nvars);
        for i in 0..n {
            m.set(i, i, Poly::constant(nvars, c.clone()));
        }
        m
    }

    /// `p * Id`.
    pub fn diagonal(n: usize, p: &Poly) -> Self {
        let mut m = Self::zeros(n, n, p.nvars());
        for i in 0..n {
            m.set(i, i, p.clone());
        }
        m
    }

    /// The elementary matrix `E_ab` with a single one at `(a, b)`.
    pub fn unit(n: usize, nvars: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(n, n, nvars);
        m.set(a, b, Poly::one(nvars));
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>, nvars: usize) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged matrix rows"));
        }
        let entries: Vec<Poly> = rows.into_iter().flatten().collect();
        if entries.iter().any(|p| p.nvars() != nvars) {
            return Err(Error::chart("matrix entries over different charts"));
        }
        Ok(MatrixPoly { rows: r, cols: c, nvars, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, nvars: usize, f: impl Fn(usize, usize) -> Poly) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let p = f(i, j);
                assert_eq!(p.nvars(), nvars);
                entries.push(p);
            }
        }
        MatrixPoly { rows, cols, nvars, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn row_vecs(&self) -> Vec<Vec<Poly>> {
        self.entries.chunks(self.cols.max(1)).map(<[Poly]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let p = self.get(i, j);
                    if i == j {
                        p.is_one()
                    } else {
                        p.is_zero()
                    }
                })
            })
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> MatrixPoly {
        let entries: Vec<Poly> = self.entries.iter().map(f).collect();
        let nvars = entries.first().map_or(self.nvars, Poly::nvars);
        MatrixPoly { rows: self.rows, cols: self.cols, nvars, entries }
    }

    pub fn scale(&self, p: &Poly) -> MatrixPoly {
        self.map(|e| e * p)
    }

    pub fn scale_scalar(&self, c: &Scalar) -> MatrixPoly {
        self.map(|e| e.scale(c))
    }

    pub fn partial(&self, i: usize) -> MatrixPoly {
        self.map(|e| e.partial(i))
    }

    pub fn transpose(&self) -> MatrixPoly {
        MatrixPoly::from_fn(self.cols, self.rows, self.nvars, |i, j| self.get(j, i).clone())
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &MatrixPoly) -> MatrixPoly {
        self * other - other * self
    }

    pub fn apply(&self, v: &[Poly]) -> Vec<Poly> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Poly::zero(self.nvars), |acc, j| acc + self.get(i, j) * &v[j]))
            .collect()
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> MatrixPoly {
        let n = self.rows - 1;
        MatrixPoly::from_fn(n, n, self.nvars, |i, j| {
            let si = if i >= skip_row { i + 1 } else { i };
            let sj = if j >= skip_col { j + 1 } else { j };
            self.get(si, sj).clone()
        })
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Poly {
        assert!(self.is_square(), "determinant of a non-square matrix");
        match self.rows {
            0 => Poly::one(self.nvars),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            n => (0..n).fold(Poly::zero(self.nvars), |acc, j| {
                if self.get(0, j).is_zero() {
                    return acc;
                }
                let t = self.get(0, j) * &self.minor(0, j).det();
                if j % 2 == 0 {
                    acc + t
                } else {
                    acc - t
                }
            }),
        }
    }

    pub fn adjugate(&self) -> MatrixPoly {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return MatrixPoly::identity(1, self.nvars);
        }
        MatrixPoly::from_fn(n, n, self.nvars, |i, j| {
            let c = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                c
            } else {
                -c
            }
        })
    }

    /// Inverse of a matrix whose determinant is a nonzero constant, so that
    /// the inverse is again polynomial.
    pub fn inverse_if_unimodular(&self) -> Result<MatrixPoly> {
        if !self.is_square() {
            return Err(Error::dim("inverse of a non-square matrix"));
        }
        let det = self.det();
        let Some(c) = det.as_constant() else {
            return Err(Error::NonConstantDeterminant(format!("{} terms", det.len())));
        };
        let inv = c.inv().ok_or(Error::ZeroDeterminant)?;
        Ok(self.adjugate().scale_scalar(&inv))
    }

    /// Substitutes polynomials for the variables in every entry.
    pub fn substitute(&self, args: &[Poly]) -> MatrixPoly {
        let nvars = args.first().map_or(0, Poly::nvars);
        let mut m = self.map(|e| e.substitute(args));
        m.nvars = nvars;
        m
    }

    pub fn embed(&self, nvars: usize, map: &[usize]) -> MatrixPoly {
        let mut m = self.map(|e| e.embed(nvars, map));
        m.nvars = nvars;
        m
    }
}

impl<'a> Add<&'a MatrixPoly> for &'a MatrixPoly {
    type Output = MatrixPoly;
    fn add(self, rhs: &MatrixPoly) -> MatrixPoly {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shape mismatch");
        MatrixPoly {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a MatrixPoly> for &'a MatrixPoly {
    type Output = MatrixPoly;
    fn sub(self, rhs: &MatrixPoly) -> MatrixPoly {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shape mismatch");
        MatrixPoly {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a MatrixPoly> for &'a MatrixPoly {
    type Output = MatrixPoly;
    fn mul(self, rhs: &MatrixPoly) -> MatrixPoly {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        MatrixPoly::from_fn(self.rows, rhs.cols, self.nvars, |i, j| {
            (0..self.cols).fold(Poly::zero(self.nvars), |acc, k| {
                let a = self.get(i, k);
                let b = rhs.get(k, j);
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    acc + a * b
                }
            })
        })
    }
}

impl Neg for &MatrixPoly {
    type Output = MatrixPoly;
    fn neg(self) -> MatrixPoly {
        self.map(|e| -e)
    }
}

impl Neg for MatrixPoly {
    type Output = MatrixPoly;
    fn neg(self) -> MatrixPoly {
        -&self
    }
}

forward_owned!(Add, add, MatrixPoly);
forward_owned!(Sub, sub, MatrixPoly);
forward_owned!(Mul, mul, MatrixPoly);

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> Poly {
        Poly::var(1, 0)
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = MatrixPoly::identity(3, 1);
        assert_eq!(id.inverse_if_unimodular().unwrap(), id);
    }

    #[test]
    fn shear_inverse_multiplies_back() {
        let m = MatrixPoly::from_rows(vec![vec![Poly::one(1), x1()], vec![Poly::zero(1), Poly::one(1)]], 1).unwrap();
        let inv = m.inverse_if_unimodular().unwrap();
        let expected =
            MatrixPoly::from_rows(vec![vec![Poly::one(1), -x1()], vec![Poly::zero(1), Poly::one(1)]], 1).unwrap();
        assert_eq!(inv, expected);
        assert!((&m * &inv).is_identity());
        assert!((&inv * &m).is_identity());
    }

    #[test]
    fn non_constant_and_zero_determinants_are_rejected() {
        let m = MatrixPoly::from_rows(vec![vec![x1(), Poly::zero(1)], vec![Poly::zero(1), Poly::one(1)]], 1).unwrap();
        assert!(matches!(m.inverse_if_unimodular(), Err(Error::NonConstantDeterminant(_))));
        let z = MatrixPoly::zeros(2, 2, 1);
        assert!(matches!(z.inverse_if_unimodular(), Err(Error::ZeroDeterminant)));
    }

    #[test]
    fn three_by_three_determinant() {
        // upper triangular with a polynomial corner, det = 2 * 3 * 5
        let c = |n| Poly::int(1, n);
        let m = MatrixPoly::from_rows(
            vec![vec![c(2), x1(), x1().pow(2)], vec![c(0), c(3), x1()], vec![c(0), c(0), c(5)]],
            1,
        )
        .unwrap();
        assert_eq!(m.det(), c(30));
        let inv = m.inverse_if_unimodular().unwrap();
        assert!((&m * &inv).is_identity());
    }
}
