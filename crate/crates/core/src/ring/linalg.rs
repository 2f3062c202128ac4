//! Exact dense linear algebra over scalars.

use super::scalar::Scalar;

pub type ScalarMatrix = Vec<Vec<Scalar>>;

pub fn identity(n: usize) -> ScalarMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect()).collect()
}

pub fn mat_mul(a: &ScalarMatrix, b: &ScalarMatrix) -> ScalarMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).fold(Scalar::zero(), |acc, k| &acc + &(&row[k] * &b[k][j]))).collect())
        .collect()
}

pub fn mat_vec(a: &ScalarMatrix, v: &[Scalar]) -> Vec<Scalar> {
    a.iter().map(|row| row.iter().zip(v).fold(Scalar::zero(), |acc, (x, y)| &acc + &(x * y))).collect()
}

pub fn transpose(a: &ScalarMatrix) -> ScalarMatrix {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Inverse by Gauss-Jordan elimination; `None` when singular.
pub fn invert(a: &ScalarMatrix) -> Option<ScalarMatrix> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut m: Vec<Vec<Scalar>> =
        a.iter().zip(identity(n)).map(|(r, id)| r.iter().cloned().chain(id).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].inv()?;
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..2 * n {
                    let t = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - &t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Finds some `x` with `a x = b`, or `None` when the system is inconsistent.
/// Free variables are set to zero.
pub fn solve(a: &ScalarMatrix, b: &[Scalar]) -> Option<Vec<Scalar>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Scalar>> =
        a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].inv().unwrap();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..=cols {
                    let t = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - &t;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Scalar::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][cols].clone();
    }
    Some(x)
}
