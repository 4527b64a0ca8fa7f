//! Dense exact linear algebra over any [`Scalar`] field.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exactfield::{Rational, Scalar};

pub type Matrix<T> = Vec<Vec<T>>;

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    assert_eq!(u.len(), v.len(), "dot of unequal lengths");
    let mut acc = u[0].zero_like();
    for (x, y) in u.iter().zip(v) {
        acc = acc + &(x.clone() * y);
    }
    acc
}

pub fn add_vec<T: Scalar>(u: &[T], v: &[T]) -> Vec<T> {
    u.iter().zip(v).map(|(x, y)| x.clone() + y).collect()
}

pub fn sub_vec<T: Scalar>(u: &[T], v: &[T]) -> Vec<T> {
    u.iter().zip(v).map(|(x, y)| x.clone() - y).collect()
}

pub fn scale_vec<T: Scalar>(s: &T, v: &[T]) -> Vec<T> {
    v.iter().map(|x| x.clone() * s).collect()
}

pub fn neg_vec<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|x| -x.clone()).collect()
}

pub fn is_zero_vec<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero_value())
}

pub fn transpose<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|c| m.iter().map(|row| row[c].clone()).collect()).collect()
}

pub fn mat_mul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let bt = transpose(b);
    a.iter().map(|row| bt.iter().map(|col| dot(row, col)).collect()).collect()
}

pub fn mat_vec<T: Scalar>(a: &Matrix<T>, v: &[T]) -> Vec<T> {
    a.iter().map(|row| dot(row, v)).collect()
}

pub fn identity<T: Scalar>(n: usize, like: &T) -> Matrix<T> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { like.one_like() } else { like.zero_like() }).collect())
        .collect()
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref<T: Scalar>(m: &mut Matrix<T>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero_value()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].one_like() / m[r][c].clone();
        m[r] = scale_vec(&inv, &m[r]);
        for i in 0..rows {
            if i != r && !m[i][c].is_zero_value() {
                let f = m[i][c].clone();
                let sub = scale_vec(&f, &m[r]);
                m[i] = sub_vec(&m[i], &sub);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Scalar>(m: &Matrix<T>) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Basis of the right nullspace `{x : m x = 0}`.
pub fn nullspace<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let cols = m[0].len();
    let like = m[0][0].clone();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![like.zero_like(); cols];
        v[free] = like.one_like();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -w[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves `a x = b` for one solution, or `None` when inconsistent.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let cols = a[0].len();
    let mut aug: Matrix<T> =
        a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain(std::iter::once(bi.clone())).collect()).collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let like = a[0][0].clone();
    let mut x = vec![like.zero_like(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

pub fn inverse<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.len();
    let like = a[0][0].clone();
    let id = identity(n, &like);
    let mut aug: Matrix<T> = a.iter().zip(&id).map(|(r, e)| r.iter().chain(e).cloned().collect()).collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.len();
    let mut w = a.clone();
    let like = a[0][0].clone();
    let mut det = like.one_like();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[i][c].is_zero_value()) else {
            return like.zero_like();
        };
        if p != c {
            w.swap(p, c);
            det = -det;
        }
        det = det * &w[c][c];
        for i in c + 1..n {
            if !w[i][c].is_zero_value() {
                let f = w[i][c].clone() / w[c][c].clone();
                let sub = scale_vec(&f, &w[c]);
                w[i] = sub_vec(&w[i], &sub);
            }
        }
    }
    det
}


/// Row-echelon basis of the Z-span of integer rows.
pub fn integer_row_basis(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    if m.is_empty() {
        return m;
    }
    let cols = m[0].len();
    let mut k = 0;
    for c in 0..cols {
        loop {
            let pivot = (k..m.len()).filter(|&i| !m[i][c].is_zero()).min_by(|&a, &b| m[a][c].abs().cmp(&m[b][c].abs()));
            let Some(p) = pivot else { break };
            m.swap(k, p);
            let mut done = true;
            for i in k + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let q = m[i][c].div_floor(&m[k][c]);
                let pivot_row = m[k].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                k += 1;
                break;
            }
        }
        if k == m.len() {
            break;
        }
    }
    m.truncate(k);
    m
}

/// Basis of the Z-span of rational rows.
pub fn rational_row_basis(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut den = BigInt::one();
    for x in rows.iter().flatten() {
        den = den.lcm(x.denom());
    }
    let ints: Vec<Vec<BigInt>> =
        rows.iter().map(|r| r.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect()).collect();
    integer_row_basis(&ints)
        .into_iter()
        .map(|r| r.into_iter().map(|x| Rational::new(x, den.clone())).collect())
        .collect()
}
