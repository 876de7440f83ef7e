//! Dense row-major matrices over a [`Scalar`] domain.

use super::{Exact, Scalar};
use crate::error::{Error, Result};

/// Dense matrix. Row-major storage; the vectorization order used for all rank
/// computations is the storage order.
#[derive(Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> std::fmt::Debug for Matrix<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(12) {
                write!(f, "{} ", self.at(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn all_ones(n: usize) -> Self {
        Matrix {
            rows: n,
            cols: n,
            data: vec![S::one(); n * n],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Diagonal matrix from the given diagonal entries.
    pub fn diagonal(diag: &[S]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    /// Row-major vectorization; this is the canonical order for every rank
    /// and span computation in the crate.
    pub fn vectorized(&self) -> &[S] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(rows * cols, data.len());
        Matrix { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    /// Entrywise (Schur) product.
    pub fn schur(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a *= b;
        }
        out
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self.at(i, i);
        }
        t
    }

    /// Trace-form inner product `tr(self^T other)`, i.e. the entrywise dot.
    pub fn trace_dot(&self, other: &Self) -> S {
        let mut t = S::zero();
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            if !a.is_zero() && !b.is_zero() {
                t.add_mul(a, b);
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree for multiplication"
        );
        if let Some(out) = mul_int_fast(self, other) {
            return out;
        }
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, p);
        for i in 0..n {
            for k in 0..m {
                let aik = self.at(i, k);
                if aik.is_zero() {
                    continue;
                }
                let aik = aik.clone();
                let orow = &other.data[k * p..(k + 1) * p];
                let crow = &mut out.data[i * p..(i + 1) * p];
                for (c, b) in crow.iter_mut().zip(orow.iter()) {
                    if !b.is_zero() {
                        c.add_mul(&aik, b);
                    }
                }
            }
        }
        out
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.abs_f64())
            .fold(0.0f64, f64::max)
    }

    /// Sup-norm of the difference; the residual measure used everywhere.
    pub fn residual(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| {
                let mut d = a.clone();
                d -= b;
                d.abs_f64()
            })
            .fold(0.0f64, f64::max)
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let mut d = self.at(i, j).clone();
                d -= self.at(j, i);
                worst = worst.max(d.abs_f64());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.symmetry_defect() <= tol
    }

    pub fn check_square(&self) -> Result<()> {
        if self.rows == self.cols {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    /// Apply to a (column) vector.
    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![S::zero(); self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let acc = &mut out[i];
            for (a, x) in row.iter().zip(v.iter()) {
                if !a.is_zero() && !x.is_zero() {
                    acc.add_mul(a, x);
                }
            }
        }
        out
    }

    pub fn to_float(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.to_f64()).collect(),
        }
    }
}

impl Matrix<Exact> {
    pub fn from_integers(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        Matrix::from_fn(rows, cols, |i, j| Exact::from_int(f(i, j)))
    }
}

/// Integer fast path for exact matrix products.
///
/// When both operands have machine-word rational entries they are rewritten
/// over a common denominator and multiplied in `i128`. Entry and dimension
/// bounds guarantee the accumulation cannot overflow. Returns `None` (caller
/// falls back to the generic loop) when anything does not fit.
fn mul_int_fast<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Option<Matrix<S>> {
    if !S::EXACT || a.cols > 4096 {
        return None;
    }
    let fa = to_common_den(a)?;
    let fb = to_common_den(b)?;
    let (n, m, p) = (a.rows, a.cols, b.cols);
    let mut data = vec![0i128; n * p];
    for i in 0..n {
        for k in 0..m {
            let aik = fa.0[i * m + k];
            if aik == 0 {
                continue;
            }
            let brow = &fb.0[k * p..(k + 1) * p];
            let crow = &mut data[i * p..(i + 1) * p];
            for (c, &v) in crow.iter_mut().zip(brow.iter()) {
                *c += aik * v;
            }
        }
    }
    let den = fa.1 * fb.1;
    Some(Matrix {
        rows: n,
        cols: p,
        data: data
            .into_iter()
            .map(|v| S::from_i128_ratio(v, den))
            .collect(),
    })
}

/// Rewrite a matrix as (integer entries, common denominator), bounding entry
/// magnitude so that `i128` accumulation over <= 4096 terms stays exact.
fn to_common_den<S: Scalar>(m: &Matrix<S>) -> Option<(Vec<i128>, i128)> {
    const ENTRY_CAP: i128 = 1 << 55;
    const DEN_CAP: i128 = 1 << 42;
    let mut den: i128 = 1;
    let mut pairs = Vec::with_capacity(m.data.len());
    for x in &m.data {
        let (num, d) = x.as_i64_ratio()?;
        let d = d as i128;
        pairs.push((num as i128, d));
        let g = gcd_i128(den, d);
        den = (den / g).checked_mul(d)?;
        if den > DEN_CAP {
            return None;
        }
    }
    let mut out = Vec::with_capacity(pairs.len());
    for (num, d) in pairs {
        let v = num.checked_mul(den / d)?;
        if v.abs() > ENTRY_CAP {
            return None;
        }
        out.push(v);
    }
    Some((out, den))
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn q(n: i64, d: i64) -> Exact {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn exact_product_matches_generic_path() {
        let a = Matrix::from_fn(3, 3, |i, j| q((i * 3 + j) as i64, 1 + (i as i64)));
        let b = Matrix::from_fn(3, 3, |i, j| q((i + 2 * j) as i64 - 3, 2));
        let fast = a.mul(&b);
        // force the generic path by disguising one entry as a huge rational
        let mut big = a.clone();
        let huge = q(1, 1) * Exact::from_int(1 << 60) * Exact::from_int(1 << 60);
        big.set(0, 0, huge.clone());
        let slow = big.mul(&b);
        let mut a2 = big.clone();
        a2.set(0, 0, a.at(0, 0).clone());
        assert_eq!(a2.mul(&b), fast);
        // sanity: slow path actually ran and differs
        assert_ne!(slow, fast);
    }

    #[test]
    fn float_product_and_trace() {
        let a = Matrix::<f64>::from_fn(2, 2, |i, j| (i + j) as f64);
        let b = Matrix::<f64>::identity(2);
        assert_eq!(a.mul(&b), a);
        assert_eq!(a.trace(), 2.0);
        assert_eq!(a.trace_dot(&a), 0.0 + 1.0 + 1.0 + 4.0);
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let mut m = Matrix::<f64>::identity(3);
        assert!(m.is_symmetric(0.0));
        m.set(0, 1, 0.5);
        assert!(!m.is_symmetric(1e-12));
        assert_eq!(m.symmetry_defect(), 0.5);
    }
}
