//! Incremental span maintenance and subspace operations.
//!
//! The exact domain keeps an echelon form (pivot-normalized rows, reduced in
//! insertion order); the float domain keeps orthonormal rows via modified
//! Gram-Schmidt with re-orthogonalization. Both expose the same interface:
//! insert a vector, test membership, report rank.

use super::{Matrix, Scalar, ToleranceContext};
use crate::error::{Error, Result};

pub struct SpanAccumulator<S> {
    ambient: usize,
    rows: Vec<Vec<S>>,
    /// Pivot column per row (exact domain only).
    pivots: Vec<usize>,
    rank_threshold: f64,
}

impl<S: Scalar> SpanAccumulator<S> {
    pub fn new(ambient: usize, ctx: &ToleranceContext) -> Self {
        SpanAccumulator {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
            rank_threshold: ctx.rank_threshold,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Reduce `v` against the accumulated rows in insertion order.
    fn reduce(&self, v: &mut [S]) {
        if S::EXACT {
            for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
                if v[p].is_zero() {
                    continue;
                }
                let c = v[p].clone();
                for (x, r) in v.iter_mut().zip(row.iter()) {
                    if !r.is_zero() {
                        x.sub_mul(&c, r);
                    }
                }
            }
        } else {
            // two MGS passes for numerical stability
            for _ in 0..2 {
                for row in &self.rows {
                    let mut c = S::zero();
                    for (x, r) in v.iter().zip(row.iter()) {
                        c.add_mul(x, r);
                    }
                    if c.is_zero() {
                        continue;
                    }
                    for (x, r) in v.iter_mut().zip(row.iter()) {
                        x.sub_mul(&c, r);
                    }
                }
            }
        }
    }

    /// Residual norm of `v` against the span: sup-norm of the exact reduction,
    /// Euclidean norm in the float domain.
    pub fn residual(&self, v: &[S]) -> f64 {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        if S::EXACT {
            w.iter().map(|x| x.abs_f64()).fold(0.0, f64::max)
        } else {
            norm2(&w)
        }
    }

    pub fn contains(&self, v: &[S]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        if S::EXACT {
            w.iter().all(|x| x.is_zero())
        } else {
            let scale = norm2(v).max(1.0);
            norm2(&w) <= self.rank_threshold * scale
        }
    }

    /// Insert `v` if it enlarges the span. Returns true on growth.
    pub fn insert(&mut self, v: &[S]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let mut w = v.to_vec();
        self.reduce(&mut w);
        if S::EXACT {
            let pivot = match w.iter().position(|x| !x.is_zero()) {
                Some(p) => p,
                None => return false,
            };
            let lead = w[pivot].clone();
            for x in w.iter_mut() {
                if !x.is_zero() {
                    *x /= &lead;
                }
            }
            self.pivots.push(pivot);
            self.rows.push(w);
            true
        } else {
            let scale = norm2(v).max(1.0);
            let n = norm2(&w);
            if n <= self.rank_threshold * scale {
                return false;
            }
            let ninv = S::from_f64_approx(1.0 / n);
            for x in w.iter_mut() {
                *x *= &ninv;
            }
            self.rows.push(w);
            self.pivots.push(usize::MAX);
            true
        }
    }

    /// Orthonormal rows (float) / echelon rows (exact).
    pub fn rows_ref(&self) -> &[Vec<S>] {
        &self.rows
    }
}

pub(crate) fn norm2<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs_f64() * x.abs_f64()).sum::<f64>().sqrt()
}

/// Maximal linearly independent subset of `mats`, orthogonalized under the
/// trace form in the float domain and echelon-selected in the exact domain.
/// The span is preserved; the output size equals the rank of the vectorized
/// input set. Empty input gives empty output.
pub fn gram_trace_basis<S: Scalar>(
    mats: &[Matrix<S>],
    ctx: &ToleranceContext,
) -> Result<Vec<Matrix<S>>> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let (r, c) = (first.rows(), first.cols());
    for m in mats {
        if m.rows() != r || m.cols() != c {
            return Err(Error::ShapeMismatch(format!(
                "gram_trace_basis: {}x{} vs {}x{}",
                m.rows(),
                m.cols(),
                r,
                c
            )));
        }
    }
    let mut acc = SpanAccumulator::new(r * c, ctx);
    let mut out = Vec::new();
    for m in mats {
        let before = acc.rank();
        if acc.insert(m.vectorized()) {
            debug_assert_eq!(acc.rank(), before + 1);
            if S::EXACT {
                // echelon-selected: keep the original matrix
                out.push(m.clone());
            } else {
                // orthonormalized representative
                let row = acc.rows_ref().last().unwrap().clone();
                out.push(Matrix::from_vec(r, c, row));
            }
        }
    }
    Ok(out)
}

/// Basis of a subspace of `R^ambient` stored as rows: orthonormal in the
/// float domain, echelon-independent in the exact domain.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<S> {
    ambient: usize,
    vectors: Vec<Vec<S>>,
}

impl<S: Scalar> SubspaceBasis<S> {
    pub fn empty(ambient: usize) -> Self {
        SubspaceBasis {
            ambient,
            vectors: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        let mut vectors = Vec::with_capacity(ambient);
        for i in 0..ambient {
            let mut v = vec![S::zero(); ambient];
            v[i] = S::from_int(1);
            vectors.push(v);
        }
        SubspaceBasis { ambient, vectors }
    }

    /// Build a basis from arbitrary spanning vectors.
    pub fn from_spanning(ambient: usize, vecs: &[Vec<S>], ctx: &ToleranceContext) -> Self {
        let mut acc = SpanAccumulator::new(ambient, ctx);
        for v in vecs {
            assert_eq!(v.len(), ambient);
            acc.insert(v);
        }
        SubspaceBasis {
            ambient,
            vectors: acc.rows.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[Vec<S>] {
        &self.vectors
    }

    pub fn contains(&self, v: &[S], ctx: &ToleranceContext) -> bool {
        self.to_accumulator(ctx).contains(v)
    }

    /// Same span test via mutual containment.
    pub fn same_span(&self, other: &Self, ctx: &ToleranceContext) -> bool {
        if self.ambient != other.ambient || self.dim() != other.dim() {
            return false;
        }
        let acc = self.to_accumulator(ctx);
        other.vectors.iter().all(|v| acc.contains(v))
    }

    fn to_accumulator(&self, ctx: &ToleranceContext) -> SpanAccumulator<S> {
        let mut acc = SpanAccumulator::new(self.ambient, ctx);
        for v in &self.vectors {
            acc.insert(v);
        }
        acc
    }

    /// Image of this subspace under the matrix `p` (applied on the left to
    /// column vectors), re-orthonormalized / re-echeloned.
    pub fn project(&self, p: &Matrix<S>, ctx: &ToleranceContext) -> Result<SubspaceBasis<S>> {
        if p.cols() != self.ambient {
            return Err(Error::ShapeMismatch(format!(
                "project: matrix has {} cols, subspace ambient {}",
                p.cols(),
                self.ambient
            )));
        }
        let images: Vec<Vec<S>> = self.vectors.iter().map(|v| p.apply(v)).collect();
        Ok(SubspaceBasis::from_spanning(p.rows(), &images, ctx))
    }

    /// Intersection of two subspaces of the same ambient space.
    pub fn intersect(&self, other: &Self, ctx: &ToleranceContext) -> Result<SubspaceBasis<S>> {
        if self.ambient != other.ambient {
            return Err(Error::ShapeMismatch(
                "intersect: ambient dimensions differ".into(),
            ));
        }
        // x in U cap W  <=>  x = U^T a = W^T b; solve [U^T | -W^T] null space
        // in coefficient space (a, b), then map a back through U.
        let (ru, rw) = (self.dim(), other.dim());
        if ru == 0 || rw == 0 {
            return Ok(SubspaceBasis::empty(self.ambient));
        }
        let cols = ru + rw;
        let mut rows_mat = Matrix::<S>::zeros(self.ambient, cols);
        for (j, v) in self.vectors.iter().enumerate() {
            for i in 0..self.ambient {
                rows_mat.set(i, j, v[i].clone());
            }
        }
        for (j, v) in other.vectors.iter().enumerate() {
            for i in 0..self.ambient {
                let mut x = v[i].clone();
                x = -x;
                rows_mat.set(i, ru + j, x);
            }
        }
        let null = nullspace(&rows_mat, ctx);
        let combos: Vec<Vec<S>> = null
            .iter()
            .map(|coef| {
                let mut x = vec![S::zero(); self.ambient];
                for (j, v) in self.vectors.iter().enumerate() {
                    if coef[j].is_zero() {
                        continue;
                    }
                    for i in 0..self.ambient {
                        x[i].add_mul(&coef[j], &v[i]);
                    }
                }
                x
            })
            .collect();
        Ok(SubspaceBasis::from_spanning(self.ambient, &combos, ctx))
    }

    /// Vectors of `within` orthogonal (standard inner product) to this space.
    pub fn orthogonal_complement_within(
        &self,
        within: &Self,
        ctx: &ToleranceContext,
    ) -> Result<SubspaceBasis<S>> {
        if self.ambient != within.ambient {
            return Err(Error::ShapeMismatch(
                "orthogonal_complement_within: ambient dimensions differ".into(),
            ));
        }
        // Solve <sum_j c_j w_j, u_i> = 0 for all i: nullspace of G = U W^T
        // acting on the coefficient vector c.
        let (ru, rw) = (self.dim(), within.dim());
        if ru == 0 {
            return Ok(within.clone());
        }
        if rw == 0 {
            return Ok(SubspaceBasis::empty(self.ambient));
        }
        let mut g = Matrix::<S>::zeros(ru, rw);
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, w) in within.vectors.iter().enumerate() {
                let mut dot = S::zero();
                for (a, b) in u.iter().zip(w.iter()) {
                    if !a.is_zero() && !b.is_zero() {
                        dot.add_mul(a, b);
                    }
                }
                g.set(i, j, dot);
            }
        }
        let null = nullspace(&g, ctx);
        let combos: Vec<Vec<S>> = null
            .iter()
            .map(|coef| {
                let mut x = vec![S::zero(); self.ambient];
                for (j, w) in within.vectors.iter().enumerate() {
                    if coef[j].is_zero() {
                        continue;
                    }
                    for i in 0..self.ambient {
                        x[i].add_mul(&coef[j], &w[i]);
                    }
                }
                x
            })
            .collect();
        Ok(SubspaceBasis::from_spanning(self.ambient, &combos, ctx))
    }
}

/// Incremental reduced row echelon over the coefficient space of a linear
/// system; rows are constraint equations, and the nullspace basis comes from
/// the free columns. Built row by row so sparse systems never materialize as
/// one dense matrix.
pub struct RowEchelon<S> {
    cols: usize,
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
    rank_threshold: f64,
}

impl<S: Scalar> RowEchelon<S> {
    pub fn new(cols: usize, ctx: &ToleranceContext) -> Self {
        RowEchelon {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
            rank_threshold: ctx.rank_threshold,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Insert one constraint row; returns true if the rank grew.
    pub fn insert_row(&mut self, mut v: Vec<S>) -> bool {
        assert_eq!(v.len(), self.cols);
        let scale = if S::EXACT { 1.0 } else { norm2(&v).max(1.0) };
        for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
            let c = v[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, r) in v.iter_mut().zip(row.iter()) {
                if !r.is_zero() {
                    x.sub_mul(&c, r);
                }
            }
        }
        let pivot = if S::EXACT {
            v.iter().position(|x| !x.is_zero())
        } else {
            let (mut best, mut best_abs) = (None, self.rank_threshold * scale);
            for (j, x) in v.iter().enumerate() {
                let a = x.abs_f64();
                if a > best_abs {
                    best = Some(j);
                    best_abs = a;
                }
            }
            best
        };
        let Some(p) = pivot else { return false };
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        if !S::EXACT {
            for x in v.iter_mut() {
                if x.abs_f64() < 1e-14 {
                    *x = S::zero();
                }
            }
        }
        // back-eliminate so the echelon stays fully reduced
        for row in self.rows.iter_mut() {
            let c = row[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, r) in row.iter_mut().zip(v.iter()) {
                if !r.is_zero() {
                    x.sub_mul(&c, r);
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    /// Free columns parametrize the nullspace of the accumulated system.
    pub fn nullspace_basis(&self) -> Vec<Vec<S>> {
        let mut is_pivot = vec![false; self.cols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[f] = S::from_int(1);
            for (row, &p) in self.rows.iter().zip(self.pivots.iter()) {
                let mut x = row[f].clone();
                x = -x;
                v[p] = x;
            }
            basis.push(v);
        }
        basis
    }
}

/// Nullspace basis of a (rows x cols) matrix acting on column vectors.
pub fn nullspace<S: Scalar>(m: &Matrix<S>, ctx: &ToleranceContext) -> Vec<Vec<S>> {
    let mut ech = RowEchelon::new(m.cols(), ctx);
    for i in 0..m.rows() {
        ech.insert_row(m.row(i).to_vec());
        if ech.rank() == m.cols() {
            return Vec::new();
        }
    }
    ech.nullspace_basis()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num::Zero;

    fn ctx() -> ToleranceContext {
        ToleranceContext::default()
    }

    #[test]
    fn scalar_multiples_collapse() {
        let i3 = Matrix::<Exact>::identity(3);
        let two_i = i3.scale(&Exact::from_int(2));
        let basis = gram_trace_basis(&[i3.clone(), two_i], &ctx()).unwrap();
        assert_eq!(basis.len(), 1);
        let i3f = Matrix::<f64>::identity(3);
        let basis = gram_trace_basis(&[i3f.clone(), i3f.scale(&2.0)], &ctx()).unwrap();
        assert_eq!(basis.len(), 1);
    }

    #[test]
    fn empty_input_gives_empty_output() {
        let basis = gram_trace_basis::<Exact>(&[], &ctx()).unwrap();
        assert!(basis.is_empty());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Matrix::<f64>::identity(2);
        let b = Matrix::<f64>::identity(3);
        assert!(gram_trace_basis(&[a, b], &ctx()).is_err());
    }

    #[test]
    fn float_output_is_orthonormal() {
        let a = Matrix::<f64>::from_fn(2, 2, |i, j| (i + j) as f64 + 1.0);
        let b = Matrix::<f64>::from_fn(2, 2, |i, j| (2 * i + 3 * j) as f64);
        let basis = gram_trace_basis(&[a, b, Matrix::identity(2)], &ctx()).unwrap();
        for (i, m) in basis.iter().enumerate() {
            for (j, n) in basis.iter().enumerate() {
                let d = m.trace_dot(n);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10, "gram {i},{j} = {d}");
            }
        }
    }

    #[test]
    fn intersect_idempotent() {
        let vecs = vec![
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ];
        let u = SubspaceBasis::from_spanning(4, &vecs, &ctx());
        let w = u.intersect(&u, &ctx()).unwrap();
        assert_eq!(w.dim(), 2);
        assert!(w.same_span(&u, &ctx()));
    }

    #[test]
    fn complement_has_complementary_dimension() {
        let one = SubspaceBasis::from_spanning(6, &[vec![1.0f64; 6]], &ctx());
        let full = SubspaceBasis::full(6);
        let c = one.orthogonal_complement_within(&full, &ctx()).unwrap();
        assert_eq!(c.dim(), 5);
        for v in c.vectors() {
            let s: f64 = v.iter().sum();
            assert!(s.abs() < 1e-9);
        }
    }

    #[test]
    fn nullspace_exact_small() {
        // x + y + z = 0 over the rationals: nullspace dim 2
        let m = Matrix::<Exact>::from_integers(1, 3, |_, _| 1);
        let ns = nullspace(&m, &ctx());
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let s = v.iter().fold(Exact::from_int(0), |mut a, x| {
                a += x;
                a
            });
            assert!(s.is_zero());
        }
    }
}
