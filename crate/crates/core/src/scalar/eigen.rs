//! Symmetric eigendecomposition (cyclic Jacobi over `f64`) and exact integer
//! spectra via minimal polynomials of exact integer matrices.

use super::span::SpanAccumulator;
use super::{Exact, Matrix, Scalar, SubspaceBasis, ToleranceContext};
use crate::error::{Error, Result};
use num::{BigInt, One, Signed, Zero};

/// Cyclic Jacobi on a dense symmetric matrix. Returns eigenvalues (descending)
/// and the matrix whose columns are the matching orthonormal eigenvectors.
/// Ties in the sort are broken by the pre-sort index, so the output is
/// deterministic.
pub fn jacobi_eigen(m: &Matrix<f64>) -> (Vec<f64>, Matrix<f64>) {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a: Vec<f64> = m.vectorized().to_vec();
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let idx = |i: usize, j: usize| i * n + j;
    for sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[idx(i, j)].abs();
            }
        }
        if off == 0.0 {
            break;
        }
        // threshold strategy: skip tiny rotations in early sweeps
        let thresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                let g = 100.0 * apq.abs();
                if sweep > 3
                    && a[idx(p, p)].abs() + g == a[idx(p, p)].abs()
                    && a[idx(q, q)].abs() + g == a[idx(q, q)].abs()
                {
                    a[idx(p, q)] = 0.0;
                    a[idx(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = a[idx(q, q)] - a[idx(p, p)];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let ha = t * apq;
                a[idx(p, p)] -= ha;
                a[idx(q, q)] += ha;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[idx(r, p)];
                        let arq = a[idx(r, q)];
                        a[idx(r, p)] = arp - s * (arq + tau * arp);
                        a[idx(r, q)] = arq + s * (arp - tau * arq);
                        a[idx(p, r)] = a[idx(r, p)];
                        a[idx(q, r)] = a[idx(r, q)];
                    }
                }
                for r in 0..n {
                    let vrp = v[idx(r, p)];
                    let vrq = v[idx(r, q)];
                    v[idx(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[idx(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[idx(j, j)]
            .partial_cmp(&a[idx(i, i)])
            .unwrap()
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| a[idx(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[idx(r, order[c])]);
    (values, vectors)
}

/// Group a descending eigenvalue list into clusters of width `width`
/// (chained: adjacent values closer than `width` join the same cluster).
pub fn cluster_eigenvalues(values: &[f64], width: f64) -> Vec<std::ops::Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() > width {
            clusters.push(start..i);
            start = i;
        }
    }
    clusters
}

/// Eigendecomposition of a symmetric float matrix with clustered eigenvalues.
/// Each cluster yields (representative eigenvalue, orthonormal eigenspace).
/// Fails if the input is not symmetric or the spectral reconstruction
/// residual exceeds the verification bound.
pub fn symmetric_eigendecomposition(
    m: &Matrix<f64>,
    ctx: &ToleranceContext,
) -> Result<Vec<(f64, SubspaceBasis<f64>)>> {
    m.check_square()?;
    let scale = m.max_abs().max(1.0);
    let defect = m.symmetry_defect();
    if defect > ctx.residual_bound * scale {
        return Err(Error::NotSymmetric(defect));
    }
    let n = m.rows();
    let (values, vectors) = jacobi_eigen(m);
    let radius = values
        .iter()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let clusters = cluster_eigenvalues(&values, ctx.cluster_width * radius);
    let mut out = Vec::new();
    for range in clusters {
        let rep = values[range.clone()].iter().sum::<f64>() / range.len() as f64;
        let vecs: Vec<Vec<f64>> = range
            .clone()
            .map(|c| (0..n).map(|r| *vectors.at(r, c)).collect())
            .collect();
        // Jacobi already returns orthonormal vectors; keep them as the basis.
        let basis = SubspaceBasis::from_spanning(n, &vecs, ctx);
        if basis.dim() != range.len() {
            return Err(Error::InvariantViolated {
                stage: "symmetric_eigendecomposition".into(),
                identity: "eigenvector block lost rank".into(),
            });
        }
        out.push((rep, basis));
    }
    let total: usize = out.iter().map(|(_, b)| b.dim()).sum();
    if total != n {
        return Err(Error::InvariantViolated {
            stage: "symmetric_eigendecomposition".into(),
            identity: "eigenspace dimensions do not sum to the ambient dimension".into(),
        });
    }
    // reconstruction residual ||M - sum theta_i P_i||
    let mut recon = Matrix::<f64>::zeros(n, n);
    for (theta, basis) in &out {
        for v in basis.vectors() {
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let x = recon.at(i, j) + theta * v[i] * v[j];
                    recon.set(i, j, x);
                }
            }
        }
    }
    let residual = recon.residual(m);
    if residual > ctx.residual_bound * scale {
        return Err(Error::ResidualExceeded {
            what: "eigendecomposition reconstruction".into(),
            residual,
            bound: ctx.residual_bound * scale,
        });
    }
    Ok(out)
}

/// Minimal polynomial of an exact square matrix, monic, as coefficients
/// `c_0 + c_1 x + ... + x^m` (the leading 1 is included).
pub fn minimal_polynomial(a: &Matrix<Exact>) -> Result<Vec<Exact>> {
    a.check_square()?;
    let n = a.rows();
    let ctx = ToleranceContext::default();
    let mut acc = SpanAccumulator::<Exact>::new(n * n, &ctx);
    let mut powers: Vec<Matrix<Exact>> = Vec::new();
    let mut current = Matrix::<Exact>::identity(n);
    loop {
        if !acc.insert(current.vectorized()) {
            break;
        }
        powers.push(current.clone());
        current = current.mul(a);
        if powers.len() > n + 1 {
            return Err(Error::InvariantViolated {
                stage: "minimal_polynomial".into(),
                identity: "power chain exceeded ambient dimension".into(),
            });
        }
    }
    // current = A^m lies in span(I, A, ..., A^{m-1}); solve for coefficients
    let m = powers.len();
    let coeffs = solve_dependence(&powers, &current)?;
    let mut poly: Vec<Exact> = coeffs.into_iter().map(|c| -c).collect();
    poly.push(Exact::one());
    debug_assert_eq!(poly.len(), m + 1);
    Ok(poly)
}

/// Express `target` as a combination of the (independent) `basis` matrices.
fn solve_dependence(basis: &[Matrix<Exact>], target: &Matrix<Exact>) -> Result<Vec<Exact>> {
    let m = basis.len();
    let len = target.vectorized().len();
    // tracked echelon: rows carry their combination in terms of basis indices
    let mut rows: Vec<(Vec<Exact>, Vec<Exact>)> = Vec::new(); // (vector, combo)
    let mut pivots: Vec<usize> = Vec::new();
    for (bi, b) in basis.iter().enumerate() {
        let mut v = b.vectorized().to_vec();
        let mut combo = vec![Exact::zero(); m];
        combo[bi] = Exact::one();
        for ((row, cmb), &p) in rows.iter().zip(pivots.iter()) {
            let c = v[p].clone();
            if c.is_zero() {
                continue;
            }
            for (x, r) in v.iter_mut().zip(row.iter()) {
                if !r.is_zero() {
                    x.sub_mul(&c, r);
                }
            }
            for (x, r) in combo.iter_mut().zip(cmb.iter()) {
                if !r.is_zero() {
                    x.sub_mul(&c, r);
                }
            }
        }
        let p = v
            .iter()
            .position(|x| !x.is_zero())
            .ok_or_else(|| Error::InvariantViolated {
                stage: "solve_dependence".into(),
                identity: "basis matrices are not independent".into(),
            })?;
        let lead = v[p].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        for x in combo.iter_mut() {
            *x /= &lead;
        }
        rows.push((v, combo));
        pivots.push(p);
    }
    let mut v = target.vectorized().to_vec();
    let mut combo = vec![Exact::zero(); m];
    for ((row, cmb), &p) in rows.iter().zip(pivots.iter()) {
        let c = v[p].clone();
        if c.is_zero() {
            continue;
        }
        for (x, r) in v.iter_mut().zip(row.iter()) {
            if !r.is_zero() {
                x.sub_mul(&c, r);
            }
        }
        for (x, r) in combo.iter_mut().zip(cmb.iter()) {
            x.add_mul(&c, r);
        }
    }
    if v.iter().any(|x| !x.is_zero()) {
        return Err(Error::InvariantViolated {
            stage: "solve_dependence".into(),
            identity: "target not in span".into(),
        });
    }
    let _ = len;
    Ok(combo)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntegerSpectrum {
    /// All eigenvalues are integers; sorted descending.
    Integers(Vec<i64>),
    /// The minimal polynomial does not split into distinct integer roots.
    NotAllInteger,
}

/// Exact spectrum test for a symmetric integer matrix: computes the minimal
/// polynomial from the power chain I, A, A^2, ... and extracts integer roots
/// by trial division of the constant term. Callers fall back to the float
/// path on `NotAllInteger`.
pub fn integer_spectrum(a: &Matrix<Exact>) -> Result<IntegerSpectrum> {
    let poly = minimal_polynomial(a)?;
    // minimal polynomial of an integer matrix is monic with integer coefficients
    let mut coeffs: Vec<BigInt> = Vec::with_capacity(poly.len());
    for c in &poly {
        if !super::exact_is_integer(c) {
            return Ok(IntegerSpectrum::NotAllInteger);
        }
        coeffs.push(c.numer().clone());
    }
    let mut roots: Vec<i64> = Vec::new();
    // peel off zero roots first
    while coeffs.len() > 1 && coeffs[0].is_zero() {
        if roots.contains(&0) {
            return Ok(IntegerSpectrum::NotAllInteger);
        }
        roots.push(0);
        coeffs.remove(0);
    }
    while coeffs.len() > 1 {
        let constant = coeffs[0].clone();
        let limit: BigInt = BigInt::from(1_000_000_000_000i64);
        if constant.abs() > limit {
            return Ok(IntegerSpectrum::NotAllInteger);
        }
        let c0 = match num::ToPrimitive::to_i64(&constant) {
            Some(v) => v,
            None => return Ok(IntegerSpectrum::NotAllInteger),
        };
        let mut found = None;
        for d in divisors(c0.unsigned_abs()) {
            for cand in [d as i64, -(d as i64)] {
                if roots.contains(&cand) {
                    continue;
                }
                if let Some(quot) = synthetic_division(&coeffs, cand) {
                    found = Some((cand, quot));
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some((root, quot)) => {
                roots.push(root);
                coeffs = quot;
            }
            None => return Ok(IntegerSpectrum::NotAllInteger),
        }
    }
    roots.sort_unstable_by(|a, b| b.cmp(a));
    Ok(IntegerSpectrum::Integers(roots))
}

fn divisors(n: u64) -> Vec<u64> {
    if n == 0 {
        return vec![];
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Divide `poly` (ascending coefficients) by `(x - root)`; `None` if the
/// remainder is nonzero.
fn synthetic_division(poly: &[BigInt], root: i64) -> Option<Vec<BigInt>> {
    let r = BigInt::from(root);
    let deg = poly.len() - 1;
    let mut quot = vec![BigInt::zero(); deg];
    let mut carry = poly[deg].clone();
    for i in (0..deg).rev() {
        quot[i] = carry.clone();
        carry = &carry * &r + &poly[i];
    }
    if carry.is_zero() {
        Some(quot)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn ctx() -> ToleranceContext {
        ToleranceContext::default()
    }

    fn cycle_adjacency_exact(n: usize) -> Matrix<Exact> {
        Matrix::from_integers(n, n, |i, j| {
            let d = (i as i64 - j as i64).rem_euclid(n as i64);
            if d == 1 || d == n as i64 - 1 {
                1
            } else {
                0
            }
        })
    }

    #[test]
    fn identity_has_single_eigenvalue() {
        let eig = symmetric_eigendecomposition(&Matrix::<f64>::identity(4), &ctx()).unwrap();
        assert_eq!(eig.len(), 1);
        assert!((eig[0].0 - 1.0).abs() < 1e-12);
        assert_eq!(eig[0].1.dim(), 4);
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let mut m = Matrix::<f64>::zeros(2, 2);
        m.set(0, 1, 1.0);
        assert!(matches!(
            symmetric_eigendecomposition(&m, &ctx()),
            Err(Error::NotSymmetric(_))
        ));
    }

    #[test]
    fn six_cycle_spectrum() {
        // Hand oracle: eigenvalues of C_6 are 2cos(2 pi j / 6) = 2, 1, 1, -1, -1, -2.
        let a = cycle_adjacency_exact(6).to_float();
        let eig = symmetric_eigendecomposition(&a, &ctx()).unwrap();
        let summary: Vec<(i64, usize)> = eig
            .iter()
            .map(|(v, b)| (v.round() as i64, b.dim()))
            .collect();
        assert_eq!(summary, vec![(2, 1), (1, 2), (-1, 2), (-2, 1)]);
    }

    #[test]
    fn eigenspace_projectors_behave() {
        let a = cycle_adjacency_exact(6).to_float();
        let eig = symmetric_eigendecomposition(&a, &ctx()).unwrap();
        let n = 6;
        // sum of projectors is the identity; cross products vanish
        let projector = |b: &SubspaceBasis<f64>| {
            let mut p = Matrix::<f64>::zeros(n, n);
            for v in b.vectors() {
                for i in 0..n {
                    for j in 0..n {
                        let x = p.at(i, j) + v[i] * v[j];
                        p.set(i, j, x);
                    }
                }
            }
            p
        };
        let ps: Vec<_> = eig.iter().map(|(_, b)| projector(b)).collect();
        let mut sum = Matrix::<f64>::zeros(n, n);
        for p in &ps {
            sum = sum.add(p);
        }
        assert!(sum.residual(&Matrix::identity(n)) < 1e-10);
        for i in 0..ps.len() {
            for j in 0..ps.len() {
                if i != j {
                    assert!(ps[i].mul(&ps[j]).max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn five_cycle_spectrum_is_not_integral() {
        // minimal polynomial of A(C_5) contains the factor x^2 + x - 1
        let a = cycle_adjacency_exact(5);
        assert_eq!(integer_spectrum(&a).unwrap(), IntegerSpectrum::NotAllInteger);
    }

    #[test]
    fn six_cycle_spectrum_is_integral() {
        let a = cycle_adjacency_exact(6);
        assert_eq!(
            integer_spectrum(&a).unwrap(),
            IntegerSpectrum::Integers(vec![2, 1, -1, -2])
        );
    }

    #[test]
    fn minimal_polynomial_of_identity() {
        let poly = minimal_polynomial(&Matrix::<Exact>::identity(5)).unwrap();
        // x - 1
        assert_eq!(poly.len(), 2);
        assert_eq!(poly[0], -Exact::from_int(1));
        assert_eq!(poly[1], Exact::from_int(1));
    }
}
