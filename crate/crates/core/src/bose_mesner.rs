//! The Bose-Mesner algebra of a certified distance-regular graph: spectrum,
//! primitive idempotents, multiplicities, Krein parameters, and detection of
//! Q-polynomial orderings.
//!
//! When the adjacency spectrum is integral the idempotents come from the
//! product formula `E_i = prod_{j != i} (A - theta_j I) / (theta_i - theta_j)`
//! in exact rational arithmetic, so the Krein parameters are exact rationals
//! and the nonzero tests in the Q-polynomial search are unambiguous.
//! Otherwise everything is assembled from Jacobi eigenprojectors over `f64`.

use crate::error::{Error, Result};
use crate::graphs::{Graph, IntersectionData};
use crate::scalar::{
    integer_spectrum, symmetric_eigendecomposition, Exact, IntegerSpectrum, Matrix, Scalar,
    SpanAccumulator, ToleranceContext,
};

#[derive(Debug, Clone)]
pub struct BoseMesnerData<S: Scalar> {
    /// Eigenvalues with `theta_0 = k` (the valency) first.
    pub eigenvalues: Vec<S>,
    pub idempotents: Vec<Matrix<S>>,
    /// `m_i = rank(E_i)`.
    pub multiplicities: Vec<usize>,
    /// Krein parameters indexed `krein[h][i][j]`.
    pub krein: Vec<Vec<Vec<S>>>,
    /// Every Q-polynomial ordering found, each a permutation of `0..=D`
    /// fixing index 0, sorted lexicographically.
    pub orderings: Vec<Vec<usize>>,
}

impl<S: Scalar> BoseMesnerData<S> {
    pub fn diameter(&self) -> usize {
        self.eigenvalues.len() - 1
    }

    /// The lexicographically smallest Q-polynomial ordering; the canonical
    /// choice used downstream unless overridden.
    pub fn canonical_ordering(&self) -> Option<&Vec<usize>> {
        self.orderings.first()
    }

    /// Copy with eigenvalues, idempotents, multiplicities, and the Krein
    /// table permuted by `ordering` (position i holds the data of
    /// `ordering[i]`). Index 0 must be fixed.
    pub fn reordered(&self, ordering: &[usize]) -> Result<Self> {
        let d = self.diameter();
        let mut seen = vec![false; d + 1];
        if ordering.len() != d + 1 || ordering.first() != Some(&0) {
            return Err(Error::InvalidParameter(format!(
                "ordering must be a permutation of 0..={d} fixing 0"
            )));
        }
        for &i in ordering {
            if i > d || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "ordering must be a permutation of 0..={d} fixing 0"
                )));
            }
            seen[i] = true;
        }
        let krein = (0..=d)
            .map(|h| {
                (0..=d)
                    .map(|i| {
                        (0..=d)
                            .map(|j| self.krein[ordering[h]][ordering[i]][ordering[j]].clone())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(BoseMesnerData {
            eigenvalues: ordering.iter().map(|&i| self.eigenvalues[i].clone()).collect(),
            idempotents: ordering.iter().map(|&i| self.idempotents[i].clone()).collect(),
            multiplicities: ordering.iter().map(|&i| self.multiplicities[i]).collect(),
            krein,
            orderings: Vec::new(),
        })
    }

    /// Hard nonzero predicate for Krein entries: exact `!= 0` in the rational
    /// domain, `|q| > 1e-8 * max|q|` in the float domain.
    pub fn krein_nonzero(&self, h: usize, i: usize, j: usize) -> bool {
        if S::EXACT {
            !self.krein[h][i][j].is_zero()
        } else {
            let max = self
                .krein
                .iter()
                .flatten()
                .flatten()
                .map(|q| q.abs_f64())
                .fold(0.0f64, f64::max)
                .max(1.0);
            self.krein[h][i][j].abs_f64() > 1e-8 * max
        }
    }
}

impl BoseMesnerData<Exact> {
    pub fn to_float(&self) -> BoseMesnerData<f64> {
        BoseMesnerData {
            eigenvalues: self.eigenvalues.iter().map(|x| x.to_f64()).collect(),
            idempotents: self.idempotents.iter().map(|m| m.to_float()).collect(),
            multiplicities: self.multiplicities.clone(),
            krein: self
                .krein
                .iter()
                .map(|a| {
                    a.iter()
                        .map(|b| b.iter().map(|x| x.to_f64()).collect())
                        .collect()
                })
                .collect(),
            orderings: self.orderings.clone(),
        }
    }
}

/// Exact construction; requires an integral adjacency spectrum. Callers probe
/// with [`has_integral_spectrum`] first and fall back to [`build_float`].
pub fn build_exact(g: &Graph, data: &IntersectionData) -> Result<BoseMesnerData<Exact>> {
    let a = g.adjacency_exact();
    let thetas = match integer_spectrum(&a)? {
        IntegerSpectrum::Integers(t) => t,
        IntegerSpectrum::NotAllInteger => {
            return Err(Error::InvalidParameter(
                "adjacency spectrum is not integral; use the float path".into(),
            ))
        }
    };
    let d = g.diameter;
    if thetas.len() != d + 1 {
        // a DRG adjacency matrix has exactly D+1 distinct eigenvalues
        return Err(Error::RepeatedEigenvalue);
    }
    if thetas[0] != data.k {
        return Err(Error::InvariantViolated {
            stage: "build_bose_mesner".into(),
            identity: "theta_0 = k (valency is the largest eigenvalue)".into(),
        });
    }
    let n = g.vertex_count();
    let eye = Matrix::<Exact>::identity(n);
    let mut idempotents = Vec::with_capacity(d + 1);
    for (i, &ti) in thetas.iter().enumerate() {
        let mut e = eye.clone();
        for (j, &tj) in thetas.iter().enumerate() {
            if i == j {
                continue;
            }
            let shifted = a.sub(&eye.scale(&Exact::from_int(tj)));
            e = e.mul(&shifted).scale(&Exact::from_int(ti - tj).recip());
        }
        idempotents.push(e);
    }
    let eigenvalues: Vec<Exact> = thetas.iter().map(|&t| Exact::from_int(t)).collect();
    let multiplicities = idempotents.iter().map(exact_rank).collect();
    let mut bm = BoseMesnerData {
        eigenvalues,
        idempotents,
        multiplicities,
        krein: Vec::new(),
        orderings: Vec::new(),
    };
    let ctx = ToleranceContext::default();
    verify_idempotent_axioms(&bm, &a, &ctx)?;
    bm.krein = krein_parameters(&bm, n, &ctx)?;
    bm.orderings = find_q_polynomial_orderings(&bm);
    Ok(bm)
}

/// Float construction from Jacobi eigenprojectors; used when the spectrum is
/// not integral.
pub fn build_float(
    g: &Graph,
    data: &IntersectionData,
    ctx: &ToleranceContext,
) -> Result<BoseMesnerData<f64>> {
    let a = g.adjacency_exact().to_float();
    let eig = symmetric_eigendecomposition(&a, ctx)?;
    let d = g.diameter;
    if eig.len() != d + 1 {
        return Err(Error::RepeatedEigenvalue);
    }
    let n = g.vertex_count();
    if (eig[0].0 - data.k as f64).abs() > ctx.cluster_width * data.k as f64 {
        return Err(Error::InvariantViolated {
            stage: "build_bose_mesner".into(),
            identity: "theta_0 = k (valency is the largest eigenvalue)".into(),
        });
    }
    let mut eigenvalues = Vec::with_capacity(d + 1);
    let mut idempotents = Vec::with_capacity(d + 1);
    let mut multiplicities = Vec::with_capacity(d + 1);
    for (theta, basis) in &eig {
        eigenvalues.push(*theta);
        let mut p = Matrix::<f64>::zeros(n, n);
        for v in basis.vectors() {
            for i in 0..n {
                if v[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let x = p.at(i, j) + v[i] * v[j];
                    p.set(i, j, x);
                }
            }
        }
        idempotents.push(p);
        multiplicities.push(basis.dim());
    }
    let mut bm = BoseMesnerData {
        eigenvalues,
        idempotents,
        multiplicities,
        krein: Vec::new(),
        orderings: Vec::new(),
    };
    verify_idempotent_axioms(&bm, &a, ctx)?;
    bm.krein = krein_parameters(&bm, n, ctx)?;
    bm.orderings = find_q_polynomial_orderings(&bm);
    Ok(bm)
}

pub fn has_integral_spectrum(g: &Graph) -> Result<bool> {
    Ok(matches!(
        integer_spectrum(&g.adjacency_exact())?,
        IntegerSpectrum::Integers(_)
    ))
}

fn exact_rank(m: &Matrix<Exact>) -> usize {
    let ctx = ToleranceContext::default();
    let mut acc = SpanAccumulator::<Exact>::new(m.cols(), &ctx);
    let mut rank = 0;
    for i in 0..m.rows() {
        if acc.insert(m.row(i)) {
            rank += 1;
        }
    }
    rank
}

/// The defining identities: sum E_i = I, E_i E_j = delta E_i, A = sum theta E,
/// E_0 = J/|X|, A E_i = theta_i E_i, and sum m_i = |X|.
fn verify_idempotent_axioms<S: Scalar>(
    bm: &BoseMesnerData<S>,
    a: &Matrix<S>,
    ctx: &ToleranceContext,
) -> Result<()> {
    let n = a.rows();
    let scale = n as f64;
    let bound = if S::EXACT { 0.0 } else { ctx.residual_bound * scale };
    let fail = |identity: &str, residual: f64| {
        Err(Error::InvariantViolated {
            stage: "build_bose_mesner".into(),
            identity: format!("{identity} (residual {residual:.3e})"),
        })
    };
    let mut sum = Matrix::<S>::zeros(n, n);
    let mut recon = Matrix::<S>::zeros(n, n);
    for (e, theta) in bm.idempotents.iter().zip(bm.eigenvalues.iter()) {
        sum = sum.add(e);
        recon = recon.add(&e.scale(theta));
    }
    let r = sum.residual(&Matrix::identity(n));
    if r > bound {
        return fail("sum(E_i) = I", r);
    }
    let r = recon.residual(a);
    if r > bound {
        return fail("A = sum(theta_i E_i)", r);
    }
    let e0_expect = Matrix::<S>::all_ones(n).scale(&scalar_inv_int::<S>(n as i64));
    let r = bm.idempotents[0].residual(&e0_expect);
    if r > bound {
        return fail("E_0 = J / |X|", r);
    }
    for (i, ei) in bm.idempotents.iter().enumerate() {
        let ae = a.mul(ei);
        let r = ae.residual(&ei.scale(&bm.eigenvalues[i]));
        if r > bound {
            return fail("A E_i = theta_i E_i", r);
        }
        let r = ae.residual(&ei.mul(a));
        if r > bound {
            return fail("A E_i = E_i A", r);
        }
        for (j, ej) in bm.idempotents.iter().enumerate() {
            let prod = ei.mul(ej);
            let expect = if i == j {
                ei.clone()
            } else {
                Matrix::zeros(n, n)
            };
            let r = prod.residual(&expect);
            if r > bound {
                return fail("E_i E_j = delta_ij E_i", r);
            }
        }
    }
    if bm.multiplicities.iter().sum::<usize>() != n {
        return fail("sum(m_i) = |X|", f64::NAN);
    }
    Ok(())
}

fn scalar_inv_int<S: Scalar>(v: i64) -> S {
    S::from_i128_ratio(1, v as i128)
}

/// Solve `|X| (E_i o E_j) = sum_h q^h_{i,j} E_h` for the Krein table using
/// trace-form coefficients `q^h = |X| tr(E_h (E_i o E_j)) / m_h`, then verify
/// the expansion residual and the reality/nonnegativity/symmetry properties.
pub fn krein_parameters<S: Scalar>(
    bm: &BoseMesnerData<S>,
    n: usize,
    ctx: &ToleranceContext,
) -> Result<Vec<Vec<Vec<S>>>> {
    let d = bm.diameter();
    let nn = S::from_int(n as i64);
    let bound = if S::EXACT {
        0.0
    } else {
        ctx.residual_bound * n as f64
    };
    let mut table = vec![vec![vec![S::zero(); d + 1]; d + 1]; d + 1];
    for i in 0..=d {
        for j in i..=d {
            let schur = bm.idempotents[i].schur(&bm.idempotents[j]);
            let target = schur.scale(&nn);
            let mut recon = Matrix::<S>::zeros(n, n);
            for h in 0..=d {
                let mut q = bm.idempotents[h].trace_dot(&schur);
                q *= &nn;
                q /= &S::from_int(bm.multiplicities[h] as i64);
                recon = recon.add(&bm.idempotents[h].scale(&q));
                table[h][i][j] = q.clone();
                table[h][j][i] = q;
            }
            let residual = recon.residual(&target);
            if residual > bound {
                return Err(Error::ResidualExceeded {
                    what: format!("Krein expansion of |X| E_{i} o E_{j}"),
                    residual,
                    bound,
                });
            }
        }
    }
    // nonnegativity within tolerance
    let floor = if S::EXACT { 0.0 } else { -ctx.residual_bound * n as f64 };
    for (h, th) in table.iter().enumerate() {
        for (i, ti) in th.iter().enumerate() {
            for (j, q) in ti.iter().enumerate() {
                if q.to_f64() < floor {
                    return Err(Error::InvariantViolated {
                        stage: "krein_parameters".into(),
                        identity: format!(
                            "q^{h}_{{{i},{j}}} = {} is negative",
                            q.to_f64()
                        ),
                    });
                }
            }
        }
    }
    Ok(table)
}

/// Both Q-polynomial support conditions for a reindexed Krein table, checked
/// exhaustively over all triples `(h, i, j)`.
fn ordering_is_q_polynomial<S: Scalar>(bm: &BoseMesnerData<S>, ordering: &[usize]) -> bool {
    let d = bm.diameter();
    for h in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                let nonzero = bm.krein_nonzero(ordering[h], ordering[i], ordering[j]);
                if h > i + j || i > h + j || j > h + i {
                    if nonzero {
                        return false;
                    }
                } else if (h == i + j || i == h + j || j == h + i) && !nonzero {
                    return false;
                }
            }
        }
    }
    true
}

/// Search for Q-polynomial orderings: for each candidate `e != 0` in position
/// 1, grow the ordering greedily (position j+1 is the unique unused h with
/// `q^h_{e, sigma(j)} != 0` besides sigma(j-1) and sigma(j)) and then verify
/// both support conditions exhaustively. Returns every ordering that passes,
/// sorted lexicographically; empty means not Q-polynomial.
pub fn find_q_polynomial_orderings<S: Scalar>(bm: &BoseMesnerData<S>) -> Vec<Vec<usize>> {
    let d = bm.diameter();
    let mut found = Vec::new();
    'candidates: for e in 1..=d {
        let mut ordering = vec![0usize, e];
        let mut used = vec![false; d + 1];
        used[0] = true;
        used[e] = true;
        while ordering.len() <= d {
            let prev = ordering[ordering.len() - 1];
            let mut next = None;
            for h in 0..=d {
                if used[h] || !bm.krein_nonzero(h, e, prev) {
                    continue;
                }
                if next.is_some() {
                    continue 'candidates; // not unique: greedy growth fails
                }
                next = Some(h);
            }
            match next {
                Some(h) => {
                    used[h] = true;
                    ordering.push(h);
                }
                None => continue 'candidates,
            }
        }
        if ordering_is_q_polynomial(bm, &ordering) {
            found.push(ordering);
        }
    }
    found.sort();
    found
}

/// Independent Krein oracle used by tests: the coefficient as a direct
/// entrywise triple sum, `q^h_{i,j} = |X| / m_h * sum_{y,z} (E_h)_{zy}
/// (E_i)_{yz} (E_j)_{yz}`.
pub fn krein_entry_oracle<S: Scalar>(
    idempotents: &[Matrix<S>],
    multiplicities: &[usize],
    n: usize,
    h: usize,
    i: usize,
    j: usize,
) -> S {
    let mut sum = S::zero();
    for y in 0..n {
        for z in 0..n {
            let mut t = idempotents[h].at(z, y).clone();
            t *= idempotents[i].at(y, z);
            t *= idempotents[j].at(y, z);
            sum += &t;
        }
    }
    sum *= &S::from_int(n as i64);
    sum /= &S::from_int(multiplicities[h] as i64);
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_graph, certify_distance_regular, DrgCertificate};
    use num::Zero;

    fn setup(spec: &str) -> (Graph, IntersectionData) {
        let g = build_graph(&spec.parse().unwrap()).unwrap();
        match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => (g, d),
            _ => panic!("{spec} expected to be a DRG"),
        }
    }

    #[test]
    fn hamming_3_3_exact_build() {
        let (g, data) = setup("hamming:3,3");
        let bm = build_exact(&g, &data).unwrap();
        // exact minimal-polynomial oracle puts the spectrum at {6, 3, 0, -3}
        let thetas: Vec<i64> = bm
            .eigenvalues
            .iter()
            .map(|t| t.to_f64().round() as i64)
            .collect();
        assert_eq!(thetas, vec![6, 3, 0, -3]);
        assert_eq!(bm.multiplicities.iter().sum::<usize>(), 27);
        assert_eq!(bm.multiplicities, vec![1, 6, 12, 8]);
        // E_0 entries all equal 1/27
        let inv = Exact::from_i128_ratio(1, 27);
        for y in 0..27 {
            for z in 0..27 {
                assert_eq!(bm.idempotents[0].at(y, z), &inv);
            }
        }
        assert!(!bm.orderings.is_empty(), "hamming should be Q-polynomial");
    }

    #[test]
    fn johnson_6_3_spectrum_and_krein() {
        let (g, data) = setup("johnson:6,3");
        // brute-force valency oracle + exact spectrum oracle
        assert_eq!(data.k, 9);
        let spec = integer_spectrum(&g.adjacency_exact()).unwrap();
        let IntegerSpectrum::Integers(thetas) = spec else {
            panic!("johnson:6,3 has integral spectrum")
        };
        assert_eq!(thetas.len(), 4);
        assert_eq!(thetas[0], 9);
        let bm = build_exact(&g, &data).unwrap();
        // Krein parameters real and nonnegative
        for h in 0..=3 {
            for i in 0..=3 {
                for j in 0..=3 {
                    assert!(bm.krein[h][i][j].to_f64() >= 0.0);
                }
            }
        }
    }

    #[test]
    fn krein_q0_identities() {
        let (g, data) = setup("hamming:3,3");
        let bm = build_exact(&g, &data).unwrap();
        let n = g.vertex_count();
        for i in 0..=3 {
            for j in 0..=3 {
                // q^0_{i,j} = delta_ij m_i, cross-checked with the
                // independent entrywise-sum oracle
                let expect = if i == j {
                    Exact::from_int(bm.multiplicities[i] as i64)
                } else {
                    Exact::zero()
                };
                assert_eq!(bm.krein[0][i][j], expect);
                let oracle =
                    krein_entry_oracle(&bm.idempotents, &bm.multiplicities, n, 0, i, j);
                assert_eq!(oracle, expect);
                // q^h_{i,0} = delta_hi: E_0 o E_i = |X|^{-1} E_i
                for h in 0..=3 {
                    let expect = if h == i {
                        Exact::from_int(1)
                    } else {
                        Exact::zero()
                    };
                    assert_eq!(bm.krein[h][i][0], expect);
                }
            }
        }
    }

    #[test]
    fn cycle_8_float_build() {
        let (g, data) = setup("cycle:8");
        let ctx = ToleranceContext::default();
        assert!(!has_integral_spectrum(&g).unwrap());
        let bm = build_float(&g, &data, &ctx).unwrap();
        assert_eq!(bm.multiplicities, vec![1, 2, 2, 2, 1]);
        assert!(
            !bm.orderings.is_empty(),
            "cycles are Q-polynomial distance-regular graphs"
        );
        // exhaustive re-verification of both support conditions for each
        // returned ordering over all 5^3 triples
        for ord in &bm.orderings {
            assert!(ordering_is_q_polynomial(&bm, ord));
        }
    }

    #[test]
    fn cycle_6_exact_build() {
        let (g, data) = setup("cycle:6");
        let bm = build_exact(&g, &data).unwrap();
        let thetas: Vec<i64> = bm
            .eigenvalues
            .iter()
            .map(|t| t.to_f64().round() as i64)
            .collect();
        assert_eq!(thetas, vec![2, 1, -1, -2]);
        assert_eq!(bm.multiplicities, vec![1, 2, 2, 1]);
    }

    #[test]
    fn synthetic_zero_krein_rejects_candidate() {
        // a Krein table with q^2_{1,1} = 0 and D >= 2 rejects position-1
        // candidate 1 (condition (ii) with h = i + j)
        let (g, data) = setup("hamming:2,3");
        let mut bm = build_exact(&g, &data).unwrap();
        assert!(bm.orderings.iter().any(|o| o[1] == 1));
        bm.krein[2][1][1] = Exact::zero();
        let orderings = find_q_polynomial_orderings(&bm);
        assert!(orderings.iter().all(|o| o[1] != 1));
    }

    #[test]
    fn idempotent_and_distance_bases_have_equal_span() {
        let (g, data) = setup("johnson:5,2");
        let bm = build_exact(&g, &data).unwrap();
        let mats = crate::graphs::distance_matrices(&g);
        let ctx = ToleranceContext::default();
        let mut all: Vec<Matrix<Exact>> = bm.idempotents.clone();
        all.extend(mats.iter().cloned());
        let basis = crate::scalar::gram_trace_basis(&all, &ctx).unwrap();
        assert_eq!(basis.len(), g.diameter + 1);
    }

    #[test]
    fn float_eigendecomposition_matches_exact_spectrum_oracle() {
        // the exact minimal-polynomial factorization pins the spectrum; the
        // float path must cluster to the same eigenvalues and multiplicities
        let (g, _) = setup("hamming:3,3");
        let a = g.adjacency_exact();
        let IntegerSpectrum::Integers(thetas) = integer_spectrum(&a).unwrap() else {
            panic!("hamming:3,3 spectrum is integral")
        };
        let ctx = ToleranceContext::default();
        let eig = symmetric_eigendecomposition(&a.to_float(), &ctx).unwrap();
        assert_eq!(eig.len(), 4);
        let total: usize = eig.iter().map(|(_, b)| b.dim()).sum();
        assert_eq!(total, 27);
        for ((value, _), theta) in eig.iter().zip(thetas.iter()) {
            assert!((value - *theta as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn projecting_the_full_space_with_e0_gives_the_all_ones_line() {
        let (g, data) = setup("johnson:5,2");
        let bm = build_exact(&g, &data).unwrap();
        let ctx = ToleranceContext::default();
        let n = g.vertex_count();
        let full = crate::scalar::SubspaceBasis::<Exact>::full(n);
        let image = full.project(&bm.idempotents[0], &ctx).unwrap();
        assert_eq!(image.dim(), 1);
        // the image is the span of the all-ones vector
        let v = &image.vectors()[0];
        assert!(v.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn reordered_data_is_consistent() {
        let (g, data) = setup("hamming:3,3");
        let bm = build_exact(&g, &data).unwrap();
        let ord = bm.canonical_ordering().unwrap().clone();
        let r = bm.reordered(&ord).unwrap();
        assert_eq!(r.eigenvalues[0], bm.eigenvalues[0]);
        for h in 0..=3 {
            for i in 0..=3 {
                for j in 0..=3 {
                    assert_eq!(
                        r.krein[h][i][j],
                        bm.krein[ord[h]][ord[i]][ord[j]]
                    );
                }
            }
        }
        assert!(bm.reordered(&[1, 0, 2, 3]).is_err());
        assert!(bm.reordered(&[0, 1, 1, 3]).is_err());
    }
}
