//! The dual (pointed) Bose-Mesner algebra at a base vertex: dual primitive
//! idempotents, dual distance matrices, dual eigenvalues, and the
//! triple-product vanishing report.
//!
//! Everything here is indexed by a Q-polynomial ordering of the primitive
//! idempotents: callers pass `BoseMesnerData` that has already been
//! reordered, so `idempotents[1]` is the `E_1` of the chosen ordering.

use crate::bose_mesner::BoseMesnerData;
use crate::error::{Error, Result};
use crate::graphs::{Graph, IntersectionData};
use crate::scalar::{Matrix, Scalar, ToleranceContext};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct DualData<S: Scalar> {
    pub base: usize,
    /// Diagonal 0/1 indicator of the distance-i sphere around the base.
    pub e_star: Vec<Matrix<S>>,
    /// Dual distance matrices: `(A*_i)_{yy} = |X| (E_i)_{x,y}`.
    pub a_star: Vec<Matrix<S>>,
    /// `theta*_i`: the diagonal value of `A* = A*_1` on the i-th sphere.
    pub dual_eigenvalues: Vec<S>,
}

impl<S: Scalar> DualData<S> {
    pub fn adjacency_dual(&self) -> &Matrix<S> {
        &self.a_star[1]
    }
}

impl DualData<crate::scalar::Exact> {
    pub fn to_float(&self) -> DualData<f64> {
        DualData {
            base: self.base,
            e_star: self.e_star.iter().map(|m| m.to_float()).collect(),
            a_star: self.a_star.iter().map(|m| m.to_float()).collect(),
            dual_eigenvalues: self.dual_eigenvalues.iter().map(|x| x.to_f64()).collect(),
        }
    }
}

/// Build and fully verify the dual data at base vertex `x`. The Bose-Mesner
/// data must already carry the chosen Q-polynomial ordering.
pub fn build_dual<S: Scalar>(
    g: &Graph,
    bm: &BoseMesnerData<S>,
    data: &IntersectionData,
    x: usize,
    ctx: &ToleranceContext,
) -> Result<DualData<S>> {
    let n = g.vertex_count();
    if x >= n {
        return Err(Error::InvalidParameter(format!(
            "base vertex {x} out of range (|X| = {n})"
        )));
    }
    let d = g.diameter;
    let e_star: Vec<Matrix<S>> = (0..=d)
        .map(|i| {
            Matrix::from_fn(n, n, |y, z| {
                if y == z && g.dist[x][y] == i {
                    S::from_int(1)
                } else {
                    S::zero()
                }
            })
        })
        .collect();
    let nn = S::from_int(n as i64);
    let a_star: Vec<Matrix<S>> = (0..=d)
        .map(|i| {
            Matrix::from_fn(n, n, |y, z| {
                if y == z {
                    let mut v = bm.idempotents[i].at(x, y).clone();
                    v *= &nn;
                    v
                } else {
                    S::zero()
                }
            })
        })
        .collect();
    // theta*_i read off the diagonal of A* on the i-th sphere, with the
    // constancy of that diagonal verified below
    let bound = if S::EXACT {
        0.0
    } else {
        ctx.residual_bound * a_star[1].max_abs().max(1.0)
    };
    let mut dual_eigenvalues = Vec::with_capacity(d + 1);
    for i in 0..=d {
        let sphere = g.sphere(x, i);
        let first = sphere[0];
        let theta = a_star[1].at(first, first).clone();
        for &y in &sphere {
            let mut diff = a_star[1].at(y, y).clone();
            diff -= &theta;
            if diff.abs_f64() > bound {
                return Err(Error::InvariantViolated {
                    stage: "build_dual".into(),
                    identity: format!("A* is not constant on the sphere at distance {i}"),
                });
            }
        }
        dual_eigenvalues.push(theta);
    }
    let dual = DualData {
        base: x,
        e_star,
        a_star,
        dual_eigenvalues,
    };
    verify_dual_axioms(g, bm, data, &dual, ctx)?;
    Ok(dual)
}

fn verify_dual_axioms<S: Scalar>(
    g: &Graph,
    bm: &BoseMesnerData<S>,
    data: &IntersectionData,
    dual: &DualData<S>,
    ctx: &ToleranceContext,
) -> Result<()> {
    let n = g.vertex_count();
    let d = g.diameter;
    let scale = dual.a_star[1].max_abs().max(n as f64);
    let bound = if S::EXACT { 0.0 } else { ctx.residual_bound * scale };
    let fail = |identity: String, residual: f64| {
        Err(Error::InvariantViolated {
            stage: "build_dual".into(),
            identity: format!("{identity} (residual {residual:.3e})"),
        })
    };

    // sum E*_i = I and E*_i E*_j = delta E*_i (diagonal 0/1, so exact even
    // in the float domain)
    let mut sum = Matrix::<S>::zeros(n, n);
    for e in &dual.e_star {
        sum = sum.add(e);
    }
    let r = sum.residual(&Matrix::identity(n));
    if r > 0.0 {
        return fail("sum(E*_i) = I".into(), r);
    }
    for (i, ei) in dual.e_star.iter().enumerate() {
        for (j, ej) in dual.e_star.iter().enumerate() {
            let expect = if i == j {
                ei.clone()
            } else {
                Matrix::zeros(n, n)
            };
            let r = ei.mul(ej).residual(&expect);
            if r > 0.0 {
                return fail("E*_i E*_j = delta_ij E*_i".into(), r);
            }
        }
    }
    // dim E*_i V = k_i
    for (i, &ki) in data.k_i.iter().enumerate() {
        let rank = g.sphere(dual.base, i).len() as i64;
        if rank != ki {
            return fail(format!("dim(E*_{i} V) = k_{i}"), f64::NAN);
        }
    }
    // A*_0 = I
    let r = dual.a_star[0].residual(&Matrix::identity(n));
    if r > bound {
        return fail("A*_0 = I".into(), r);
    }
    // sum A*_i = |X| E*_0
    let mut sum = Matrix::<S>::zeros(n, n);
    for a in &dual.a_star {
        sum = sum.add(a);
    }
    let r = sum.residual(&dual.e_star[0].scale(&S::from_int(n as i64)));
    if r > bound {
        return fail("sum(A*_i) = |X| E*_0".into(), r);
    }
    // A*_i A*_j = sum_h q^h_{i,j} A*_h
    for i in 0..=d {
        for j in 0..=d {
            let prod = dual.a_star[i].mul(&dual.a_star[j]);
            let mut expect = Matrix::<S>::zeros(n, n);
            for h in 0..=d {
                expect = expect.add(&dual.a_star[h].scale(&bm.krein[h][i][j]));
            }
            let r = prod.residual(&expect);
            if r > bound {
                return fail(format!("A*_{i} A*_{j} = sum_h q^h A*_h"), r);
            }
        }
    }
    // A* = sum theta*_i E*_i and A* E*_i = E*_i A* = theta*_i E*_i
    let mut recon = Matrix::<S>::zeros(n, n);
    for (theta, e) in dual.dual_eigenvalues.iter().zip(dual.e_star.iter()) {
        recon = recon.add(&e.scale(theta));
    }
    let r = recon.residual(&dual.a_star[1]);
    if r > bound {
        return fail("A* = sum(theta*_i E*_i)".into(), r);
    }
    for (i, e) in dual.e_star.iter().enumerate() {
        let lhs = dual.a_star[1].mul(e);
        let r = lhs.residual(&e.scale(&dual.dual_eigenvalues[i]));
        if r > bound {
            return fail("A* E*_i = theta*_i E*_i".into(), r);
        }
        let r = lhs.residual(&e.mul(&dual.a_star[1]));
        if r > bound {
            return fail("A* E*_i = E*_i A*".into(), r);
        }
    }
    // theta*_i real and mutually distinct
    let sep = if S::EXACT {
        0.0
    } else {
        ctx.cluster_width * scale
    };
    for i in 0..=d {
        for j in (i + 1)..=d {
            let mut diff = dual.dual_eigenvalues[i].clone();
            diff -= &dual.dual_eigenvalues[j];
            if diff.abs_f64() <= sep {
                return fail(
                    format!("theta*_{i} and theta*_{j} are not distinct"),
                    diff.abs_f64(),
                );
            }
        }
    }
    // E*_0 V is spanned by the base-vertex indicator
    if g.sphere(dual.base, 0) != vec![dual.base] {
        return fail("E*_0 V = F x_hat".into(), f64::NAN);
    }
    Ok(())
}

/// One violated triple product: the matrix was zero but the parameter was
/// not, or vice versa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleViolation {
    pub kind: String,
    pub h: usize,
    pub i: usize,
    pub j: usize,
    pub matrix_norm: f64,
    pub parameter: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TripleProductReport {
    pub checked: usize,
    pub violations: Vec<TripleViolation>,
}

impl TripleProductReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check both triple-product biconditionals over every `(h, i, j)`:
/// `E*_i A_h E*_j = 0  iff  p^h_{i,j} = 0` and
/// `E_i A*_h E_j = 0   iff  q^h_{i,j} = 0`,
/// plus the specializations `E*_i A E*_j = 0` and `E_i A* E_j = 0` for
/// `|i - j| > 1`, and `E*_i A_h E*_i = 0` / `E_i A*_h E_i = 0` for `h > 2i`.
pub fn verify_triple_products<S: Scalar>(
    g: &Graph,
    bm: &BoseMesnerData<S>,
    dual: &DualData<S>,
    data: &IntersectionData,
    distance_mats: &[Matrix<S>],
    ctx: &ToleranceContext,
) -> TripleProductReport {
    let d = g.diameter;
    let scale = dual.a_star[1].max_abs().max(1.0);
    let zero_bound = if S::EXACT { 0.0 } else { ctx.residual_bound * scale };
    let mut report = TripleProductReport::default();
    let mut push = |kind: &str, h: usize, i: usize, j: usize, norm: f64, param: f64| {
        report.violations.push(TripleViolation {
            kind: kind.into(),
            h,
            i,
            j,
            matrix_norm: norm,
            parameter: param,
        });
    };
    for h in 0..=d {
        for i in 0..=d {
            for j in 0..=d {
                // E*_i A_h E*_j: mask rows to sphere i, columns to sphere j
                let masked = dual.e_star[i].mul(&distance_mats[h]).mul(&dual.e_star[j]);
                let norm = masked.max_abs();
                let vanishes = norm <= zero_bound;
                let p_zero = data.p[h][i][j] == 0;
                report.checked += 1;
                if vanishes != p_zero {
                    push("E*_i A_h E*_j vs p^h_{i,j}", h, i, j, norm, data.p[h][i][j] as f64);
                }
                if h == 1 && i.abs_diff(j) > 1 && !vanishes {
                    push("E*_i A E*_j = 0 for |i-j| > 1", h, i, j, norm, 0.0);
                }
                if i == j && h > 2 * i && !vanishes {
                    push("E*_i A_h E*_i = 0 for h > 2i", h, i, j, norm, 0.0);
                }

                // E_i A*_h E_j against the (reordered) Krein parameter
                let masked = bm.idempotents[i].mul(&dual.a_star[h]).mul(&bm.idempotents[j]);
                let norm = masked.max_abs();
                let vanishes = norm <= zero_bound;
                let q_zero = !bm.krein_nonzero(h, i, j);
                report.checked += 1;
                if vanishes != q_zero {
                    push(
                        "E_i A*_h E_j vs q^h_{i,j}",
                        h,
                        i,
                        j,
                        norm,
                        bm.krein[h][i][j].to_f64(),
                    );
                }
                if h == 1 && i.abs_diff(j) > 1 && !vanishes {
                    push("E_i A* E_j = 0 for |i-j| > 1", h, i, j, norm, 0.0);
                }
                if i == j && h > 2 * i && !vanishes {
                    push("E_i A*_h E_i = 0 for h > 2i", h, i, j, norm, 0.0);
                }
            }
        }
    }
    report
}
