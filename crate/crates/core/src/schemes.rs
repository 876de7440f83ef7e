//! Association-scheme detection on subconstituents: restrict a corner
//! algebra to its cell, partition the cell pairs by entry fingerprints, and
//! decide whether the 0/1 indicators of the parts form a basis — i.e.
//! whether the corner is the Bose-Mesner algebra of a symmetric association
//! scheme on the cell.

use crate::error::{Error, Result};
use crate::graphs::{build_graph, certify_distance_regular, DrgCertificate, GraphSpec};
use crate::scalar::{Matrix, Scalar, SpanAccumulator, ToleranceContext};
use crate::talg::CornerAlgebra;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A corner algebra compressed to its cell: `cell x cell` matrices with the
/// restricted projector as the unit.
#[derive(Debug, Clone)]
pub struct RestrictedAlgebra<S: Scalar> {
    pub cell: Vec<usize>,
    pub basis: Vec<Matrix<S>>,
}

/// Compress each basis matrix of the corner to the rows and columns of
/// `cell`. The corner's projector must be the 0/1 diagonal indicator of the
/// cell (so the compressed unit is the identity on the cell).
pub fn restrict_corner<S: Scalar>(
    corner: &CornerAlgebra<S>,
    cell: &[usize],
) -> Result<RestrictedAlgebra<S>> {
    let p = &corner.projector;
    let n = p.rows();
    for y in 0..n {
        for z in 0..n {
            let expected = if y == z && cell.contains(&y) {
                S::from_int(1)
            } else {
                S::zero()
            };
            if p.at(y, z) != &expected {
                return Err(Error::InvalidParameter(
                    "cell does not match the corner projector".into(),
                ));
            }
        }
    }
    let m = cell.len();
    let basis = corner
        .algebra
        .basis()
        .iter()
        .map(|b| Matrix::from_fn(m, m, |i, j| b.at(cell[i], cell[j]).clone()))
        .collect();
    Ok(RestrictedAlgebra {
        cell: cell.to_vec(),
        basis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeVerdict {
    pub is_scheme: bool,
    /// Total number of relations including the identity (the dimension of
    /// the detected Bose-Mesner algebra).
    pub class_count: usize,
    pub relation_sizes: Vec<usize>,
    /// `p[h][i][j]`: structure constants of the detected relations.
    pub p_numbers: Vec<Vec<Vec<i64>>>,
    /// Which detection condition failed, when `is_scheme` is false.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DetectedScheme<S: Scalar> {
    pub verdict: SchemeVerdict,
    /// 0/1 relation indicators, `R_0` = identity first.
    pub relations: Vec<Matrix<S>>,
}

/// Partition the cell pairs by their entry fingerprint across the basis and
/// test whether the part indicators (a) lie in the span of the basis and
/// (b) span it, with (c) the diagonal forming its own part. On success the
/// algebra is entrywise-closed with a 0/1 basis — the Bose-Mesner algebra of
/// a symmetric association scheme — and the structure constants are read off
/// the products `R_i R_j`.
pub fn detect_scheme<S: Scalar>(
    ra: &RestrictedAlgebra<S>,
    ctx: &ToleranceContext,
) -> Result<DetectedScheme<S>> {
    let m = ra.cell.len();
    if m == 0 || ra.basis.is_empty() {
        return Err(Error::InvalidParameter(
            "detect_scheme: empty cell or basis".into(),
        ));
    }
    let fingerprint = |i: usize, j: usize| -> Vec<String> {
        ra.basis
            .iter()
            .map(|b| {
                let x = b.at(i, j);
                if S::EXACT {
                    exact_key(x)
                } else {
                    // quantize to 9 decimal places
                    format!("{}", (x.to_f64() * 1e9).round() as i64)
                }
            })
            .collect()
    };
    let mut parts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let mut part_of = vec![0usize; m * m];
    let mut order: Vec<Vec<(usize, usize)>> = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let key = fingerprint(i, j);
            let next = parts.len();
            let id = *parts.entry(key).or_insert(next);
            if id == order.len() {
                order.push(Vec::new());
            }
            part_of[i * m + j] = id;
            order[id].push((i, j));
        }
    }
    let fail = |failure: &str| {
        Ok(DetectedScheme {
            verdict: SchemeVerdict {
                is_scheme: false,
                class_count: 0,
                relation_sizes: Vec::new(),
                p_numbers: Vec::new(),
                failure: Some(failure.into()),
            },
            relations: Vec::new(),
        })
    };
    // (c) the diagonal must be exactly one part
    let diag_part = part_of[0];
    for i in 0..m {
        if part_of[i * m + i] != diag_part {
            return fail("diagonal pairs split across parts");
        }
    }
    if order[diag_part].len() != m {
        return fail("identity part contains off-diagonal pairs");
    }
    // relations with the identity part first, the rest in first-seen order
    let mut part_ids: Vec<usize> = (0..order.len()).collect();
    part_ids.retain(|&p| p != diag_part);
    part_ids.insert(0, diag_part);
    let relations: Vec<Matrix<S>> = part_ids
        .iter()
        .map(|&pid| {
            let mut r = Matrix::<S>::zeros(m, m);
            for &(i, j) in &order[pid] {
                r.set(i, j, S::from_int(1));
            }
            r
        })
        .collect();
    // symmetry of each relation
    let sym_bound = if S::EXACT { 0.0 } else { ctx.rank_threshold };
    for r in &relations {
        if r.symmetry_defect() > sym_bound {
            return fail("a relation is not symmetric");
        }
    }
    // (a) each indicator lies in the span of the basis
    let mut span = SpanAccumulator::new(m * m, ctx);
    for b in &ra.basis {
        span.insert(b.vectorized());
    }
    let basis_dim = span.rank();
    for r in &relations {
        if !span.contains(r.vectorized()) {
            return fail("a relation indicator falls outside the algebra span");
        }
    }
    // (b) the indicators span the algebra: disjoint supports make them
    // independent, so matching counts suffice given (a)
    if relations.len() != basis_dim {
        return fail("part count differs from the algebra dimension");
    }
    // structure constants from R_i R_j = sum_h p^h R_h; entries must be
    // constant over each part and the coefficients nonnegative integers
    let count = relations.len();
    let mut p_numbers = vec![vec![vec![0i64; count]; count]; count];
    let tol: f64 = if S::EXACT { 0.0 } else { 1e-6 };
    for i in 0..count {
        for j in 0..count {
            let prod = relations[i].mul(&relations[j]);
            for (h, rel) in relations.iter().enumerate() {
                let mut value: Option<f64> = None;
                for y in 0..m {
                    for z in 0..m {
                        if rel.at(y, z).is_zero() {
                            continue;
                        }
                        let v = prod.at(y, z).to_f64();
                        match value {
                            None => value = Some(v),
                            Some(prev) if (prev - v).abs() > tol.max(1e-9) => {
                                return fail("product entries not constant on a part");
                            }
                            _ => {}
                        }
                    }
                }
                let v = value.unwrap_or(0.0);
                let rounded = v.round();
                if (v - rounded).abs() > tol.max(1e-9) || rounded < 0.0 {
                    return fail("a structure constant is not a nonnegative integer");
                }
                p_numbers[h][i][j] = rounded as i64;
            }
        }
    }
    let relation_sizes = part_ids.iter().map(|&pid| order[pid].len()).collect();
    Ok(DetectedScheme {
        verdict: SchemeVerdict {
            is_scheme: true,
            class_count: count,
            relation_sizes,
            p_numbers,
            failure: None,
        },
        relations,
    })
}

fn exact_key<S: Scalar>(x: &S) -> String {
    // S = Exact here; recover the canonical p/q form via the ratio pair
    // when it fits, falling back to the display form
    match x.as_i64_ratio() {
        Some((p, q)) => format!("{p}/{q}"),
        None => format!("{x}"),
    }
}

/// Parameter-level match of a detected scheme against a named graph's
/// distance scheme: equal class count and identical structure-constant
/// tensors up to a relation relabeling (identity fixed).
pub fn match_named_scheme(verdict: &SchemeVerdict, expected: &GraphSpec) -> Result<bool> {
    if !verdict.is_scheme {
        return Ok(false);
    }
    let g = build_graph(expected)?;
    let expected_p = match certify_distance_regular(&g)? {
        DrgCertificate::DistanceRegular(data) => data.p,
        DrgCertificate::NotDistanceRegular(_) => {
            return Err(Error::InvalidParameter(format!(
                "expected graph {expected} is not distance-regular"
            )))
        }
    };
    if expected_p.len() != verdict.class_count {
        return Ok(false);
    }
    let m = verdict.class_count - 1;
    // try all relabelings of 1..=m
    let mut perm: Vec<usize> = (1..=m).collect();
    let mut found = false;
    permute(&mut perm, 0, &mut |p| {
        if found {
            return;
        }
        let full: Vec<usize> = std::iter::once(0).chain(p.iter().copied()).collect();
        let ok = (0..=m).all(|h| {
            (0..=m).all(|i| {
                (0..=m).all(|j| {
                    verdict.p_numbers[full[h]][full[i]][full[j]] == expected_p[h][i][j]
                })
            })
        });
        if ok {
            found = true;
        }
    });
    Ok(found)
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bose_mesner::{build_exact, build_float};
    use crate::dual::build_dual;
    use crate::graphs::distance_matrices;
    use crate::scalar::Exact;
    use crate::talg::{corner, generate_algebra, terwilliger_seeds, DEFAULT_BASIS_CAP};

    fn first_subconstituent_exact(spec: &str) -> (DetectedScheme<Exact>, usize) {
        let g = build_graph(&spec.parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let bm = build_exact(&g, &data).unwrap();
        let ord = bm.canonical_ordering().unwrap().clone();
        let bm = bm.reordered(&ord).unwrap();
        let ctx = ToleranceContext::default();
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let distance = distance_matrices(&g);
        let t = generate_algebra(&terwilliger_seeds(&distance, &dual), &ctx, DEFAULT_BASIS_CAP)
            .unwrap();
        let c = corner(&t, &dual.e_star[1], &ctx).unwrap();
        let cell = g.sphere(0, 1);
        let ra = restrict_corner(&c, &cell).unwrap();
        assert!(
            crate::talg::MatrixAlgebra::from_basis_unchecked(ra.basis.clone(), &ctx)
                .is_commutative()
        );
        let det = detect_scheme(&ra, &ctx).unwrap();
        (det, cell.len())
    }

    fn last_subconstituent_exact(spec: &str) -> DetectedScheme<Exact> {
        let g = build_graph(&spec.parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let bm = build_exact(&g, &data).unwrap();
        let ord = bm.canonical_ordering().unwrap().clone();
        let bm = bm.reordered(&ord).unwrap();
        let ctx = ToleranceContext::default();
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let distance = distance_matrices(&g);
        let t = generate_algebra(&terwilliger_seeds(&distance, &dual), &ctx, DEFAULT_BASIS_CAP)
            .unwrap();
        let c = corner(&t, &dual.e_star[g.diameter], &ctx).unwrap();
        let cell = g.sphere(0, g.diameter);
        let ra = restrict_corner(&c, &cell).unwrap();
        detect_scheme(&ra, &ctx).unwrap()
    }

    #[test]
    fn hamming_first_subconstituent_three_classes() {
        let (det, cell_size) = first_subconstituent_exact("hamming:3,3");
        assert_eq!(cell_size, 6);
        assert!(det.verdict.is_scheme);
        // identity, same-clique, different-clique
        assert_eq!(det.verdict.class_count, 3);
        assert_eq!(det.relations.len(), 3);
        // nonnegative integer structure constants come with the verdict
        for h in &det.verdict.p_numbers {
            for i in h {
                for &v in i {
                    assert!(v >= 0);
                }
            }
        }
    }

    #[test]
    fn johnson_7_3_first_subconstituent_four_classes() {
        let (det, cell_size) = first_subconstituent_exact("johnson:7,3");
        assert_eq!(cell_size, 12);
        assert!(det.verdict.is_scheme);
        assert_eq!(det.verdict.class_count, 4);
        assert_eq!(det.relations.len(), 4);
    }

    #[test]
    fn johnson_6_3_boundary_first_subconstituent() {
        // at N = 2D the same-row / same-column relations of K_3 x K_3 merge
        let (det, _) = first_subconstituent_exact("johnson:6,3");
        assert!(det.verdict.is_scheme);
        assert_eq!(det.relations.len(), 3);
    }

    #[test]
    fn grassmann_first_subconstituent() {
        let (det, cell_size) = first_subconstituent_exact("grassmann:2,4,2");
        assert_eq!(cell_size, 18);
        assert!(det.verdict.is_scheme);
        // q-clique extension of K_3 x K_3 at the N = 2D boundary: the two
        // product directions merge, leaving 4 relations
        assert_eq!(det.relations.len(), 4);
    }

    #[test]
    fn hamming_last_subconstituent_matches_smaller_hamming() {
        let det = last_subconstituent_exact("hamming:3,3");
        assert!(det.verdict.is_scheme);
        // (N-1)^D = 8 vertices
        assert_eq!(det.relations[0].rows(), 8);
        let expected = "hamming:3,2".parse().unwrap();
        assert!(match_named_scheme(&det.verdict, &expected).unwrap());
        // and it does not match an unrelated scheme
        let wrong = "cycle:8".parse().unwrap();
        assert!(!match_named_scheme(&det.verdict, &wrong).unwrap());
    }

    #[test]
    fn johnson_last_subconstituent_matches_complement_johnson() {
        let det = last_subconstituent_exact("johnson:7,3");
        assert!(det.verdict.is_scheme);
        // J(4,3): 4 vertices, diameter min(D, N-2D) = 1
        assert_eq!(det.relations[0].rows(), 4);
        let expected = "johnson:4,3".parse::<GraphSpec>();
        // johnson:4,3 violates N >= 2D; use the isomorphic johnson:4,1
        assert!(expected.is_err());
        let expected = "johnson:4,1".parse().unwrap();
        assert!(match_named_scheme(&det.verdict, &expected).unwrap());
    }

    #[test]
    fn full_bose_mesner_algebra_recovers_distance_relations() {
        // self-test: the restriction of M to the whole vertex set detects
        // the original distance relations
        let g = build_graph(&"johnson:5,2".parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let bm = build_exact(&g, &data).unwrap();
        let ctx = ToleranceContext::default();
        let ra = RestrictedAlgebra {
            cell: (0..g.vertex_count()).collect(),
            basis: bm.idempotents.clone(),
        };
        let det = detect_scheme(&ra, &ctx).unwrap();
        assert!(det.verdict.is_scheme);
        assert_eq!(det.relations.len(), g.diameter + 1);
        let mats = distance_matrices(&g);
        // each detected relation equals a distance matrix
        for r in &det.relations {
            assert!(mats.iter().any(|m| m == r));
        }
        assert_eq!(det.verdict.p_numbers, data.p);
    }

    #[test]
    fn cycle_two_point_subconstituent() {
        // Gamma_1(x) in cycle:8 is two isolated vertices; detection still
        // partitions the 2x2 pairs into identity and the rest
        let g = build_graph(&"cycle:8".parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let ctx = ToleranceContext::default();
        let bm = build_float(&g, &data, &ctx).unwrap();
        let ord = bm.canonical_ordering().unwrap().clone();
        let bm = bm.reordered(&ord).unwrap();
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let distance: Vec<Matrix<f64>> = distance_matrices(&g)
            .iter()
            .map(|m| m.to_float())
            .collect();
        let t = generate_algebra(&terwilliger_seeds(&distance, &dual), &ctx, DEFAULT_BASIS_CAP)
            .unwrap();
        let c = corner(&t, &dual.e_star[1], &ctx).unwrap();
        let cell = g.sphere(0, 1);
        assert_eq!(cell.len(), 2);
        let ra = restrict_corner(&c, &cell).unwrap();
        let det = detect_scheme(&ra, &ctx).unwrap();
        assert!(det.verdict.is_scheme);
        assert_eq!(det.relations.len(), 2);
    }

    #[test]
    fn restriction_rejects_wrong_cell() {
        let g = build_graph(&"cycle:6".parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let bm = build_exact(&g, &data).unwrap();
        let ord = bm.canonical_ordering().unwrap().clone();
        let bm = bm.reordered(&ord).unwrap();
        let ctx = ToleranceContext::default();
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let distance = distance_matrices(&g);
        let t = generate_algebra(&terwilliger_seeds(&distance, &dual), &ctx, DEFAULT_BASIS_CAP)
            .unwrap();
        let c = corner(&t, &dual.e_star[1], &ctx).unwrap();
        let wrong_cell = g.sphere(0, 2);
        assert!(restrict_corner(&c, &wrong_cell).is_err());
    }
}
