//! Decomposition of the standard module into irreducible modules of a
//! transpose-closed matrix algebra, with profiles (endpoint, dual endpoint,
//! diameter, shape), isomorphism classes, and the Wedderburn report.
//!
//! The splitting mechanism: draw a seeded random symmetric element of the
//! commutant; its eigenspaces are invariant candidate modules. Candidates
//! that are not irreducible (endomorphism dimension > 1) get refined by
//! cyclic submodules `Tw` for random `w`. Irreducibility is certified, not
//! assumed: a candidate is accepted only when its self-intertwiner space is
//! one-dimensional.

use crate::bose_mesner::BoseMesnerData;
use crate::dual::DualData;
use crate::error::{Error, Result};
use crate::scalar::{
    rationalize, symmetric_eigendecomposition, Exact, Matrix, RowEchelon, Scalar, SpanAccumulator,
    SubspaceBasis, ToleranceContext,
};
use crate::talg::MatrixAlgebra;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Integer coefficient range for random commutant elements.
const COEFF_RANGE: i64 = 1_000_000;
const MAX_REDRAWS: usize = 5;

// ---------------------------------------------------------------------------
// commutant

/// Commutant of the algebra spanned by `gens` inside the full matrix algebra:
/// `{C : C G = G C for each generator}` by nullspace computation over all
/// n^2 unknowns. Exact or float depending on the scalar domain.
pub fn commutant<S: Scalar>(
    gens: &[Matrix<S>],
    ctx: &ToleranceContext,
) -> Result<MatrixAlgebra<S>> {
    let n = gens
        .first()
        .ok_or_else(|| Error::InvalidParameter("commutant: no generators".into()))?
        .rows();
    let unknowns: Vec<(usize, usize)> = (0..n)
        .flat_map(|y| (0..n).map(move |z| (y, z)))
        .collect();
    commutant_on_positions(gens, n, &unknowns, ctx)
}

/// Commutant restricted to matrices that are block-diagonal with respect to
/// `partition` (classes of the vertex set). Sound when some generator is a
/// diagonal matrix taking distinct values on distinct classes, which already
/// forces block-diagonality; the remaining generators supply the equations.
pub fn commutant_block_diagonal<S: Scalar>(
    gens: &[Matrix<S>],
    partition: &[Vec<usize>],
    ctx: &ToleranceContext,
) -> Result<MatrixAlgebra<S>> {
    let n = gens
        .first()
        .ok_or_else(|| Error::InvalidParameter("commutant: no generators".into()))?
        .rows();
    let mut unknowns = Vec::new();
    for class in partition {
        for &y in class {
            for &z in class {
                unknowns.push((y, z));
            }
        }
    }
    commutant_on_positions(gens, n, &unknowns, ctx)
}

fn commutant_on_positions<S: Scalar>(
    gens: &[Matrix<S>],
    n: usize,
    unknowns: &[(usize, usize)],
    ctx: &ToleranceContext,
) -> Result<MatrixAlgebra<S>> {
    let u = unknowns.len();
    let mut index = vec![usize::MAX; n * n];
    for (t, &(y, z)) in unknowns.iter().enumerate() {
        index[y * n + z] = t;
    }
    let mut ech = RowEchelon::new(u, ctx);
    // equation at position (r, c) for generator G:
    //   sum_w C[r,w] G[w,c] - G[r,w] C[w,c] = 0
    for g in gens {
        for r in 0..n {
            for c in 0..n {
                let mut row = vec![S::zero(); u];
                let mut nonzero = false;
                for w in 0..n {
                    let t = index[r * n + w];
                    if t != usize::MAX && !g.at(w, c).is_zero() {
                        row[t] += g.at(w, c);
                        nonzero = true;
                    }
                    let t = index[w * n + c];
                    if t != usize::MAX && !g.at(r, w).is_zero() {
                        row[t] -= g.at(r, w);
                        nonzero = true;
                    }
                }
                if nonzero {
                    ech.insert_row(row);
                }
            }
        }
    }
    let basis: Vec<Matrix<S>> = ech
        .nullspace_basis()
        .into_iter()
        .map(|coords| {
            let mut m = Matrix::<S>::zeros(n, n);
            for (t, &(y, z)) in unknowns.iter().enumerate() {
                if !coords[t].is_zero() {
                    m.set(y, z, coords[t].clone());
                }
            }
            m
        })
        .collect();
    // verification: every basis element commutes with every generator
    let scale = gens.iter().map(Matrix::max_abs).fold(1.0f64, f64::max);
    let bound = if S::EXACT { 0.0 } else { ctx.residual_bound * scale };
    for b in &basis {
        for g in gens {
            let r = b.mul(g).residual(&g.mul(b));
            if r > bound {
                return Err(Error::ResidualExceeded {
                    what: "commutant basis element fails to commute".into(),
                    residual: r,
                    bound,
                });
            }
        }
    }
    Ok(MatrixAlgebra::from_basis_unchecked(basis, ctx))
}

// ---------------------------------------------------------------------------
// decomposition into irreducibles

/// One irreducible module with its profile data.
#[derive(Debug, Clone)]
pub struct TModule {
    pub basis: SubspaceBasis<f64>,
    pub endpoint: usize,
    pub dual_endpoint: usize,
    pub diameter: usize,
    /// `shape[i] = dim E*_{r+i} W`.
    pub shape: Vec<usize>,
    pub dim: usize,
    pub primary: bool,
    /// Eigenvalue of `E*_1 A E*_1` on `E*_1 W`; present iff endpoint = 1.
    pub local_eigenvalue: Option<f64>,
    /// Eigenvalues of `E*_D A_h E*_D` on `E*_D W` for h = 1..D; present iff
    /// endpoint + diameter = D.
    pub local_sequence: Option<Vec<f64>>,
    /// Whether the float rank decisions were re-verified in exact arithmetic
    /// (possible when the module projector reconstructs as a rational
    /// matrix).
    pub exact_verified: bool,
}

#[derive(Debug, Clone)]
pub struct TModuleDecomposition {
    pub modules: Vec<TModule>,
    /// Isomorphism class id per module; ids are canonical (sorted by
    /// profile key).
    pub class_of: Vec<usize>,
    /// One representative module index per class.
    pub class_reps: Vec<usize>,
    pub multiplicities: Vec<usize>,
    /// Wedderburn summand sizes: `n_i` = dimension of a class-i
    /// representative.
    pub wedderburn: Vec<usize>,
    pub seed: u64,
    /// The integer coefficients of the commutant element that produced the
    /// accepted split (recorded for reproducibility).
    pub coefficients: Vec<i64>,
}

impl TModuleDecomposition {
    pub fn class_count(&self) -> usize {
        self.class_reps.len()
    }

    pub fn total_dimension(&self) -> usize {
        self.modules.iter().map(|m| m.dim).sum()
    }

    pub fn primary_class(&self) -> Option<usize> {
        self.modules
            .iter()
            .position(|m| m.primary)
            .map(|i| self.class_of[i])
    }
}

/// Everything the profile computations need, in the float domain and under
/// the chosen Q-polynomial ordering.
pub struct ModuleEnvironment<'a> {
    pub generators: &'a [Matrix<f64>],
    pub bm: &'a BoseMesnerData<f64>,
    pub dual: &'a DualData<f64>,
    pub distance: &'a [Matrix<f64>],
    /// Exact idempotents and dual idempotents for rank re-verification;
    /// absent when the graph runs in the float domain.
    pub exact: Option<ExactRankData<'a>>,
}

pub struct ExactRankData<'a> {
    pub idempotents: &'a [Matrix<Exact>],
    pub e_star: &'a [Matrix<Exact>],
}

/// Split the standard module into certified-irreducible modules, profile
/// them, classify up to isomorphism, and cross-check the Wedderburn data.
pub fn decompose_standard_module(
    env: &ModuleEnvironment<'_>,
    comm: &MatrixAlgebra<f64>,
    ctx: &ToleranceContext,
    seed: u64,
) -> Result<TModuleDecomposition> {
    let n = env.generators[0].rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err: Option<Error> = None;
    for _attempt in 0..MAX_REDRAWS {
        let coefficients: Vec<i64> = (0..comm.dim())
            .map(|_| rng.gen_range(-COEFF_RANGE..=COEFF_RANGE))
            .collect();
        match try_split(env, comm, &coefficients, ctx, &mut rng) {
            Ok(raw_modules) => {
                let total: usize = raw_modules.iter().map(SubspaceBasis::dim).sum();
                if total != n {
                    last_err = Some(Error::RetriesExhausted(format!(
                        "module dimensions sum to {total}, expected {n}"
                    )));
                    continue;
                }
                verify_pairwise_orthogonal(&raw_modules, ctx)?;
                let mut modules = Vec::with_capacity(raw_modules.len());
                for basis in raw_modules {
                    modules.push(module_profile(&basis, env, ctx)?);
                }
                return classify(modules, env, ctx, seed, coefficients);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::RetriesExhausted("no attempts ran".into())))
}

fn try_split(
    env: &ModuleEnvironment<'_>,
    comm: &MatrixAlgebra<f64>,
    coefficients: &[i64],
    ctx: &ToleranceContext,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<SubspaceBasis<f64>>> {
    let n = env.generators[0].rows();
    // c = sum gamma_i (B_i + B_i^T)/2: a random symmetric commutant element
    let mut c = Matrix::<f64>::zeros(n, n);
    for (gamma, b) in coefficients.iter().zip(comm.basis().iter()) {
        let sym = b.add(&b.transpose()).scale(&0.5);
        c = c.add(&sym.scale(&(*gamma as f64)));
    }
    let eig = symmetric_eigendecomposition(&c, ctx)?;
    let mut out = Vec::new();
    for (_, candidate) in eig {
        if !is_invariant(&candidate, env.generators, ctx) {
            return Err(Error::RetriesExhausted(
                "commutant eigenspace drifted off the invariant lattice".into(),
            ));
        }
        split_to_irreducibles(candidate, env, ctx, rng, &mut out, 0)?;
    }
    Ok(out)
}

/// Invariance under the generators: the image of each basis vector stays in
/// the span within the verification bound.
fn is_invariant(w: &SubspaceBasis<f64>, gens: &[Matrix<f64>], ctx: &ToleranceContext) -> bool {
    let acc = {
        let mut acc = SpanAccumulator::new(w.ambient(), ctx);
        for v in w.vectors() {
            acc.insert(v);
        }
        acc
    };
    for g in gens {
        let scale = g.max_abs().max(1.0);
        for v in w.vectors() {
            let img = g.apply(v);
            if acc.residual(&img) > ctx.residual_bound * scale {
                return false;
            }
        }
    }
    true
}

fn split_to_irreducibles(
    w: SubspaceBasis<f64>,
    env: &ModuleEnvironment<'_>,
    ctx: &ToleranceContext,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<SubspaceBasis<f64>>,
    depth: usize,
) -> Result<()> {
    if depth > 64 {
        return Err(Error::RetriesExhausted("module splitting recursed too deep".into()));
    }
    if w.dim() == 0 {
        return Ok(());
    }
    let end_dim = intertwiner_dimension(&w, &w, env.generators, ctx)?;
    if end_dim == 1 {
        out.push(w);
        return Ok(());
    }
    // reducible: cut out a proper cyclic submodule Tw for a random w
    for _ in 0..MAX_REDRAWS {
        let v = random_vector_in(&w, rng);
        let sub = cyclic_submodule(&v, &w, env.generators, ctx);
        if sub.dim() > 0 && sub.dim() < w.dim() {
            let rest = sub.orthogonal_complement_within(&w, ctx)?;
            if rest.dim() + sub.dim() != w.dim() {
                return Err(Error::RetriesExhausted(
                    "cyclic submodule complement lost dimensions".into(),
                ));
            }
            split_to_irreducibles(sub, env, ctx, rng, out, depth + 1)?;
            split_to_irreducibles(rest, env, ctx, rng, out, depth + 1)?;
            return Ok(());
        }
    }
    Err(Error::RetriesExhausted(format!(
        "candidate of dimension {} with endomorphism dimension {} resisted splitting",
        w.dim(),
        end_dim
    )))
}

fn random_vector_in(w: &SubspaceBasis<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0f64; w.ambient()];
    for b in w.vectors() {
        let gamma: f64 = rng.gen_range(-1.0..1.0);
        for (x, y) in v.iter_mut().zip(b.iter()) {
            *x += gamma * y;
        }
    }
    v
}

/// Smallest invariant subspace of `within` containing `v`: Krylov closure
/// under the generators, re-projected onto `within` each step to stop
/// numerical drift.
pub fn cyclic_submodule(
    v: &[f64],
    within: &SubspaceBasis<f64>,
    gens: &[Matrix<f64>],
    ctx: &ToleranceContext,
) -> SubspaceBasis<f64> {
    let project = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0f64; x.len()];
        for b in within.vectors() {
            let dot: f64 = b.iter().zip(x.iter()).map(|(a, c)| a * c).sum();
            for (o, bv) in out.iter_mut().zip(b.iter()) {
                *o += dot * bv;
            }
        }
        out
    };
    let mut acc = SpanAccumulator::new(within.ambient(), ctx);
    let mut frontier = vec![project(v)];
    acc.insert(&frontier[0]);
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let img = project(&g.apply(x));
                if acc.insert(&img) {
                    next.push(img);
                }
            }
        }
        frontier = next;
        if acc.rank() == within.dim() {
            break;
        }
    }
    SubspaceBasis::from_spanning(within.ambient(), acc.rows_ref(), ctx)
}

fn verify_pairwise_orthogonal(
    modules: &[SubspaceBasis<f64>],
    ctx: &ToleranceContext,
) -> Result<()> {
    for (i, a) in modules.iter().enumerate() {
        for b in modules.iter().skip(i + 1) {
            for u in a.vectors() {
                for v in b.vectors() {
                    let dot: f64 = u.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
                    if dot.abs() > ctx.residual_bound * 10.0 {
                        return Err(Error::InvariantViolated {
                            stage: "decompose_standard_module".into(),
                            identity: format!("modules {i} and later are not orthogonal"),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// intertwiners and isomorphism

/// Dimension of the space of maps `sigma: W1 -> W2` commuting with every
/// generator's restricted action. Requires both subspaces to be invariant.
pub fn intertwiner_dimension(
    w1: &SubspaceBasis<f64>,
    w2: &SubspaceBasis<f64>,
    gens: &[Matrix<f64>],
    ctx: &ToleranceContext,
) -> Result<usize> {
    Ok(intertwiner_space(w1, w2, gens, ctx)?.len())
}

/// Basis of the intertwiner space, each entry a (dim W2 x dim W1) matrix in
/// the coordinates of the two bases.
fn intertwiner_space(
    w1: &SubspaceBasis<f64>,
    w2: &SubspaceBasis<f64>,
    gens: &[Matrix<f64>],
    ctx: &ToleranceContext,
) -> Result<Vec<Matrix<f64>>> {
    let (d1, d2) = (w1.dim(), w2.dim());
    if d1 == 0 || d2 == 0 {
        return Ok(Vec::new());
    }
    let acts1 = restricted_actions(w1, gens, ctx)?;
    let acts2 = restricted_actions(w2, gens, ctx)?;
    // sigma G1 = G2 sigma, sigma as d2 x d1 unknowns
    let mut ech = RowEchelon::new(d1 * d2, ctx);
    for (g1, g2) in acts1.iter().zip(acts2.iter()) {
        for r in 0..d2 {
            for c in 0..d1 {
                let mut row = vec![0.0f64; d1 * d2];
                for t in 0..d1 {
                    row[r * d1 + t] += *g1.at(t, c);
                }
                for t in 0..d2 {
                    row[t * d1 + c] -= *g2.at(r, t);
                }
                ech.insert_row(row);
            }
        }
    }
    Ok(ech
        .nullspace_basis()
        .into_iter()
        .map(|v| Matrix::from_vec(d2, d1, v))
        .collect())
}

/// Matrices of the generator actions in the coordinates of `w`, verifying
/// invariance as a side effect.
fn restricted_actions(
    w: &SubspaceBasis<f64>,
    gens: &[Matrix<f64>],
    ctx: &ToleranceContext,
) -> Result<Vec<Matrix<f64>>> {
    let d = w.dim();
    let mut out = Vec::with_capacity(gens.len());
    for g in gens {
        let scale = g.max_abs().max(1.0);
        let mut action = Matrix::<f64>::zeros(d, d);
        for (c, v) in w.vectors().iter().enumerate() {
            let img = g.apply(v);
            // coefficients in the orthonormal basis
            let mut recon = vec![0.0f64; w.ambient()];
            for (r, b) in w.vectors().iter().enumerate() {
                let dot: f64 = b.iter().zip(img.iter()).map(|(x, y)| x * y).sum();
                action.set(r, c, dot);
                for (o, bv) in recon.iter_mut().zip(b.iter()) {
                    *o += dot * bv;
                }
            }
            let drift = img
                .iter()
                .zip(recon.iter())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            if drift > ctx.residual_bound * scale * 10.0 {
                return Err(Error::InvariantViolated {
                    stage: "restricted_actions".into(),
                    identity: format!("subspace is not invariant (drift {drift:.3e})"),
                });
            }
        }
        out.push(action);
    }
    Ok(out)
}

/// Are two irreducible modules isomorphic? The general test: the intertwiner
/// space is one-dimensional with an invertible generator.
pub fn modules_isomorphic(
    w1: &SubspaceBasis<f64>,
    w2: &SubspaceBasis<f64>,
    gens: &[Matrix<f64>],
    ctx: &ToleranceContext,
) -> Result<bool> {
    if w1.dim() != w2.dim() {
        return Ok(false);
    }
    let space = intertwiner_space(w1, w2, gens, ctx)?;
    if space.len() != 1 {
        return Ok(false);
    }
    // invertibility: full rank of the single intertwiner
    let sigma = &space[0];
    let rows: Vec<Vec<f64>> = (0..sigma.rows()).map(|i| sigma.row(i).to_vec()).collect();
    let rank = SubspaceBasis::from_spanning(sigma.cols(), &rows, ctx).dim();
    Ok(rank == sigma.cols())
}

// ---------------------------------------------------------------------------
// profiles

/// Compute the profile of an irreducible module and verify every structural
/// invariant: contiguous support, matching dual dimensions, shape symmetry
/// and unimodality, and sharpness (the bottom shape entry is 1). A sharpness
/// failure is reported loudly as an error, never masked.
pub fn module_profile(
    w: &SubspaceBasis<f64>,
    env: &ModuleEnvironment<'_>,
    ctx: &ToleranceContext,
) -> Result<TModule> {
    let dcap = env.bm.diameter();
    let n = w.ambient();
    let fail = |identity: String| {
        Err(Error::InvariantViolated {
            stage: "module_profile".into(),
            identity,
        })
    };
    // dim E*_i W: mask coordinates to the i-th sphere
    let mut star_dims = Vec::with_capacity(dcap + 1);
    for e in env.dual.e_star.iter() {
        let masked: Vec<Vec<f64>> = w
            .vectors()
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(y, x)| x * e.at(y, y))
                    .collect()
            })
            .collect();
        star_dims.push(SubspaceBasis::from_spanning(n, &masked, ctx).dim());
    }
    // dim E_i W: project with the idempotents
    let mut eigen_dims = Vec::with_capacity(dcap + 1);
    for e in env.bm.idempotents.iter() {
        let imgs: Vec<Vec<f64>> = w.vectors().iter().map(|v| e.apply(v)).collect();
        eigen_dims.push(SubspaceBasis::from_spanning(n, &imgs, ctx).dim());
    }
    let endpoint = match star_dims.iter().position(|&d| d > 0) {
        Some(r) => r,
        None => return fail("module has no support".into()),
    };
    let dual_endpoint = match eigen_dims.iter().position(|&d| d > 0) {
        Some(s) => s,
        None => return fail("module has no eigenspace support".into()),
    };
    let support: Vec<usize> = (0..=dcap).filter(|&i| star_dims[i] > 0).collect();
    let diameter = support.len() - 1;
    if support != ((endpoint..=endpoint + diameter).collect::<Vec<_>>()) {
        return fail("E*_i W support is not an interval".into());
    }
    let dual_support: Vec<usize> = (0..=dcap).filter(|&i| eigen_dims[i] > 0).collect();
    if dual_support.len() != diameter + 1 {
        return fail("dual diameter differs from diameter".into());
    }
    if dual_support != ((dual_endpoint..=dual_endpoint + diameter).collect::<Vec<_>>()) {
        return fail("E_i W support is not an interval".into());
    }
    let shape: Vec<usize> = (0..=diameter).map(|i| star_dims[endpoint + i]).collect();
    // sharpness: the bottom shape entry must be 1
    if shape[0] != 1 {
        return fail(format!(
            "sharpness violated: dim E*_r W = {} for endpoint r = {endpoint}",
            shape[0]
        ));
    }
    for i in 0..=diameter {
        if shape[i] != star_dims[endpoint + i] || shape[i] != eigen_dims[dual_endpoint + i] {
            return fail(format!(
                "dim E*_{{r+{i}}} W != dim E_{{s+{i}}} W ({} vs {})",
                shape[i],
                eigen_dims[dual_endpoint + i]
            ));
        }
        if shape[i] != shape[diameter - i] {
            return fail(format!("shape not symmetric at {i}"));
        }
    }
    for i in 1..=diameter / 2 {
        if shape[i - 1] > shape[i] {
            return fail(format!("shape not unimodal at {i}"));
        }
    }
    let dim = w.dim();
    if shape.iter().sum::<usize>() != dim {
        return fail("shape entries do not sum to the module dimension".into());
    }
    let primary = endpoint == 0;
    if primary {
        if dual_endpoint != 0 || diameter != dcap {
            return fail("endpoint 0 must force dual endpoint 0 and full diameter".into());
        }
        if shape.iter().any(|&x| x != 1) {
            return fail("primary module must have all shape entries 1".into());
        }
    } else if dual_endpoint == 0 || diameter == dcap {
        return fail("nonprimary module with primary-only profile".into());
    }

    // local eigenvalue at endpoint 1
    let local_eigenvalue = if endpoint == 1 {
        Some(local_eigenvalue_of(w, &env.dual.e_star[1], &env.distance[1], ctx)?)
    } else {
        None
    };
    // local eigenvalue sequence on the top subconstituent
    let local_sequence = if endpoint + diameter == dcap {
        let mut seq = Vec::with_capacity(dcap);
        for h in 1..=dcap {
            seq.push(local_eigenvalue_of(
                w,
                &env.dual.e_star[dcap],
                &env.distance[h],
                ctx,
            )?);
        }
        Some(seq)
    } else {
        None
    };

    let exact_verified = match &env.exact {
        Some(exact) => verify_dims_exactly(w, exact, &star_dims, &eigen_dims, ctx)?,
        None => false,
    };

    Ok(TModule {
        basis: w.clone(),
        endpoint,
        dual_endpoint,
        diameter,
        shape,
        dim,
        primary,
        local_eigenvalue,
        local_sequence,
        exact_verified,
    })
}

/// The scalar by which `E* M E*` acts on the one-dimensional space `E* W`,
/// with the eigenvector relation verified.
fn local_eigenvalue_of(
    w: &SubspaceBasis<f64>,
    e_star: &Matrix<f64>,
    m: &Matrix<f64>,
    ctx: &ToleranceContext,
) -> Result<f64> {
    let n = w.ambient();
    let masked: Vec<Vec<f64>> = w
        .vectors()
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .map(|(y, x)| x * e_star.at(y, y))
                .collect()
        })
        .collect();
    let space = SubspaceBasis::from_spanning(n, &masked, ctx);
    if space.dim() != 1 {
        return Err(Error::InvariantViolated {
            stage: "local_eigenvalue".into(),
            identity: format!("expected a one-dimensional slice, got {}", space.dim()),
        });
    }
    let u = &space.vectors()[0];
    // E* M E* u with u supported on the sphere: mask the image again
    let img = m.apply(u);
    let masked_img: Vec<f64> = img
        .iter()
        .enumerate()
        .map(|(y, x)| x * e_star.at(y, y))
        .collect();
    let mu: f64 = u.iter().zip(masked_img.iter()).map(|(a, b)| a * b).sum();
    let residual = masked_img
        .iter()
        .zip(u.iter())
        .map(|(x, y)| (x - mu * y).abs())
        .fold(0.0f64, f64::max);
    if residual > ctx.residual_bound * m.max_abs().max(1.0) * 10.0 {
        return Err(Error::InvariantViolated {
            stage: "local_eigenvalue".into(),
            identity: format!("slice is not an eigenvector (residual {residual:.3e})"),
        });
    }
    Ok(mu)
}

/// Rational reconstruction of the module projector; when it succeeds the
/// float rank decisions are re-checked in exact arithmetic.
fn verify_dims_exactly(
    w: &SubspaceBasis<f64>,
    exact: &ExactRankData<'_>,
    star_dims: &[usize],
    eigen_dims: &[usize],
    ctx: &ToleranceContext,
) -> Result<bool> {
    let n = w.ambient();
    let mut proj = Matrix::<f64>::zeros(n, n);
    for v in w.vectors() {
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let x = proj.at(i, j) + v[i] * v[j];
                proj.set(i, j, x);
            }
        }
    }
    let mut exact_proj = Matrix::<Exact>::zeros(n, n);
    let mut den_lcm: i128 = 1;
    for i in 0..n {
        for j in 0..n {
            match rationalize(*proj.at(i, j), 1_000_000, 1e-9) {
                Some(q) => {
                    // keep the lcm of denominators machine-sized so the
                    // projector test below stays on the integer fast path;
                    // spurious reconstructions of irrational entries blow
                    // this cap immediately
                    if let Some((_, d)) = q.as_i64_ratio() {
                        let g = gcd_i128(den_lcm, d as i128);
                        den_lcm = match (den_lcm / g).checked_mul(d as i128) {
                            Some(v) if v <= 1 << 40 => v,
                            _ => return Ok(false),
                        };
                    } else {
                        return Ok(false);
                    }
                    exact_proj.set(i, j, q)
                }
                None => return Ok(false),
            }
        }
    }
    // a projector's trace is its rank: an exact integer equal to dim W
    if exact_proj.trace() != Exact::from_int(w.dim() as i64) {
        return Ok(false);
    }
    // only trust the reconstruction when it is a genuine projector
    if !exact_proj.mul(&exact_proj).eq(&exact_proj) {
        return Ok(false);
    }
    let exact_rank = |m: &Matrix<Exact>| -> usize {
        let mut acc = SpanAccumulator::<Exact>::new(n, &ToleranceContext::default());
        let mut rank = 0;
        for i in 0..m.rows() {
            if acc.insert(m.row(i)) {
                rank += 1;
            }
        }
        rank
    };
    let _ = ctx;
    for (i, e) in exact.e_star.iter().enumerate() {
        if exact_rank(&e.mul(&exact_proj)) != star_dims[i] {
            return Err(Error::InvariantViolated {
                stage: "module_profile".into(),
                identity: format!("exact rank of E*_{i} P_W disagrees with the float rank"),
            });
        }
    }
    for (i, e) in exact.idempotents.iter().enumerate() {
        if exact_rank(&e.mul(&exact_proj)) != eigen_dims[i] {
            return Err(Error::InvariantViolated {
                stage: "module_profile".into(),
                identity: format!("exact rank of E_{i} P_W disagrees with the float rank"),
            });
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// classification and the Wedderburn report

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

fn profile_key(m: &TModule) -> (usize, usize, usize, Vec<usize>, Vec<i64>) {
    // quantized local data so float noise cannot reorder classes
    let quantize = |x: f64| (x * 1e9).round() as i64;
    let mut locals = Vec::new();
    if let Some(mu) = m.local_eigenvalue {
        locals.push(quantize(mu));
    }
    if let Some(seq) = &m.local_sequence {
        locals.extend(seq.iter().map(|&x| quantize(x)));
    }
    (
        m.endpoint,
        m.dual_endpoint,
        m.diameter,
        m.shape.clone(),
        locals,
    )
}

fn classify(
    modules: Vec<TModule>,
    env: &ModuleEnvironment<'_>,
    ctx: &ToleranceContext,
    seed: u64,
    coefficients: Vec<i64>,
) -> Result<TModuleDecomposition> {
    let count = modules.len();
    let mut class_of = vec![usize::MAX; count];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..count {
        let mut assigned = false;
        for (gid, group) in groups.iter_mut().enumerate() {
            let rep = group[0];
            if profile_key(&modules[i]) == profile_key(&modules[rep])
                && modules_isomorphic(
                    &modules[i].basis,
                    &modules[rep].basis,
                    env.generators,
                    ctx,
                )?
            {
                group.push(i);
                class_of[i] = gid;
                assigned = true;
                break;
            }
        }
        if !assigned {
            class_of[i] = groups.len();
            groups.push(vec![i]);
        }
    }
    // canonical class order: sort groups by the profile key of the rep
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by_key(|&g| profile_key(&modules[groups[g][0]]));
    let mut relabel = vec![0usize; groups.len()];
    for (new_id, &old_id) in order.iter().enumerate() {
        relabel[old_id] = new_id;
    }
    for c in class_of.iter_mut() {
        *c = relabel[*c];
    }
    let mut class_reps = vec![0usize; groups.len()];
    let mut multiplicities = vec![0usize; groups.len()];
    for (old_id, group) in groups.iter().enumerate() {
        class_reps[relabel[old_id]] = group[0];
        multiplicities[relabel[old_id]] = group.len();
    }
    let wedderburn: Vec<usize> = class_reps.iter().map(|&r| modules[r].dim).collect();
    Ok(TModuleDecomposition {
        modules,
        class_of,
        class_reps,
        multiplicities,
        wedderburn,
        seed,
        coefficients,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WedderburnReport {
    pub summands: Vec<usize>,
    pub sum_of_squares: usize,
    pub dim_t: usize,
    pub dim_commutant: usize,
    pub sum_of_multiplicity_squares: usize,
    pub primary_multiplicity: usize,
    pub primary_dimension: usize,
    pub pass: bool,
}

/// The real-Wedderburn cross-check: `sum n_i^2 = dim T` (a complex summand
/// would contribute 2 n_i^2 and a quaternionic one 4 n_i^2, so equality
/// pins every division ring to the reals), `dim commutant = sum mult_i^2`,
/// and the primary class has multiplicity 1 with dimension D+1.
pub fn wedderburn_report(
    dec: &TModuleDecomposition,
    dim_t: usize,
    dim_commutant: usize,
    expected_primary_dim: usize,
) -> Result<WedderburnReport> {
    let sum_of_squares: usize = dec.wedderburn.iter().map(|n| n * n).sum();
    let sum_of_multiplicity_squares: usize = dec.multiplicities.iter().map(|m| m * m).sum();
    let primary_class = dec.primary_class().ok_or_else(|| Error::InvariantViolated {
        stage: "wedderburn_report".into(),
        identity: "no primary module found".into(),
    })?;
    let report = WedderburnReport {
        summands: dec.wedderburn.clone(),
        sum_of_squares,
        dim_t,
        dim_commutant,
        sum_of_multiplicity_squares,
        primary_multiplicity: dec.multiplicities[primary_class],
        primary_dimension: dec.wedderburn[primary_class],
        pass: sum_of_squares == dim_t
            && sum_of_multiplicity_squares == dim_commutant
            && dec.multiplicities[primary_class] == 1
            && dec.wedderburn[primary_class] == expected_primary_dim,
    };
    if !report.pass {
        return Err(Error::InvariantViolated {
            stage: "wedderburn_report".into(),
            identity: format!(
                "sum n_i^2 = {} vs dim T = {}; sum mult_i^2 = {} vs dim commutant = {}; \
                 primary (mult, dim) = ({}, {})",
                sum_of_squares,
                dim_t,
                sum_of_multiplicity_squares,
                dim_commutant,
                report.primary_multiplicity,
                report.primary_dimension
            ),
        });
    }
    Ok(report)
}

/// Corner-spectrum bridge: the number of endpoint-1 isomorphism classes
/// against the number of distinct eigenvalues of `E*_1 A E*_1` restricted to
/// the span of the endpoint-1 slices. The second count goes through its own
/// eigendecomposition of the restricted operator, independent of the
/// per-module eigenvalue extraction.
pub fn endpoint_one_eigenvalue_count(
    dec: &TModuleDecomposition,
    env: &ModuleEnvironment<'_>,
    ctx: &ToleranceContext,
) -> Result<(usize, usize)> {
    let classes_with_endpoint_one = dec
        .class_reps
        .iter()
        .filter(|&&r| dec.modules[r].endpoint == 1)
        .count();
    let n = env.distance[1].rows();
    let e1 = &env.dual.e_star[1];
    // span of E*_1 W over endpoint-1 modules
    let mut slices: Vec<Vec<f64>> = Vec::new();
    for m in dec.modules.iter().filter(|m| m.endpoint == 1) {
        for v in m.basis.vectors() {
            let masked: Vec<f64> = v
                .iter()
                .enumerate()
                .map(|(y, x)| x * e1.at(y, y))
                .collect();
            slices.push(masked);
        }
    }
    let span = SubspaceBasis::from_spanning(n, &slices, ctx);
    if span.dim() == 0 {
        return Ok((classes_with_endpoint_one, 0));
    }
    // E*_1 A E*_1 restricted to the span, then its spectrum
    let masked_a = Matrix::<f64>::from_fn(n, n, |y, z| {
        e1.at(y, y) * env.distance[1].at(y, z) * e1.at(z, z)
    });
    let d = span.dim();
    let mut restricted = Matrix::<f64>::zeros(d, d);
    for (c, v) in span.vectors().iter().enumerate() {
        let img = masked_a.apply(v);
        for (r, b) in span.vectors().iter().enumerate() {
            let dot: f64 = b.iter().zip(img.iter()).map(|(x, y)| x * y).sum();
            restricted.set(r, c, dot);
        }
    }
    let eig = symmetric_eigendecomposition(&restricted, ctx)?;
    Ok((classes_with_endpoint_one, eig.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bose_mesner::{build_exact, build_float, BoseMesnerData};
    use crate::dual::{build_dual, DualData};
    use crate::graphs::{build_graph, certify_distance_regular, distance_matrices, DrgCertificate};
    use crate::talg::{generate_algebra, terwilliger_seeds, DEFAULT_BASIS_CAP};

    struct Pipeline {
        bm: BoseMesnerData<f64>,
        dual: DualData<f64>,
        distance: Vec<Matrix<f64>>,
        gens: Vec<Matrix<f64>>,
        dim_t: usize,
        comm: MatrixAlgebra<f64>,
        spheres: Vec<Vec<usize>>,
    }

    fn pipeline(spec: &str) -> Pipeline {
        let g = build_graph(&spec.parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let ctx = ToleranceContext::default();
        let exact_spectrum = crate::bose_mesner::has_integral_spectrum(&g).unwrap();
        let (bm, dim_t) = if exact_spectrum {
            let bm = build_exact(&g, &data).unwrap();
            let ord = bm.canonical_ordering().unwrap().clone();
            let bm = bm.reordered(&ord).unwrap();
            let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
            let dist = distance_matrices(&g);
            let t = generate_algebra(&terwilliger_seeds(&dist, &dual), &ctx, DEFAULT_BASIS_CAP)
                .unwrap();
            (bm.to_float(), t.dim())
        } else {
            let bm = build_float(&g, &data, &ctx).unwrap();
            let ord = bm.canonical_ordering().unwrap().clone();
            let bm = bm.reordered(&ord).unwrap();
            let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
            let dist: Vec<Matrix<f64>> = distance_matrices(&g)
                .iter()
                .map(|m| m.to_float())
                .collect();
            let t = generate_algebra(&terwilliger_seeds(&dist, &dual), &ctx, DEFAULT_BASIS_CAP)
                .unwrap();
            (bm, t.dim())
        };
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let distance: Vec<Matrix<f64>> = distance_matrices(&g)
            .iter()
            .map(|m| m.to_float())
            .collect();
        let gens = vec![distance[1].clone(), dual.a_star[1].clone()];
        let spheres: Vec<Vec<usize>> = (0..=g.diameter).map(|i| g.sphere(0, i)).collect();
        let comm = commutant_block_diagonal(&gens, &spheres, &ctx).unwrap();
        Pipeline {
            bm,
            dual,
            distance,
            gens,
            dim_t,
            comm,
            spheres,
        }
    }

    fn env<'a>(p: &'a Pipeline) -> ModuleEnvironment<'a> {
        ModuleEnvironment {
            generators: &p.gens,
            bm: &p.bm,
            dual: &p.dual,
            distance: &p.distance,
            exact: None,
        }
    }

    #[test]
    fn commutant_of_full_matrix_algebra_is_scalars() {
        let ctx = ToleranceContext::default();
        // matrix units of Mat_3
        let mut gens = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let mut m = Matrix::<f64>::zeros(3, 3);
                m.set(i, j, 1.0);
                gens.push(m);
            }
        }
        let c = commutant(&gens, &ctx).unwrap();
        assert_eq!(c.dim(), 1);
    }

    #[test]
    fn commutant_of_diagonal_algebra_is_diagonal() {
        let ctx = ToleranceContext::default();
        let gens: Vec<Matrix<f64>> = (0..4)
            .map(|i| {
                let mut m = Matrix::<f64>::zeros(4, 4);
                m.set(i, i, 1.0);
                m
            })
            .collect();
        let c = commutant(&gens, &ctx).unwrap();
        assert_eq!(c.dim(), 4);
    }

    #[test]
    fn exact_and_float_commutant_ranks_agree() {
        let g = build_graph(&"cycle:6".parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let ctx = ToleranceContext::default();
        let bm = build_exact(&g, &data).unwrap();
        let ord = bm.canonical_ordering().unwrap().clone();
        let bm = bm.reordered(&ord).unwrap();
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let dist = distance_matrices(&g);
        let gens_exact = vec![dist[1].clone(), dual.a_star[1].clone()];
        let spheres: Vec<Vec<usize>> = (0..=g.diameter).map(|i| g.sphere(0, i)).collect();
        let exact_dim = commutant_block_diagonal(&gens_exact, &spheres, &ctx)
            .unwrap()
            .dim();
        let gens_float: Vec<Matrix<f64>> =
            gens_exact.iter().map(|m| m.to_float()).collect();
        let float_dim = commutant_block_diagonal(&gens_float, &spheres, &ctx)
            .unwrap()
            .dim();
        assert_eq!(exact_dim, float_dim);
        // block route agrees with the unrestricted solve at this size
        let full_dim = commutant(&gens_float, &ctx).unwrap().dim();
        assert_eq!(full_dim, float_dim);
    }

    #[test]
    fn cycle_8_decomposition() {
        let p = pipeline("cycle:8");
        let ctx = ToleranceContext::default();
        let env = env(&p);
        let dec = decompose_standard_module(&env, &p.comm, &ctx, 7).unwrap();
        assert_eq!(dec.total_dimension(), 8);
        // seed independence: identical class counts, multiplicities, and
        // profile multisets under a different seed
        let dec2 = decompose_standard_module(&env, &p.comm, &ctx, 1234).unwrap();
        assert_eq!(dec.class_count(), dec2.class_count());
        assert_eq!(dec.multiplicities, dec2.multiplicities);
        assert_eq!(dec.wedderburn, dec2.wedderburn);
        let profiles = |d: &TModuleDecomposition| {
            let mut v: Vec<_> = d
                .modules
                .iter()
                .map(|m| (m.endpoint, m.dual_endpoint, m.diameter, m.shape.clone()))
                .collect();
            v.sort();
            v
        };
        assert_eq!(profiles(&dec), profiles(&dec2));
        // two-route consistency: commutant dimension vs class multiplicities
        let sum_mult_sq: usize = dec.multiplicities.iter().map(|m| m * m).sum();
        assert_eq!(p.comm.dim(), sum_mult_sq);
        let report = wedderburn_report(&dec, p.dim_t, p.comm.dim(), 5).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn hamming_3_3_decomposition() {
        let p = pipeline("hamming:3,3");
        let ctx = ToleranceContext::default();
        let env = env(&p);
        let dec = decompose_standard_module(&env, &p.comm, &ctx, 42).unwrap();
        assert_eq!(dec.total_dimension(), 27);
        // exactly one module with endpoint 0: the primary, dimension D+1,
        // all shape entries 1
        let primaries: Vec<&TModule> =
            dec.modules.iter().filter(|m| m.endpoint == 0).collect();
        assert_eq!(primaries.len(), 1);
        assert_eq!(primaries[0].dim, 4);
        assert_eq!(primaries[0].shape, vec![1, 1, 1, 1]);
        assert!(primaries[0].primary);
        // sharpness across the board
        for m in &dec.modules {
            assert_eq!(m.shape[0], 1);
        }
        // nonprimary modules have endpoint and dual endpoint >= 1
        for m in dec.modules.iter().filter(|m| !m.primary) {
            assert!(m.endpoint >= 1 && m.dual_endpoint >= 1);
        }
        let report = wedderburn_report(&dec, p.dim_t, p.comm.dim(), 4).unwrap();
        assert!(report.pass);
        assert_eq!(report.primary_dimension * report.primary_dimension, 16);
        // endpoint-1 classes match the corner spectrum count
        let (classes, eigs) = endpoint_one_eigenvalue_count(&dec, &env, &ctx).unwrap();
        assert_eq!(classes, eigs);
        // endpoint-1 dichotomy: dim E*_1 W = 1 there; endpoint >= 2 means
        // E*_1 W = 0 (checked via the shape/support data)
        for m in &dec.modules {
            match m.endpoint {
                1 => assert_eq!(m.shape[0], 1),
                r if r >= 2 => assert!(m.endpoint > 1),
                _ => {}
            }
        }
    }

    #[test]
    fn primary_module_is_irreducible_and_v_is_not() {
        let p = pipeline("hamming:3,3");
        let ctx = ToleranceContext::default();
        let n = 27;
        // the primary module: cyclic closure of the base-vertex indicator
        let full = SubspaceBasis::full(n);
        let mut xhat = vec![0.0; n];
        xhat[0] = 1.0;
        let primary = cyclic_submodule(&xhat, &full, &p.gens, &ctx);
        assert_eq!(primary.dim(), 4);
        assert_eq!(
            intertwiner_dimension(&primary, &primary, &p.gens, &ctx).unwrap(),
            1
        );
        // V itself contains the primary properly
        assert!(intertwiner_dimension(&full, &full, &p.gens, &ctx).unwrap() > 1);
    }

    #[test]
    fn doubled_module_has_endomorphism_dimension_four() {
        let p = pipeline("hamming:3,3");
        let ctx = ToleranceContext::default();
        let env = env(&p);
        let dec = decompose_standard_module(&env, &p.comm, &ctx, 42).unwrap();
        // pick a class with multiplicity >= 2 and stack two copies
        let class = (0..dec.class_count())
            .find(|&c| dec.multiplicities[c] >= 2)
            .expect("hamming:3,3 has a repeated class");
        let members: Vec<usize> = (0..dec.modules.len())
            .filter(|&i| dec.class_of[i] == class)
            .take(2)
            .collect();
        let mut vectors = Vec::new();
        vectors.extend(dec.modules[members[0]].basis.vectors().iter().cloned());
        vectors.extend(dec.modules[members[1]].basis.vectors().iter().cloned());
        let doubled = SubspaceBasis::from_spanning(27, &vectors, &ctx);
        assert_eq!(
            doubled.dim(),
            dec.modules[members[0]].dim + dec.modules[members[1]].dim
        );
        assert_eq!(
            intertwiner_dimension(&doubled, &doubled, &p.gens, &ctx).unwrap(),
            4
        );
    }

    #[test]
    fn isomorphism_criteria_agree() {
        let p = pipeline("hamming:3,3");
        let ctx = ToleranceContext::default();
        let env = env(&p);
        let dec = decompose_standard_module(&env, &p.comm, &ctx, 9).unwrap();
        let radius = p.distance[1].max_abs().max(1.0);
        for i in 0..dec.modules.len() {
            // every module is self-isomorphic via the identity intertwiner
            assert!(modules_isomorphic(
                &dec.modules[i].basis,
                &dec.modules[i].basis,
                &p.gens,
                &ctx
            )
            .unwrap());
            for j in (i + 1)..dec.modules.len() {
                let (a, b) = (&dec.modules[i], &dec.modules[j]);
                let iso =
                    modules_isomorphic(&a.basis, &b.basis, &p.gens, &ctx).unwrap();
                if a.primary != b.primary {
                    assert!(!iso, "primary vs nonprimary cannot be isomorphic");
                }
                // endpoint-1 pairs: the intertwiner verdict matches the
                // local-eigenvalue criterion
                if let (Some(mu1), Some(mu2)) = (a.local_eigenvalue, b.local_eigenvalue) {
                    let same = (mu1 - mu2).abs() <= ctx.cluster_width * radius;
                    assert_eq!(iso, same, "mu criterion disagreed ({mu1} vs {mu2})");
                }
                // top-slice pairs: the verdict matches the local sequence
                if let (Some(s1), Some(s2)) = (&a.local_sequence, &b.local_sequence) {
                    if a.endpoint == b.endpoint {
                        let same = s1
                            .iter()
                            .zip(s2.iter())
                            .all(|(x, y)| (x - y).abs() <= ctx.cluster_width * radius);
                        assert_eq!(iso, same, "phi criterion disagreed");
                    }
                }
            }
        }
    }

    #[test]
    fn johnson_6_3_wedderburn() {
        let p = pipeline("johnson:6,3");
        let ctx = ToleranceContext::default();
        let env = env(&p);
        let dec = decompose_standard_module(&env, &p.comm, &ctx, 3).unwrap();
        assert_eq!(dec.total_dimension(), 20);
        let report = wedderburn_report(&dec, p.dim_t, p.comm.dim(), 4).unwrap();
        assert!(report.pass);
        // dim commutant = sum mult_i^2, the two-route consistency oracle
        assert_eq!(
            p.comm.dim(),
            dec.multiplicities.iter().map(|m| m * m).sum::<usize>()
        );
        let _ = &p.spheres;
    }

    #[test]
    fn exact_rank_reverification_runs_on_exact_graphs() {
        // build the exact data for hamming:3,3 and force the exact check on
        // the primary module (its projector is rational)
        let g = build_graph(&"hamming:3,3".parse().unwrap()).unwrap();
        let data = match certify_distance_regular(&g).unwrap() {
            DrgCertificate::DistanceRegular(d) => d,
            _ => panic!(),
        };
        let ctx = ToleranceContext::default();
        let bm_exact = build_exact(&g, &data).unwrap();
        let ord = bm_exact.canonical_ordering().unwrap().clone();
        let bm_exact = bm_exact.reordered(&ord).unwrap();
        let dual_exact = build_dual(&g, &bm_exact, &data, 0, &ctx).unwrap();
        let bm = bm_exact.to_float();
        let dual = build_dual(&g, &bm, &data, 0, &ctx).unwrap();
        let distance: Vec<Matrix<f64>> = distance_matrices(&g)
            .iter()
            .map(|m| m.to_float())
            .collect();
        let gens = vec![distance[1].clone(), dual.a_star[1].clone()];
        let env = ModuleEnvironment {
            generators: &gens,
            bm: &bm,
            dual: &dual,
            distance: &distance,
            exact: Some(ExactRankData {
                idempotents: &bm_exact.idempotents,
                e_star: &dual_exact.e_star,
            }),
        };
        let full = SubspaceBasis::full(27);
        let mut xhat = vec![0.0; 27];
        xhat[0] = 1.0;
        let primary = cyclic_submodule(&xhat, &full, &gens, &ctx);
        let profile = module_profile(&primary, &env, &ctx).unwrap();
        assert!(profile.primary);
        assert!(
            profile.exact_verified,
            "primary projector is rational; exact re-verification should run"
        );
    }
}
