//! Graph families (Hamming, Johnson, Grassmann, cycles), BFS metric,
//! distance matrices, and a brute-force distance-regularity certifier.
//!
//! Constructors are validated, not trusted: the diameter comes from BFS over
//! every vertex, and the intersection numbers come from exhaustive counting.

use crate::error::{Error, Result};
use crate::scalar::{Exact, Matrix};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Parsed graph family specification. Text syntax (used by the CLI):
/// `hamming:D,N`, `johnson:N,D`, `grassmann:q,N,D`, `cycle:n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphSpec {
    Hamming { d: usize, n: usize },
    Johnson { n: usize, d: usize },
    Grassmann { q: usize, n: usize, d: usize },
    Cycle { n: usize },
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Hamming { d, n } => write!(f, "hamming:{d},{n}"),
            GraphSpec::Johnson { n, d } => write!(f, "johnson:{n},{d}"),
            GraphSpec::Grassmann { q, n, d } => write!(f, "grassmann:{q},{n},{d}"),
            GraphSpec::Cycle { n } => write!(f, "cycle:{n}"),
        }
    }
}

impl std::str::FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("graph spec `{s}` missing `:`")))?;
        let nums: Vec<usize> = rest
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("bad integer `{p}` in `{s}`")))
            })
            .collect::<Result<_>>()?;
        let expect = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "`{family}` takes {k} parameters, got {}",
                    nums.len()
                )))
            }
        };
        let spec = match family {
            "hamming" => {
                expect(2)?;
                GraphSpec::Hamming {
                    d: nums[0],
                    n: nums[1],
                }
            }
            "johnson" => {
                expect(2)?;
                GraphSpec::Johnson {
                    n: nums[0],
                    d: nums[1],
                }
            }
            "grassmann" => {
                expect(3)?;
                GraphSpec::Grassmann {
                    q: nums[0],
                    n: nums[1],
                    d: nums[2],
                }
            }
            "cycle" => {
                expect(1)?;
                GraphSpec::Cycle { n: nums[0] }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown graph family `{other}`"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            GraphSpec::Hamming { d, n } => {
                if d < 1 || n < 2 {
                    return bad(format!("hamming needs D >= 1 and N >= 2, got D={d}, N={n}"));
                }
            }
            GraphSpec::Johnson { n, d } => {
                if d < 1 || n < 2 * d {
                    return bad(format!("johnson needs N >= 2D >= 2, got N={n}, D={d}"));
                }
            }
            GraphSpec::Grassmann { q, n, d } => {
                if !matches!(q, 2 | 3) {
                    return bad(format!("grassmann supports q in {{2, 3}}, got q={q}"));
                }
                if d < 1 || n < 2 * d {
                    return bad(format!("grassmann needs N >= 2D >= 2, got N={n}, D={d}"));
                }
            }
            GraphSpec::Cycle { n } => {
                if n < 3 {
                    return bad(format!("cycle needs n >= 3, got n={n}"));
                }
            }
        }
        Ok(())
    }
}

/// A concrete graph: canonical vertex labels, adjacency lists, and the full
/// BFS distance table.
#[derive(Debug, Clone)]
pub struct Graph {
    pub labels: Vec<String>,
    pub neighbors: Vec<Vec<usize>>,
    pub dist: Vec<Vec<usize>>,
    pub diameter: usize,
}

impl Graph {
    /// Build from adjacency lists; computes distances by BFS from every
    /// vertex and validates basic structure (symmetry, no loops,
    /// connectivity).
    pub fn from_neighbors(labels: Vec<String>, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        assert_eq!(labels.len(), n);
        for (v, nb) in neighbors.iter().enumerate() {
            for &w in nb {
                if w == v {
                    return Err(Error::InvalidParameter(format!("loop at vertex {v}")));
                }
                if !neighbors[w].contains(&v) {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency not symmetric between {v} and {w}"
                    )));
                }
            }
        }
        let mut dist = vec![vec![usize::MAX; n]; n];
        for start in 0..n {
            let row = &mut dist[start];
            row[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &neighbors[v] {
                    if row[w] == usize::MAX {
                        row[w] = row[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut diameter = 0;
        for (v, row) in dist.iter().enumerate() {
            for &d in row.iter() {
                if d == usize::MAX {
                    return Err(Error::Disconnected(v));
                }
                diameter = diameter.max(d);
            }
        }
        Ok(Graph {
            labels,
            neighbors,
            dist,
            diameter,
        })
    }

    /// Convenience constructor from an edge list (used by tests for ad-hoc
    /// graphs like paths).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for nb in neighbors.iter_mut() {
            nb.sort_unstable();
            nb.dedup();
        }
        let labels = (0..n).map(|i| i.to_string()).collect();
        Graph::from_neighbors(labels, neighbors)
    }

    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn valency_of(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Vertices at distance `i` from `x`.
    pub fn sphere(&self, x: usize, i: usize) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&y| self.dist[x][y] == i)
            .collect()
    }

    pub fn adjacency_exact(&self) -> Matrix<Exact> {
        let n = self.vertex_count();
        Matrix::from_integers(n, n, |i, j| if self.dist[i][j] == 1 { 1 } else { 0 })
    }
}

/// All intersection numbers of a distance-regular graph, plus the standard
/// abbreviations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionData {
    /// `p[h][i][j] = |Gamma_i(y) cap Gamma_j(z)|` whenever `d(y,z) = h`.
    pub p: Vec<Vec<Vec<i64>>>,
    pub c: Vec<i64>,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    /// Sphere sizes `k_i = p^0_{i,i}`.
    pub k_i: Vec<i64>,
    /// Valency `k = k_1 = b_0`.
    pub k: i64,
}

/// Witness that a graph is not distance-regular: two ordered pairs at the
/// same distance with different intersection counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotDrgWitness {
    pub h: usize,
    pub i: usize,
    pub j: usize,
    pub pair_a: (usize, usize),
    pub count_a: i64,
    pub pair_b: (usize, usize),
    pub count_b: i64,
}

#[derive(Debug, Clone)]
pub enum DrgCertificate {
    DistanceRegular(IntersectionData),
    NotDistanceRegular(NotDrgWitness),
}

pub fn build_graph(spec: &GraphSpec) -> Result<Graph> {
    spec.validate()?;
    match *spec {
        GraphSpec::Hamming { d, n } => build_hamming(d, n),
        GraphSpec::Johnson { n, d } => build_johnson(n, d),
        GraphSpec::Grassmann { q, n, d } => build_grassmann(q, n, d),
        GraphSpec::Cycle { n } => build_cycle(n),
    }
}

fn build_cycle(n: usize) -> Result<Graph> {
    let labels = (0..n).map(|i| i.to_string()).collect();
    let neighbors = (0..n)
        .map(|i| {
            let mut nb = vec![(i + 1) % n, (i + n - 1) % n];
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    Graph::from_neighbors(labels, neighbors)
}

fn build_hamming(d: usize, n: usize) -> Result<Graph> {
    // vertices: D-tuples over {0..N-1}, lexicographic
    let count = n
        .checked_pow(d as u32)
        .filter(|&c| c <= 1 << 20)
        .ok_or_else(|| Error::InvalidParameter("hamming graph too large to enumerate".into()))?;
    let mut words: Vec<Vec<usize>> = Vec::with_capacity(count);
    for v in 0..count {
        let mut w = vec![0usize; d];
        let mut rest = v;
        for pos in (0..d).rev() {
            w[pos] = rest % n;
            rest /= n;
        }
        words.push(w);
    }
    let labels = words
        .iter()
        .map(|w| w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
        .collect();
    let neighbors = words
        .iter()
        .enumerate()
        .map(|(v, wv)| {
            let mut nb = Vec::new();
            for (w, word) in words.iter().enumerate() {
                if w != v {
                    let diff = word.iter().zip(wv.iter()).filter(|(a, b)| a != b).count();
                    if diff == 1 {
                        nb.push(w);
                    }
                }
            }
            nb
        })
        .collect();
    Graph::from_neighbors(labels, neighbors)
}

fn build_johnson(n: usize, d: usize) -> Result<Graph> {
    // vertices: D-element subsets of {0..N-1}, lexicographic
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    loop {
        subsets.push(cur.clone());
        let mut i = d;
        loop {
            if i == 0 {
                i = usize::MAX;
                break;
            }
            i -= 1;
            if cur[i] != i + n - d {
                break;
            }
        }
        if i == usize::MAX {
            break;
        }
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
    let labels = subsets
        .iter()
        .map(|s| {
            s.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let count = subsets.len();
    let neighbors = (0..count)
        .map(|v| {
            let sv = &subsets[v];
            (0..count)
                .filter(|&w| {
                    w != v && {
                        let sw = &subsets[w];
                        let inter = sv.iter().filter(|x| sw.contains(x)).count();
                        inter == d - 1
                    }
                })
                .collect()
        })
        .collect();
    Graph::from_neighbors(labels, neighbors)
}

/// D-dimensional subspaces of F_q^N as reduced row-echelon matrices; two
/// subspaces are adjacent when their intersection has dimension D-1
/// (equivalently, the stacked matrix has rank D+1).
fn build_grassmann(q: usize, n: usize, d: usize) -> Result<Graph> {
    let subspaces = enumerate_rref(q, n, d);
    let labels = subspaces
        .iter()
        .map(|m| {
            m.iter()
                .map(|row| row.iter().map(|x| x.to_string()).collect::<String>())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    let count = subspaces.len();
    let neighbors = (0..count)
        .map(|v| {
            (0..count)
                .filter(|&w| {
                    w != v && {
                        let mut stacked: Vec<Vec<usize>> = subspaces[v].clone();
                        stacked.extend(subspaces[w].iter().cloned());
                        rank_mod_q(stacked, q) == d + 1
                    }
                })
                .collect()
        })
        .collect();
    Graph::from_neighbors(labels, neighbors)
}

/// All D x N reduced row-echelon matrices of rank D over F_q, sorted
/// lexicographically by flattened entries.
fn enumerate_rref(q: usize, n: usize, d: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..d).collect();
    loop {
        // free positions: row i, column j with j > pivots[i], j not a pivot
        let mut free = Vec::new();
        for i in 0..d {
            for j in 0..n {
                if j > pivots[i] && !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let combos = q.pow(free.len() as u32);
        for mut code in 0..combos {
            let mut mat = vec![vec![0usize; n]; d];
            for i in 0..d {
                mat[i][pivots[i]] = 1;
            }
            for &(i, j) in &free {
                mat[i][j] = code % q;
                code /= q;
            }
            out.push(mat);
        }
        let mut i = d;
        loop {
            if i == 0 {
                i = usize::MAX;
                break;
            }
            i -= 1;
            if pivots[i] != i + n - d {
                break;
            }
        }
        if i == usize::MAX {
            break;
        }
        pivots[i] += 1;
        for j in i + 1..d {
            pivots[j] = pivots[j - 1] + 1;
        }
    }
    out.sort();
    out
}

fn rank_mod_q(mut rows: Vec<Vec<usize>>, q: usize) -> usize {
    let n = rows.first().map_or(0, Vec::len);
    let inv = |a: usize| -> usize { (1..q).find(|&x| (a * x) % q == 1).unwrap() };
    let mut rank = 0;
    for col in 0..n {
        let Some(pos) = (rank..rows.len()).find(|&r| rows[r][col] % q != 0) else {
            continue;
        };
        rows.swap(rank, pos);
        let lead_inv = inv(rows[rank][col] % q);
        for x in rows[rank].iter_mut() {
            *x = (*x * lead_inv) % q;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] % q != 0 {
                let f = rows[r][col] % q;
                for c in 0..n {
                    rows[r][c] = (rows[r][c] + (q - f) * rows[rank][c]) % q;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Brute-force distance-regularity check: counts `|Gamma_i(y) cap Gamma_j(z)|`
/// for every ordered pair and requires the count to depend only on
/// `(d(y,z), i, j)`. Returns the full intersection table or a witness.
pub fn certify_distance_regular(g: &Graph) -> Result<DrgCertificate> {
    let n = g.vertex_count();
    let dmax = g.diameter;
    let mut table: Vec<Vec<Vec<Option<(i64, (usize, usize))>>>> =
        vec![vec![vec![None; dmax + 1]; dmax + 1]; dmax + 1];
    let mut counts = vec![vec![0i64; dmax + 1]; dmax + 1];
    for y in 0..n {
        for z in 0..n {
            let h = g.dist[y][z];
            for row in counts.iter_mut() {
                row.iter_mut().for_each(|c| *c = 0);
            }
            for w in 0..n {
                counts[g.dist[y][w]][g.dist[z][w]] += 1;
            }
            for i in 0..=dmax {
                for j in 0..=dmax {
                    match table[h][i][j] {
                        None => table[h][i][j] = Some((counts[i][j], (y, z))),
                        Some((expected, pair)) => {
                            if expected != counts[i][j] {
                                return Ok(DrgCertificate::NotDistanceRegular(NotDrgWitness {
                                    h,
                                    i,
                                    j,
                                    pair_a: pair,
                                    count_a: expected,
                                    pair_b: (y, z),
                                    count_b: counts[i][j],
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    let p: Vec<Vec<Vec<i64>>> = table
        .iter()
        .map(|ti| {
            ti.iter()
                .map(|tj| tj.iter().map(|e| e.map_or(0, |(c, _)| c)).collect())
                .collect()
        })
        .collect();
    let d = dmax;
    let c: Vec<i64> = (0..=d)
        .map(|i| if i == 0 { 0 } else { p[i][1][i - 1] })
        .collect();
    let a: Vec<i64> = (0..=d).map(|i| p[i][1][i]).collect();
    let b: Vec<i64> = (0..=d)
        .map(|i| if i == d { 0 } else { p[i][1][i + 1] })
        .collect();
    let k_i: Vec<i64> = (0..=d).map(|i| p[0][i][i]).collect();
    let k = k_i[1];
    let data = IntersectionData { p, c, a, b, k_i, k };
    validate_intersection_data(&data, g)?;
    Ok(DrgCertificate::DistanceRegular(data))
}

/// Structural sanity on a freshly computed intersection table.
fn validate_intersection_data(data: &IntersectionData, g: &Graph) -> Result<()> {
    let d = g.diameter;
    let fail = |identity: &str| {
        Err(Error::InvariantViolated {
            stage: "certify_distance_regular".into(),
            identity: identity.into(),
        })
    };
    if data.c[1] != 1 || data.a[0] != 0 || data.k_i[0] != 1 {
        return fail("c_1 = 1, a_0 = 0, k_0 = 1");
    }
    for i in 0..=d {
        if data.c[i] + data.a[i] + data.b[i] != data.k {
            return fail("c_i + a_i + b_i = k");
        }
        if i >= 1 && data.c[i] <= 0 {
            return fail("c_i > 0 for 1 <= i <= D");
        }
        if i < d && data.b[i] <= 0 {
            return fail("b_i > 0 for 0 <= i <= D-1");
        }
        for j in 0..=d {
            for h in 0..=d {
                if data.p[h][i][j] != data.p[h][j][i] {
                    return fail("p^h_{i,j} = p^h_{j,i}");
                }
            }
        }
    }
    let n: i64 = data.k_i.iter().sum();
    if n != g.vertex_count() as i64 {
        return fail("sum k_i = |X|");
    }
    // k_i = |Gamma_i(y)| for every y
    for y in 0..g.vertex_count() {
        let mut sizes = vec![0i64; d + 1];
        for z in 0..g.vertex_count() {
            sizes[g.dist[y][z]] += 1;
        }
        if sizes != data.k_i {
            return fail("k_i = |Gamma_i(y)| for all y");
        }
    }
    Ok(())
}

/// Distance matrices `A_0 .. A_D` in the exact domain.
pub fn distance_matrices(g: &Graph) -> Vec<Matrix<Exact>> {
    let n = g.vertex_count();
    (0..=g.diameter)
        .map(|i| Matrix::from_integers(n, n, |y, z| if g.dist[y][z] == i { 1 } else { 0 }))
        .collect()
}
