//! Self-avoiding walks on hypergraphs: the matrix B^(l), the centered matrix
//! Delta^(l) and correction matrices Gamma^(l,m) over the complete hypergraph,
//! the conditional expectation matrix, and the expansion-identity verifier.
//!
//! A self-avoiding walk (i_0, e_1, i_1, ..., e_l, i_l) has distinct pivot
//! vertices, consecutive hyperedges meeting exactly at the shared pivot, and
//! non-consecutive hyperedges disjoint. The three conditions collapse to one
//! incremental rule: a new hyperedge may touch the union of previously used
//! hyperedge vertices only at the current pivot. The walk DFS below exploits
//! exactly that.

use crate::hypergraph::{Hypergraph, SpinAssignment};
use crate::matrix::SparseSymMatrix;
use crate::model::ModelParams;
use crate::{Error, Result};
use rayon::prelude::*;

/// One self-avoiding walk on a concrete hypergraph: pivot vertices
/// (i_0, ..., i_l) and the indices of the traversed hyperedges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SawWalk {
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
}

/// Streaming enumeration of every length-l self-avoiding walk starting at
/// `start`, each exactly once, in lexicographic (edge index, next vertex)
/// order.
pub fn enumerate_saws(h: &Hypergraph, start: usize, l: usize) -> SawWalks<'_> {
    assert!(l >= 1, "enumerate_saws needs l >= 1");
    assert!(start < h.n());
    let mut used = vec![false; h.n()];
    used[start] = true;
    SawWalks {
        h,
        l,
        verts: vec![start as u32],
        eidxs: Vec::new(),
        used,
        marked: Vec::new(),
        cursors: vec![(0, 0)],
        done: false,
    }
}

pub struct SawWalks<'a> {
    h: &'a Hypergraph,
    l: usize,
    verts: Vec<u32>,
    eidxs: Vec<u32>,
    used: Vec<bool>,
    marked: Vec<Vec<u32>>,
    /// one (incidence position, vertex position) cursor per pivot
    cursors: Vec<(usize, usize)>,
    done: bool,
}

impl SawWalks<'_> {
    fn edge_admissible(&self, pivot: u32, edge: &[u32]) -> bool {
        // first step: any incident edge; later: the edge may reuse only the pivot
        self.eidxs.is_empty() || edge.iter().all(|&w| w == pivot || !self.used[w as usize])
    }

    fn push(&mut self, ei: u32, v: u32) {
        let mut newly = Vec::new();
        for &w in self.h.edge(ei as usize) {
            if !self.used[w as usize] {
                self.used[w as usize] = true;
                newly.push(w);
            }
        }
        self.marked.push(newly);
        self.eidxs.push(ei);
        self.verts.push(v);
        self.cursors.push((0, 0));
    }

    fn pop(&mut self) {
        self.cursors.pop();
        self.verts.pop();
        self.eidxs.pop();
        for w in self.marked.pop().expect("push/pop balanced") {
            self.used[w as usize] = false;
        }
        // advance the parent cursor past the candidate just exhausted
        let top = self.cursors.last_mut().expect("root cursor always present");
        top.1 += 1;
    }
}

impl Iterator for SawWalks<'_> {
    type Item = SawWalk;

    fn next(&mut self) -> Option<SawWalk> {
        loop {
            if self.done {
                return None;
            }
            let depth = self.eidxs.len();
            let pivot = *self.verts.last().unwrap();
            let incident = self.h.incident(pivot as usize);
            let (mut ci, mut vi) = *self.cursors.last().unwrap();
            let mut stepped = false;
            while ci < incident.len() {
                let ei = incident[ci];
                let edge = self.h.edge(ei as usize);
                if vi == 0 && !self.edge_admissible(pivot, edge) {
                    ci += 1;
                    continue;
                }
                // vertex candidates: every edge vertex except the pivot; an
                // admissible edge touches used vertices only at the pivot, so
                // each of them is a fresh walk endpoint
                let mut seen = 0usize;
                let mut chosen = None;
                for &v in edge {
                    if v == pivot {
                        continue;
                    }
                    if seen == vi {
                        chosen = Some(v);
                        break;
                    }
                    seen += 1;
                }
                match chosen {
                    Some(v) => {
                        *self.cursors.last_mut().unwrap() = (ci, vi);
                        self.push(ei, v);
                        stepped = true;
                        break;
                    }
                    None => {
                        ci += 1;
                        vi = 0;
                    }
                }
            }
            if stepped {
                if self.eidxs.len() == self.l {
                    let walk = SawWalk {
                        vertices: self.verts.clone(),
                        edges: self.eidxs.clone(),
                    };
                    self.pop();
                    return Some(walk);
                }
                continue;
            }
            if depth == 0 {
                self.done = true;
                return None;
            }
            self.pop();
        }
    }
}

/// Count length-l SAWs from `src` into a dense row.
fn saw_row(h: &Hypergraph, src: usize, l: usize) -> Vec<u64> {
    let mut row = vec![0u64; h.n()];
    let mut used = vec![false; h.n()];
    used[src] = true;
    saw_row_rec(h, src as u32, l, true, &mut used, &mut row);
    row
}

fn saw_row_rec(
    h: &Hypergraph,
    pivot: u32,
    remaining: usize,
    first: bool,
    used: &mut [bool],
    row: &mut [u64],
) {
    for &ei in h.incident(pivot as usize) {
        let edge = h.edge(ei as usize);
        if !first && edge.iter().any(|&w| w != pivot && used[w as usize]) {
            continue;
        }
        let mut newly: Vec<u32> = Vec::with_capacity(edge.len());
        for &w in edge {
            if !used[w as usize] {
                used[w as usize] = true;
                newly.push(w);
            }
        }
        for &v in edge {
            if v == pivot {
                continue;
            }
            if remaining == 1 {
                row[v as usize] += 1;
            } else {
                saw_row_rec(h, v, remaining - 1, false, used, row);
            }
        }
        for w in newly {
            used[w as usize] = false;
        }
    }
}

/// B^(l): entry (i, j) counts length-l self-avoiding walks between i and j;
/// zero diagonal; B^(0) is the identity by the empty-walk convention.
pub fn saw_matrix(h: &Hypergraph, l: usize) -> SparseSymMatrix {
    if l == 0 {
        return SparseSymMatrix::identity(h.n());
    }
    let rows: Vec<Vec<u64>> = (0..h.n())
        .into_par_iter()
        .map(|src| saw_row(h, src, l))
        .collect();
    let mut triplets = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row[i], 0);
        for (j, &c) in row.iter().enumerate().skip(i + 1) {
            if c > 0 {
                triplets.push((i as u32, j as u32, c as f64));
            }
        }
    }
    SparseSymMatrix::from_triplets(h.n(), triplets).expect("rows are in range")
}

/// Definition-level SAW check on a complete walk.
pub fn is_saw(vertices: &[u32], edges: &[&[u32]]) -> bool {
    let l = edges.len();
    if vertices.len() != l + 1 {
        return false;
    }
    let mut vs = vertices.to_vec();
    vs.sort_unstable();
    if vs.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    for t in 0..l {
        let (u, v) = (vertices[t], vertices[t + 1]);
        if u == v || !edges[t].contains(&u) || !edges[t].contains(&v) {
            return false;
        }
    }
    for j in 0..l {
        for k in (j + 1)..l {
            let inter = sorted_intersection(edges[j], edges[k]);
            if k == j + 1 {
                if inter.as_slice() != [vertices[j + 1]] {
                    return false;
                }
            } else if !inter.is_empty() {
                return false;
            }
        }
    }
    true
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::new();
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
    out
}

const ORACLE_MAX_N: usize = 14;
const ORACLE_MAX_L: usize = 4;
const ORACLE_MAX_EDGES: usize = 12;

/// Exhaustive oracle for B^(l): generates every vertex/edge interleaving of
/// length l satisfying the walk condition (scanning the full edge list at
/// every step, no incidence pruning, no sharing) and filters complete walks
/// by the definition-level SAW check.
pub fn saw_matrix_oracle(h: &Hypergraph, l: usize) -> Result<SparseSymMatrix> {
    if h.n() > ORACLE_MAX_N || l > ORACLE_MAX_L || h.num_edges() > ORACLE_MAX_EDGES {
        return Err(Error::SizeGuard(format!(
            "saw_matrix_oracle limited to n <= {ORACLE_MAX_N}, l <= {ORACLE_MAX_L}, |E| <= {ORACLE_MAX_EDGES}"
        )));
    }
    if l == 0 {
        return Ok(SparseSymMatrix::identity(h.n()));
    }
    let n = h.n();
    let mut counts = vec![vec![0u64; n]; n];
    for src in 0..n as u32 {
        let mut verts = vec![src];
        let mut eidxs = Vec::with_capacity(l);
        oracle_rec(h, l, &mut verts, &mut eidxs, &mut counts);
    }
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            debug_assert_eq!(counts[i][j], counts[j][i]);
            if counts[i][j] > 0 {
                triplets.push((i as u32, j as u32, counts[i][j] as f64));
            }
        }
    }
    SparseSymMatrix::from_triplets(n, triplets)
}

fn oracle_rec(
    h: &Hypergraph,
    l: usize,
    verts: &mut Vec<u32>,
    eidxs: &mut Vec<u32>,
    counts: &mut [Vec<u64>],
) {
    if eidxs.len() == l {
        let edges: Vec<&[u32]> = eidxs.iter().map(|&e| h.edge(e as usize)).collect();
        if is_saw(verts, &edges) {
            counts[verts[0] as usize][verts[l] as usize] += 1;
        }
        return;
    }
    let u = *verts.last().unwrap();
    for ei in 0..h.num_edges() as u32 {
        let edge = h.edge(ei as usize);
        if !edge.contains(&u) {
            continue;
        }
        for &v in edge {
            if v == u {
                continue;
            }
            eidxs.push(ei);
            verts.push(v);
            oracle_rec(h, l, verts, eidxs, counts);
            verts.pop();
            eidxs.pop();
        }
    }
}

/// Conditional expectation of the adjacency matrix given the spins. Entries
/// depend only on the spin pattern of (i, j); the diagonal is zero.
#[derive(Debug, Clone)]
pub struct ExpectedAdjacency {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_tilde: f64,
    spins: Vec<i8>,
}

pub fn expected_adjacency(
    params: &ModelParams,
    spins: &SpinAssignment,
) -> Result<ExpectedAdjacency> {
    params.validate()?;
    if params.n < 2 {
        return Err(Error::InvalidParams(
            "expected_adjacency needs n >= 2".into(),
        ));
    }
    if spins.len() != params.n {
        return Err(Error::LengthMismatch(spins.len(), params.n));
    }
    let (n, d) = (params.n as u64, params.d as u64);
    let n_plus = spins.count_plus() as u64;
    let n_minus = n - n_plus;
    let denom = params.subset_denominator();
    let c = |m: u64| crate::combin::binomial_f64(m, d - 2);
    let c_all = c(n - 2);
    let same_pair = |same: u64| {
        let c_same = c(same.saturating_sub(2));
        (params.a * c_same + params.b * (c_all - c_same)) / denom
    };
    Ok(ExpectedAdjacency {
        a_plus: same_pair(n_plus),
        a_minus: same_pair(n_minus),
        b_tilde: params.b * c_all / denom,
        spins: spins.as_slice().to_vec(),
    })
}

impl ExpectedAdjacency {
    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match (self.spins[i], self.spins[j]) {
            (1, 1) => self.a_plus,
            (-1, -1) => self.a_minus,
            _ => self.b_tilde,
        }
    }

    /// Coefficients of the rank-structured decomposition
    /// Abar = c1 * ones ones^T + c2 * sigma sigma^T + c3 * R + c4 * I,
    /// where R_ij indicates both spins -1 off the diagonal.
    pub fn decomposition(&self) -> AbarDecomposition {
        AbarDecomposition {
            coeff_ones: (self.a_plus + self.b_tilde) / 2.0,
            coeff_sigma: (self.a_plus - self.b_tilde) / 2.0,
            coeff_minus_block: self.a_minus - self.a_plus,
            coeff_identity: -self.a_plus,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbarDecomposition {
    pub coeff_ones: f64,
    pub coeff_sigma: f64,
    pub coeff_minus_block: f64,
    pub coeff_identity: f64,
}

const CENTERED_MAX_N: usize = 10;
const CENTERED_MAX_L: usize = 3;
const CENTERED_MAX_D: usize = 3;

fn centered_guard(params: &ModelParams, l: usize) -> Result<()> {
    if params.n > CENTERED_MAX_N || l > CENTERED_MAX_L || params.d > CENTERED_MAX_D {
        return Err(Error::SizeGuard(format!(
            "complete-hypergraph walk sums limited to n <= {CENTERED_MAX_N}, l <= {CENTERED_MAX_L}, d <= {CENTERED_MAX_D}"
        )));
    }
    Ok(())
}

fn check_shapes(h: &Hypergraph, params: &ModelParams, spins: &SpinAssignment) -> Result<()> {
    if h.n() != params.n || h.d() != params.d {
        return Err(Error::InvalidParams(
            "hypergraph does not match params".into(),
        ));
    }
    if spins.len() != h.n() {
        return Err(Error::LengthMismatch(spins.len(), h.n()));
    }
    Ok(())
}

/// Inclusion probability of a d-subset under the spins: p_n if
/// monochromatic, q_n otherwise.
fn subset_probability(params: &ModelParams, spins: &SpinAssignment, subset: &[u32]) -> f64 {
    if spins.is_monochromatic(subset) {
        params.a / params.subset_denominator()
    } else {
        params.b / params.subset_denominator()
    }
}

/// Walk step in the complete hypergraph K_{n,d}: every admissible hyperedge
/// is {pivot} ∪ S with S a (d-1)-subset of `free`. The callback receives
/// (S, presence in h, subset probability).
fn for_each_fresh_edge(
    h: &Hypergraph,
    params: &ModelParams,
    spins: &SpinAssignment,
    pivot: u32,
    free: &[u32],
    f: &mut impl FnMut(&[u32], bool, f64),
) {
    let k = h.d() - 1;
    let mut scratch = vec![0u32; k];
    let mut edge: Vec<u32> = Vec::with_capacity(h.d());
    for_each_combination(&free, k, &mut scratch, 0, 0, &mut |s| {
        edge.clear();
        edge.push(pivot);
        edge.extend_from_slice(s);
        edge.sort_unstable();
        let present = h.membership(&edge).expect("edge is well-formed");
        let prob = subset_probability(params, spins, &edge);
        f(s, present, prob);
    });
}

fn for_each_combination(
    items: &[u32],
    k: usize,
    scratch: &mut Vec<u32>,
    start: usize,
    depth: usize,
    f: &mut impl FnMut(&[u32]),
) {
    if depth == k {
        f(&scratch[..k]);
        return;
    }
    let remaining = k - depth;
    let mut i = start;
    while i + remaining <= items.len() {
        scratch[depth] = items[i];
        for_each_combination(items, k, scratch, i + 1, depth + 1, f);
        i += 1;
    }
}

/// Weighted SAW sum over K_{n,d} from one source. Steps multiply the centered
/// factor (presence - probability); the final `tail_plain` steps multiply raw
/// presence instead, and with `mid_expected` set the step right before that
/// tail multiplies the probability alone. Both extras off: a Delta^(l) row.
fn k_walk_row(
    h: &Hypergraph,
    params: &ModelParams,
    spins: &SpinAssignment,
    src: usize,
    l: usize,
    mid_expected: bool,
    tail_plain: usize,
) -> Vec<f64> {
    let mut row = vec![0.0; h.n()];
    if l == 0 {
        row[src] = 1.0;
        return row;
    }
    let mut used = vec![false; h.n()];
    used[src] = true;
    k_walk_rec(
        h,
        params,
        spins,
        src as u32,
        l,
        mid_expected,
        tail_plain,
        1.0,
        &mut used,
        &mut row,
    );
    row
}

#[allow(clippy::too_many_arguments)]
fn k_walk_rec(
    h: &Hypergraph,
    params: &ModelParams,
    spins: &SpinAssignment,
    pivot: u32,
    remaining: usize,
    mid_expected: bool,
    tail_plain: usize,
    weight: f64,
    used: &mut [bool],
    row: &mut [f64],
) {
    let free: Vec<u32> = (0..h.n() as u32).filter(|&v| !used[v as usize]).collect();
    let mut handle = |s: &[u32], present: bool, prob: f64| {
        let factor = if remaining <= tail_plain {
            (present as u8) as f64
        } else if mid_expected && remaining == tail_plain + 1 {
            prob
        } else {
            (present as u8) as f64 - prob
        };
        if factor == 0.0 {
            return;
        }
        let w = weight * factor;
        for &v in s {
            used[v as usize] = true;
        }
        for &v in s {
            if remaining == 1 {
                row[v as usize] += w;
            } else {
                k_walk_rec(
                    h,
                    params,
                    spins,
                    v,
                    remaining - 1,
                    mid_expected,
                    tail_plain,
                    w,
                    used,
                    row,
                );
            }
        }
        for &v in s {
            used[v as usize] = false;
        }
    };
    for_each_fresh_edge(h, params, spins, pivot, &free, &mut handle);
}

/// Delta^(l): SAW sums over the complete hypergraph with centered edge
/// factors; Delta^(0) = I by the empty-walk convention.
pub fn centered_saw_matrix(
    h: &Hypergraph,
    params: &ModelParams,
    spins: &SpinAssignment,
    l: usize,
) -> Result<SparseSymMatrix> {
    centered_guard(params, l)?;
    check_shapes(h, params, spins)?;
    if l == 0 {
        return Ok(SparseSymMatrix::identity(h.n()));
    }
    let rows: Vec<Vec<f64>> = (0..h.n())
        .into_par_iter()
        .map(|src| k_walk_row(h, params, spins, src, l, false, 0))
        .collect();
    dense_rows_to_sym(&rows)
}

fn dense_rows_to_sym(rows: &[Vec<f64>]) -> Result<SparseSymMatrix> {
    let n = rows.len();
    let mut triplets = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate().skip(i) {
            debug_assert!(
                (v - rows[j][i]).abs() <= 1e-9 * (1.0 + v.abs()),
                "asymmetry at ({i},{j}): {v} vs {}",
                rows[j][i]
            );
            if v != 0.0 || rows[j][i] != 0.0 {
                triplets.push((i as u32, j as u32, (v + rows[j][i]) / 2.0));
            }
        }
    }
    SparseSymMatrix::from_triplets(n, triplets)
}

/// Gamma^(l,m): the weight the product Delta^(l-m) Abar B^(m-1) assigns to
/// prefix/step/suffix concatenations that are not themselves self-avoiding.
/// Computed as the full concatenation sum minus the same weight restricted to
/// genuine length-l SAWs. Returned dense: unlike B, Delta, and Abar, the
/// Gamma matrices are not symmetric (time reversal swaps the centered prefix
/// weights with the plain suffix weights).
pub fn gamma_matrix(
    h: &Hypergraph,
    params: &ModelParams,
    spins: &SpinAssignment,
    l: usize,
    m: usize,
) -> Result<Vec<Vec<f64>>> {
    centered_guard(params, l)?;
    check_shapes(h, params, spins)?;
    if m < 1 || m > l {
        return Err(Error::InvalidParams(format!(
            "gamma_matrix needs 1 <= m <= l, got m = {m}"
        )));
    }
    let n = h.n();

    // suffix rows: number of length-(m-1) SAWs in h from v to j
    let suffix: Vec<Vec<u64>> = if m == 1 {
        (0..n)
            .map(|v| {
                let mut row = vec![0u64; n];
                row[v] = 1;
                row
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|v| saw_row(h, v, m - 1))
            .collect()
    };

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut q_row = vec![0.0; n];
            // prefix: centered length-(l-m) SAW sums i -> u over K_{n,d}
            let prefix = k_walk_row(h, params, spins, i, l - m, false, 0);
            for (u, &wp) in prefix.iter().enumerate() {
                if wp == 0.0 {
                    continue;
                }
                // one unconstrained walk step u -> v weighted by the subset
                // probability, then any suffix SAW v -> j
                let free: Vec<u32> = (0..n as u32).filter(|&v| v as usize != u).collect();
                for_each_fresh_edge(
                    h,
                    params,
                    spins,
                    u as u32,
                    &free,
                    &mut |s, _present, prob| {
                        for &v in s {
                            let w = wp * prob;
                            for (j, &c) in suffix[v as usize].iter().enumerate() {
                                if c > 0 {
                                    q_row[j] += w * c as f64;
                                }
                            }
                        }
                    },
                );
            }
            // subtract the genuinely self-avoiding concatenations
            let saw_part = k_walk_row(h, params, spins, i, l, true, m - 1);
            for (j, &v) in saw_part.iter().enumerate() {
                q_row[j] -= v;
            }
            q_row
        })
        .collect();
    Ok(rows)
}

/// Residual of the expansion identity
/// B^(l) = Delta^(l) + sum_m Delta^(l-m) Abar B^(m-1) - sum_m Gamma^(l,m),
/// as the max absolute entry. The identity is exact; anything beyond float
/// error indicates a defect in one of the four objects.
pub fn verify_expansion(
    h: &Hypergraph,
    params: &ModelParams,
    spins: &SpinAssignment,
    l: usize,
) -> Result<f64> {
    centered_guard(params, l)?;
    check_shapes(h, params, spins)?;
    if l < 1 {
        return Err(Error::InvalidParams("verify_expansion needs l >= 1".into()));
    }
    let n = h.n();
    let b: Vec<Vec<Vec<f64>>> = (0..l).map(|m| saw_matrix(h, m).to_dense()).collect();
    let b_l = saw_matrix(h, l).to_dense();
    let deltas: Vec<Vec<Vec<f64>>> = (0..=l)
        .map(|m| centered_saw_matrix(h, params, spins, m).map(|mm| mm.to_dense()))
        .collect::<Result<_>>()?;
    let abar = expected_adjacency(params, spins)?.to_dense();

    let mut residual = b_l;
    for (i, row) in deltas[l].iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            residual[i][j] -= v;
        }
    }
    for m in 1..=l {
        let prod = dense_mul(&dense_mul(&deltas[l - m], &abar), &b[m - 1]);
        let gamma = gamma_matrix(h, params, spins, l, m)?;
        for i in 0..n {
            for j in 0..n {
                residual[i][j] -= prod[i][j];
                residual[i][j] += gamma[i][j];
            }
        }
    }
    Ok(residual
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0, f64::max))
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for t in 0..n {
            let av = a[i][t];
            if av == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += av * b[t][j];
            }
        }
    }
    out
}

/// Result of a spectral-norm power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorm {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest |eigenvalue| via power iteration with a fixed deterministic start
/// vector; converges on the relative change of the norm estimate (this also
/// handles +/- paired extremes, unlike the raw Rayleigh quotient).
pub fn spectral_norm(m: &SparseSymMatrix, tol: f64, max_iter: usize) -> SpectralNorm {
    let n = m.n();
    if n == 0 || m.is_zero() {
        return SpectralNorm {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let mut x = crate::spectral::seeded_unit_vector(n, 0x5eed_0001);
    let mut est = 0.0f64;
    for it in 1..=max_iter {
        let y = m.matvec(&x);
        let norm = l2_norm(&y);
        if norm == 0.0 {
            return SpectralNorm {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        let prev = est;
        est = norm;
        x = y.into_iter().map(|v| v / norm).collect();
        if it > 1 && (est - prev).abs() <= tol * est.abs() {
            return SpectralNorm {
                value: est,
                iterations: it,
                converged: true,
            };
        }
    }
    SpectralNorm {
        value: est,
        iterations: max_iter,
        converged: false,
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
