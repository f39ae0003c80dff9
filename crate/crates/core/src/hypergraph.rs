//! d-uniform hypergraphs, HSBM sampling, adjacency matrix, and circuit counts.

use crate::combin::binomial;
use crate::matrix::SparseSymMatrix;
use crate::model::ModelParams;
use crate::{Error, Result};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use std::collections::HashSet;

/// ±1 community labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinAssignment(Vec<i8>);

impl SpinAssignment {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Malformed("spins must be +1 or -1".into()));
        }
        Ok(Self(spins))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn count_plus(&self) -> usize {
        self.0.iter().filter(|&&s| s == 1).count()
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    /// True iff all vertices of `subset` carry the same spin.
    pub fn is_monochromatic(&self, subset: &[u32]) -> bool {
        let first = self.0[subset[0] as usize];
        subset.iter().all(|&v| self.0[v as usize] == first)
    }
}

/// Canonical d-uniform hypergraph: sorted edges, lexicographic edge list,
/// rebuilt incidence. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    d: usize,
    edges: Vec<Vec<u32>>,
    incidence: Vec<Vec<u32>>,
}

impl Hypergraph {
    pub fn new(n: usize, d: usize, mut edges: Vec<Vec<u32>>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d = {d} < 2")));
        }
        for e in &mut edges {
            if e.len() != d {
                return Err(Error::Malformed(format!(
                    "edge {:?} has {} vertices, expected {d}",
                    e,
                    e.len()
                )));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Malformed(format!("edge {e:?} repeats a vertex")));
            }
            if e[d - 1] as usize >= n {
                return Err(Error::Malformed(format!(
                    "edge {e:?} out of range for n = {n}"
                )));
            }
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("duplicate hyperedge".into()));
        }
        let mut incidence = vec![Vec::new(); n];
        for (idx, e) in edges.iter().enumerate() {
            for &v in e {
                incidence[v as usize].push(idx as u32);
            }
        }
        Ok(Self {
            n,
            d,
            edges,
            incidence,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &[u32] {
        &self.edges[idx]
    }

    /// Edge indices incident to `v`.
    pub fn incident(&self, v: usize) -> &[u32] {
        &self.incidence[v]
    }

    /// Degree of `v` = number of incident hyperedges.
    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    /// Adjacency-tensor membership query T_e for a d-subset, by binary search
    /// on the canonical edge list (the order-d tensor is never materialized).
    pub fn membership(&self, subset: &[u32]) -> Result<bool> {
        if subset.len() != self.d {
            return Err(Error::Malformed(format!(
                "membership query has {} vertices, expected {}",
                subset.len(),
                self.d
            )));
        }
        let mut q = subset.to_vec();
        q.sort_unstable();
        if q.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Malformed("membership query repeats a vertex".into()));
        }
        if q[self.d - 1] as usize >= self.n {
            return Err(Error::Malformed("membership query out of range".into()));
        }
        Ok(self.edges.binary_search(&q).is_ok())
    }

    /// A_ij = number of hyperedges containing both i and j (zero diagonal).
    pub fn adjacency_matrix(&self) -> SparseSymMatrix {
        let mut triplets = Vec::new();
        for e in &self.edges {
            for x in 0..self.d {
                for y in (x + 1)..self.d {
                    triplets.push((e[x], e[y], 1.0));
                }
            }
        }
        SparseSymMatrix::from_triplets(self.n, triplets).expect("edges validated at construction")
    }

    /// Number of closed walks of length k, counted by direct enumeration;
    /// equals trace(A^k).
    pub fn circuit_count(&self, k: usize) -> Result<u128> {
        if k == 0 {
            return Err(Error::InvalidParams("circuit_count needs k >= 1".into()));
        }
        let mut total: u128 = 0;
        for start in 0..self.n as u32 {
            total += self.count_walks(start, start, k);
        }
        Ok(total)
    }

    fn count_walks(&self, from: u32, target: u32, steps: usize) -> u128 {
        if steps == 0 {
            return (from == target) as u128;
        }
        let mut acc = 0u128;
        for &ei in &self.incidence[from as usize] {
            for &v in &self.edges[ei as usize] {
                if v != from {
                    acc += self.count_walks(v, target, steps - 1);
                }
            }
        }
        acc
    }
}

/// Sample (H, sigma) from the block model: i.i.d. fair spins, then every
/// monochromatic d-subset independently with probability p_n and every mixed
/// one with q_n. Never enumerates the C(n, d) subsets: class totals are drawn
/// binomially and that many distinct subsets are rejection-sampled.
pub fn sample_hsbm(params: &ModelParams) -> Result<(Hypergraph, SpinAssignment)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (n, d) = (params.n, params.d);

    let spins: Vec<i8> = (0..n)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let plus: Vec<u32> = (0..n as u32).filter(|&v| spins[v as usize] == 1).collect();
    let minus: Vec<u32> = (0..n as u32).filter(|&v| spins[v as usize] == -1).collect();

    let c_plus = binomial(plus.len() as u64, d as u64);
    let c_minus = binomial(minus.len() as u64, d as u64);
    let n_same = c_plus + c_minus;
    let n_mixed = binomial(n as u64, d as u64) - n_same;
    let denom = params.subset_denominator();
    let (p, q) = (params.a / denom, params.b / denom);

    let k_same = draw_binomial(&mut rng, n_same, p)?;
    let k_mixed = draw_binomial(&mut rng, n_mixed, q)?;

    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity((k_same + k_mixed) as usize);
    let mut edges: Vec<Vec<u32>> = Vec::with_capacity((k_same + k_mixed) as usize);

    let w_plus = if n_same == 0 {
        0.0
    } else {
        c_plus as f64 / n_same as f64
    };
    let mut drawn = 0;
    while drawn < k_same {
        let pool = if rng.random::<f64>() < w_plus {
            &plus
        } else {
            &minus
        };
        let mut e: Vec<u32> = index::sample(&mut rng, pool.len(), d)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            edges.push(e);
            drawn += 1;
        }
    }

    let mut drawn = 0;
    while drawn < k_mixed {
        let mut e: Vec<u32> = index::sample(&mut rng, n, d)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        let first = spins[e[0] as usize];
        if e.iter().all(|&v| spins[v as usize] == first) {
            continue; // monochromatic: belongs to the other class
        }
        e.sort_unstable();
        if seen.insert(e.clone()) {
            edges.push(e);
            drawn += 1;
        }
    }

    let h = Hypergraph::new(n, d, edges)?;
    Ok((h, SpinAssignment::new(spins)?))
}

fn draw_binomial(rng: &mut ChaCha8Rng, trials: u128, p: f64) -> Result<u64> {
    if trials == 0 || p == 0.0 {
        return Ok(0);
    }
    let trials: u64 = trials
        .try_into()
        .map_err(|_| Error::InvalidParams("subset class too large for sampler".into()))?;
    let bin = Binomial::new(trials, p)
        .map_err(|e| Error::InvalidParams(format!("binomial draw: {e}")))?;
    Ok(bin.sample(rng))
}
