//! Multi-type Poisson Galton-Watson hypertrees: the local limit of HSBM
//! neighborhoods. Counts-mode sampling for martingale moments, tree-mode
//! sampling for isomorphism tests, canonical forms, and the exact
//! binomial-vs-Poisson total-variation distance.
//!
//! Each vertex with spin tau spawns Pois(alpha/(d-1)) hyperedges; a hyperedge
//! is of type r when r of its d-1 children share tau. Type d-1 has
//! probability (d-1)a / (alpha 2^{d-1}) and type r <= d-2 has probability
//! (d-1) b C(d-1, r) / (alpha 2^{d-1}); the probabilities sum to one.

use crate::combin::binomial_f64;
use crate::hypergraph::{Hypergraph, SpinAssignment};
use crate::localstats;
use crate::{Error, Result};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Configuration of the hypertree growth process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GWConfig {
    pub a: f64,
    pub b: f64,
    pub d: usize,
    pub root_spin: i8,
    pub depth: usize,
    pub seed: u64,
}

impl GWConfig {
    pub fn new(a: f64, b: f64, d: usize, root_spin: i8, depth: usize, seed: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParams(format!("d = {d} < 2")));
        }
        if !(b > 0.0) || !(a >= b) {
            return Err(Error::InvalidParams(format!(
                "need a >= b > 0, got a = {a}, b = {b}"
            )));
        }
        if root_spin != 1 && root_spin != -1 {
            return Err(Error::InvalidParams("root_spin must be +1 or -1".into()));
        }
        let cfg = Self {
            a,
            b,
            d,
            root_spin,
            depth,
            seed,
        };
        let total: f64 = cfg.type_probabilities().iter().sum();
        debug_assert!(
            (total - 1.0).abs() < 1e-12,
            "type probabilities sum to {total}"
        );
        Ok(cfg)
    }

    pub fn alpha(&self) -> f64 {
        let pow = (2f64).powi(self.d as i32 - 1);
        (self.d as f64 - 1.0) * (self.a + (pow - 1.0) * self.b) / pow
    }

    pub fn beta(&self) -> f64 {
        let pow = (2f64).powi(self.d as i32 - 1);
        (self.d as f64 - 1.0) * (self.a - self.b) / pow
    }

    /// P(type r) for r = 0..=d-1.
    pub fn type_probabilities(&self) -> Vec<f64> {
        let pow = (2f64).powi(self.d as i32 - 1);
        let dm1 = self.d as f64 - 1.0;
        let denom = self.alpha() * pow;
        (0..self.d)
            .map(|r| {
                if r == self.d - 1 {
                    dm1 * self.a / denom
                } else {
                    dm1 * self.b * binomial_f64(self.d as u64 - 1, r as u64) / denom
                }
            })
            .collect()
    }

    /// RNG for replicate `idx`, derived deterministically from the seed.
    pub fn replicate_rng(&self, idx: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(
            self.seed
                ^ idx
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    .wrapping_add(0x243f_6a88),
        )
    }
}

/// Per-generation counts and normalized martingale trajectories
/// M_t = alpha^{-t}(W+_t + W-_t), Delta_t = beta^{-t}(W+_t - W-_t).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationCounts {
    pub w_plus: Vec<u64>,
    pub w_minus: Vec<u64>,
    /// w_by_type[t][r] for t = 1..=depth (index 0 is the root generation and
    /// stays empty).
    pub w_by_type: Vec<Vec<u64>>,
    pub m: Vec<f64>,
    pub delta: Vec<f64>,
}

fn poisson_draw(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let pois = Poisson::new(lambda).expect("positive finite rate");
    pois.sample(rng) as u64
}

/// Counts-only sampler: per generation, draw the per-type hyperedge counts
/// from their conditioned Poisson laws and roll them up into W+/W-. Memory
/// O(depth), no tree materialized.
pub fn sample_counts(config: &GWConfig, rng: &mut ChaCha8Rng) -> GenerationCounts {
    let d = config.d;
    let pow = (2f64).powi(d as i32 - 1);
    let (alpha, beta) = (config.alpha(), config.beta());
    let (mut wp, mut wm) = if config.root_spin == 1 {
        (1u64, 0u64)
    } else {
        (0u64, 1u64)
    };
    let mut out = GenerationCounts {
        w_plus: vec![wp],
        w_minus: vec![wm],
        w_by_type: vec![Vec::new()],
        m: vec![(wp + wm) as f64],
        delta: vec![wp as f64 - wm as f64],
    };
    for t in 1..=config.depth {
        let mut by_type = vec![0u64; d];
        for (r, slot) in by_type.iter_mut().enumerate() {
            let lambda = if r == d - 1 {
                (config.a * wp as f64 + config.b * wm as f64) / pow
            } else if r == 0 {
                (config.a * wm as f64 + config.b * wp as f64) / pow
            } else {
                config.b * binomial_f64(d as u64 - 1, r as u64) * (wp + wm) as f64 / pow
            };
            *slot = poisson_draw(rng, lambda);
        }
        wp = by_type.iter().enumerate().map(|(r, &w)| r as u64 * w).sum();
        wm = by_type
            .iter()
            .enumerate()
            .map(|(r, &w)| (d - 1 - r) as u64 * w)
            .sum();
        out.w_plus.push(wp);
        out.w_minus.push(wm);
        out.w_by_type.push(by_type);
        out.m.push(alpha.powi(-(t as i32)) * (wp + wm) as f64);
        out.delta
            .push(beta.powi(-(t as i32)) * (wp as f64 - wm as f64));
    }
    out
}

/// Explicit rooted hypertree with spins. Vertex 0 is the root; every
/// hyperedge is a parent vertex plus its d-1 children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedSpinTree {
    pub spins: Vec<i8>,
    /// children[v] lists the child hyperedges of v, each as d-1 child ids.
    pub children: Vec<Vec<Vec<u32>>>,
    pub depth: usize,
}

impl RootedSpinTree {
    pub fn num_vertices(&self) -> usize {
        self.spins.len()
    }

    /// Per-generation counts, in the same shape as the counts-mode sampler.
    pub fn generation_counts(&self, alpha_beta: (f64, f64)) -> GenerationCounts {
        let (alpha, beta) = alpha_beta;
        let d = self
            .children
            .iter()
            .flatten()
            .map(|e| e.len() + 1)
            .next()
            .unwrap_or(2);
        let mut gen_of = vec![0usize; self.spins.len()];
        let mut wp = vec![0u64; self.depth + 1];
        let mut wm = vec![0u64; self.depth + 1];
        let mut by_type: Vec<Vec<u64>> = (0..=self.depth)
            .map(|t| if t == 0 { Vec::new() } else { vec![0u64; d] })
            .collect();
        wp[0] = (self.spins[0] == 1) as u64;
        wm[0] = (self.spins[0] == -1) as u64;
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            let t = gen_of[v as usize];
            for edge in &self.children[v as usize] {
                let r = edge
                    .iter()
                    .filter(|&&c| self.spins[c as usize] == self.spins[v as usize])
                    .count();
                by_type[t + 1][r] += 1;
                for &c in edge {
                    gen_of[c as usize] = t + 1;
                    if self.spins[c as usize] == 1 {
                        wp[t + 1] += 1;
                    } else {
                        wm[t + 1] += 1;
                    }
                    stack.push(c);
                }
            }
        }
        let m = wp
            .iter()
            .zip(&wm)
            .enumerate()
            .map(|(t, (&p, &q))| alpha.powi(-(t as i32)) * (p + q) as f64)
            .collect();
        let delta = wp
            .iter()
            .zip(&wm)
            .enumerate()
            .map(|(t, (&p, &q))| beta.powi(-(t as i32)) * (p as f64 - q as f64))
            .collect();
        GenerationCounts {
            w_plus: wp,
            w_minus: wm,
            w_by_type: by_type,
            m,
            delta,
        }
    }
}

const TREE_MODE_MAX_EXPECTED: f64 = 1e6;

/// Tree-mode sampler: materializes the hypertree down to `depth`.
pub fn sample_tree(config: &GWConfig, rng: &mut ChaCha8Rng) -> Result<RootedSpinTree> {
    if config.alpha().powi(config.depth as i32) > TREE_MODE_MAX_EXPECTED {
        return Err(Error::SizeGuard(format!(
            "tree mode limited to alpha^depth <= {TREE_MODE_MAX_EXPECTED:e}"
        )));
    }
    let d = config.d;
    let probs = config.type_probabilities();
    let edge_rate = config.alpha() / (d as f64 - 1.0);
    let mut spins = vec![config.root_spin];
    let mut children: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    let mut frontier = vec![0u32];
    for _t in 1..=config.depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let tau = spins[v as usize];
            let k = poisson_draw(rng, edge_rate);
            for _ in 0..k {
                let roll: f64 = rng.random();
                let mut acc = 0.0;
                let mut r = d - 1;
                for (cand, &p) in probs.iter().enumerate() {
                    acc += p;
                    if roll < acc {
                        r = cand;
                        break;
                    }
                }
                // a uniformly random r-subset of the d-1 children shares tau
                let same: Vec<usize> = index::sample(rng, d - 1, r).into_iter().collect();
                let mut edge = Vec::with_capacity(d - 1);
                for slot in 0..d - 1 {
                    let spin = if same.contains(&slot) { tau } else { -tau };
                    let id = spins.len() as u32;
                    spins.push(spin);
                    children.push(Vec::new());
                    edge.push(id);
                    next.push(id);
                }
                children[v as usize].push(edge);
            }
        }
        frontier = next;
    }
    Ok(RootedSpinTree {
        spins,
        children,
        depth: config.depth,
    })
}

/// Monte Carlo martingale statistics over independent replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleStats {
    pub mean_m: Vec<f64>,
    pub se_m: Vec<f64>,
    pub var_m: Vec<f64>,
    pub mean_delta: Vec<f64>,
    pub se_delta: Vec<f64>,
    pub var_delta: Vec<f64>,
    /// Mean of Delta_depth^2, the truncation proxy for E[Delta_inf^2].
    pub est_e_delta_inf_sq: f64,
    pub se_e_delta_inf_sq: f64,
    pub n_samples: usize,
}

pub fn martingale_stats(config: &GWConfig, n_samples: usize) -> MartingaleStats {
    let t_len = config.depth + 1;
    // replicate trajectories computed in parallel, reduced in index order so
    // the result is independent of the thread schedule
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = config.replicate_rng(idx);
            let c = sample_counts(config, &mut rng);
            (c.m, c.delta)
        })
        .collect();
    let mut sum_m = vec![0.0; t_len];
    let mut sum_m2 = vec![0.0; t_len];
    let mut sum_d = vec![0.0; t_len];
    let mut sum_d2 = vec![0.0; t_len];
    let mut sum_d4_last = 0.0;
    for (m, delta) in &rows {
        for t in 0..t_len {
            sum_m[t] += m[t];
            sum_m2[t] += m[t] * m[t];
            sum_d[t] += delta[t];
            sum_d2[t] += delta[t] * delta[t];
        }
        let dl = delta[t_len - 1];
        sum_d4_last += dl * dl * dl * dl;
    }
    let n = n_samples as f64;
    let mut out = MartingaleStats {
        mean_m: Vec::with_capacity(t_len),
        se_m: Vec::with_capacity(t_len),
        var_m: Vec::with_capacity(t_len),
        mean_delta: Vec::with_capacity(t_len),
        se_delta: Vec::with_capacity(t_len),
        var_delta: Vec::with_capacity(t_len),
        est_e_delta_inf_sq: sum_d2[t_len - 1] / n,
        se_e_delta_inf_sq: 0.0,
        n_samples,
    };
    for t in 0..t_len {
        let mean_m = sum_m[t] / n;
        let var_m = (sum_m2[t] / n - mean_m * mean_m).max(0.0) * n / (n - 1.0);
        out.mean_m.push(mean_m);
        out.var_m.push(var_m);
        out.se_m.push((var_m / n).sqrt());
        let mean_d = sum_d[t] / n;
        let var_d = (sum_d2[t] / n - mean_d * mean_d).max(0.0) * n / (n - 1.0);
        out.mean_delta.push(mean_d);
        out.var_delta.push(var_d);
        out.se_delta.push((var_d / n).sqrt());
    }
    let m2 = out.est_e_delta_inf_sq;
    out.se_e_delta_inf_sq = ((sum_d4_last / n - m2 * m2).max(0.0) / n).sqrt();
    out
}

/// r-hat = P(Delta_depth >= tau) - P(-Delta_depth >= tau), with the estimate
/// re-evaluated at tau +- 1e-3 (finite-depth laws have atoms, so sensitivity
/// to the continuity-point caveat is surfaced numerically).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct REstimate {
    pub r_hat: f64,
    pub se: f64,
    pub r_at_tau_minus: f64,
    pub r_at_tau_plus: f64,
}

pub fn estimate_r(
    config: &GWConfig,
    tau: f64,
    n_samples: usize,
    depth: usize,
) -> Result<REstimate> {
    let (alpha, beta) = (config.alpha(), config.beta());
    if beta * beta <= alpha {
        return Err(Error::InvalidParams(
            "estimate_r needs beta^2 > alpha (Delta_t not uniformly integrable below threshold)"
                .into(),
        ));
    }
    let cfg = GWConfig { depth, ..*config };
    let eps = 1e-3;
    let stats: Vec<(f64, f64, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = cfg.replicate_rng(idx);
            let c = sample_counts(&cfg, &mut rng);
            let dl = c.delta[depth];
            let g = |thr: f64| ((dl >= thr) as i8 - (-dl >= thr) as i8) as f64;
            (g(tau), g(tau - eps), g(tau + eps))
        })
        .collect();
    let n = n_samples as f64;
    let sum: f64 = stats.iter().map(|s| s.0).sum();
    let sum2: f64 = stats.iter().map(|s| s.0 * s.0).sum();
    let r_hat = sum / n;
    let var = (sum2 / n - r_hat * r_hat).max(0.0);
    Ok(REstimate {
        r_hat,
        se: (var / n).sqrt(),
        r_at_tau_minus: stats.iter().map(|s| s.1).sum::<f64>() / n,
        r_at_tau_plus: stats.iter().map(|s| s.2).sum::<f64>() / n,
    })
}

/// Exact total-variation distance between Bin(m, c/n) and Pois(c), summed
/// until both tails are below 1e-13 (remainder < 1e-12). The c = 0 edge is a
/// point mass on both sides.
pub fn binom_pois_tv(m: u64, n: u64, c: f64) -> Result<f64> {
    if n == 0 || c < 0.0 || c / n as f64 > 1.0 {
        return Err(Error::InvalidParams(format!(
            "need 0 <= c/n <= 1, got c = {c}, n = {n}"
        )));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let p = c / n as f64;
    let mut bin = (1.0 - p).powi(m as i32); // k = 0
    let mut pois = (-c).exp();
    let mut cum_b = bin;
    let mut cum_p = pois;
    let mut tv = 0.5 * (bin - pois).abs();
    let ratio = p / (1.0 - p);
    let mut k = 0u64;
    while cum_b < 1.0 - 1e-13 || cum_p < 1.0 - 1e-13 {
        k += 1;
        bin = if k <= m {
            bin * (m - k + 1) as f64 / k as f64 * ratio
        } else {
            0.0
        };
        pois = pois * c / k as f64;
        cum_b += bin;
        cum_p += pois;
        tv += 0.5 * (bin - pois).abs();
        if k > m && pois < 1e-300 {
            break;
        }
    }
    Ok(tv)
}

/// Offspring counts on the hypergraph side: for every vertex v at distance t
/// from i, X_v^(r) counts hyperedges at v whose other d-1 vertices all sit at
/// distance t+1, with r of them sharing v's spin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffspringCounts {
    /// per shell vertex: counts indexed by r = 0..=d-1
    pub per_vertex: Vec<Vec<u64>>,
    /// per r: histogram value -> number of shell vertices
    pub histograms: Vec<BTreeMap<u64, u64>>,
}

pub fn offspring_counts(
    h: &Hypergraph,
    spins: &SpinAssignment,
    i: usize,
    t: usize,
) -> OffspringCounts {
    let lv = localstats::explore(h, i, t + 1);
    let d = h.d();
    let mut per_vertex = Vec::new();
    for &v in &lv.by_level[t] {
        let mut counts = vec![0u64; d];
        for &ei in h.incident(v as usize) {
            let edge = h.edge(ei as usize);
            let mut r = 0usize;
            let mut all_next = true;
            for &w in edge {
                if w == v {
                    continue;
                }
                if lv.level[w as usize] != t as i32 + 1 {
                    all_next = false;
                    break;
                }
                if spins.get(w as usize) == spins.get(v as usize) {
                    r += 1;
                }
            }
            if all_next {
                counts[r] += 1;
            }
        }
        per_vertex.push(counts);
    }
    let mut histograms = vec![BTreeMap::new(); d];
    for counts in &per_vertex {
        for (r, &c) in counts.iter().enumerate() {
            *histograms[r].entry(c).or_insert(0) += 1;
        }
    }
    OffspringCounts {
        per_vertex,
        histograms,
    }
}

/// Truncated neighborhood of `root` as a rooted spin tree, or None when the
/// neighborhood contains a cycle within the given depth.
pub fn extract_neighborhood_tree(
    h: &Hypergraph,
    spins: &SpinAssignment,
    root: usize,
    depth: usize,
) -> Option<RootedSpinTree> {
    let lv = localstats::explore(h, root, depth);
    if lv.truncation_cycles > 0 {
        return None;
    }
    let mut id_of = vec![u32::MAX; h.n()];
    let mut spins_out = vec![spins.get(root)];
    let mut children: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    id_of[root] = 0;
    let mut via_edge = vec![u32::MAX; h.n()];
    let mut frontier = vec![root as u32];
    for t in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            for &ei in h.incident(v as usize) {
                if ei == via_edge[v as usize] {
                    continue;
                }
                // cycle-free: every other vertex of this edge is one level down
                let mut edge_children = Vec::with_capacity(h.d() - 1);
                for &w in h.edge(ei as usize) {
                    if w == v {
                        continue;
                    }
                    debug_assert_eq!(lv.level[w as usize], t as i32 + 1);
                    let id = spins_out.len() as u32;
                    id_of[w as usize] = id;
                    spins_out.push(spins.get(w as usize));
                    children.push(Vec::new());
                    via_edge[w as usize] = ei;
                    edge_children.push(id);
                    next.push(w);
                }
                children[id_of[v as usize] as usize].push(edge_children);
            }
        }
        frontier = next;
    }
    Some(RootedSpinTree {
        spins: spins_out,
        children,
        depth,
    })
}

/// Canonical string of a rooted spin tree: equal strings iff the trees are
/// spin-preserving isomorphic. Vertices canonicalize to their spin plus the
/// sorted multiset of their hyperedges' forms; hyperedges to the sorted
/// multiset of their children's forms. Cyclic or shared child references are
/// rejected.
pub fn canonical_form(tree: &RootedSpinTree) -> Result<String> {
    let mut visited = vec![false; tree.num_vertices()];
    canonical_rec(tree, 0, &mut visited)
}

fn canonical_rec(tree: &RootedSpinTree, v: u32, visited: &mut [bool]) -> Result<String> {
    let vi = v as usize;
    if vi >= tree.num_vertices() {
        return Err(Error::Malformed(format!("child id {v} out of range")));
    }
    if visited[vi] {
        return Err(Error::Malformed("cyclic or shared child reference".into()));
    }
    visited[vi] = true;
    let mut edge_forms: Vec<String> = Vec::with_capacity(tree.children[vi].len());
    for edge in &tree.children[vi] {
        let mut child_forms: Vec<String> = edge
            .iter()
            .map(|&c| canonical_rec(tree, c, visited))
            .collect::<Result<_>>()?;
        child_forms.sort_unstable();
        edge_forms.push(format!("({})", child_forms.join(",")));
    }
    edge_forms.sort_unstable();
    let spin = if tree.spins[vi] == 1 { '+' } else { '-' };
    Ok(format!("{spin}[{}]", edge_forms.join("")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::sample_hsbm;
    use crate::model::ModelParams;

    fn cfg(a: f64, b: f64, d: usize, depth: usize, seed: u64) -> GWConfig {
        GWConfig::new(a, b, d, 1, depth, seed).unwrap()
    }

    #[test]
    fn type_probabilities_sum_to_one() {
        for &(d, a, b) in &[
            (2usize, 5.0, 1.0),
            (3, 10.0, 2.0),
            (4, 9.0, 0.1),
            (6, 3.0, 3.0),
        ] {
            let c = cfg(a, b, d, 1, 0);
            let total: f64 = c.type_probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "d={d}: {total}");
        }
    }

    #[test]
    fn type_probabilities_reference_point() {
        let c = cfg(10.0, 2.0, 3, 1, 0);
        let p = c.type_probabilities();
        assert!((p[2] - 0.625).abs() < 1e-15);
        assert!((p[1] - 0.25).abs() < 1e-15);
        assert!((p[0] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn counts_root_generation() {
        let c = cfg(10.0, 2.0, 3, 0, 1);
        let mut rng = c.replicate_rng(0);
        let g = sample_counts(&c, &mut rng);
        assert_eq!(g.w_plus, vec![1]);
        assert_eq!(g.w_minus, vec![0]);
        assert_eq!(g.m[0], 1.0);
        assert_eq!(g.delta[0], 1.0);

        let neg = GWConfig::new(10.0, 2.0, 3, -1, 0, 1).unwrap();
        let g = sample_counts(&neg, &mut rng);
        assert_eq!((g.w_plus[0], g.w_minus[0]), (0, 1));
        assert_eq!(g.delta[0], -1.0);
    }

    #[test]
    fn rollup_identity_holds_exactly() {
        let c = cfg(10.0, 2.0, 4, 6, 7);
        for idx in 0..50 {
            let mut rng = c.replicate_rng(idx);
            let g = sample_counts(&c, &mut rng);
            for t in 1..=c.depth {
                let wp: u64 = g.w_by_type[t]
                    .iter()
                    .enumerate()
                    .map(|(r, &w)| r as u64 * w)
                    .sum();
                let wm: u64 = g.w_by_type[t]
                    .iter()
                    .enumerate()
                    .map(|(r, &w)| (c.d - 1 - r) as u64 * w)
                    .sum();
                assert_eq!(g.w_plus[t], wp);
                assert_eq!(g.w_minus[t], wm);
            }
        }
    }

    #[test]
    fn equal_rates_still_branch_at_alpha() {
        // a = b merges the type rates; the population still grows by alpha
        let c = GWConfig::new(4.0, 4.0, 3, 1, 4, 11).unwrap();
        let n = 20_000;
        let mut total = vec![0f64; 5];
        for idx in 0..n {
            let mut rng = c.replicate_rng(idx);
            let g = sample_counts(&c, &mut rng);
            for t in 0..=4 {
                total[t] += (g.w_plus[t] + g.w_minus[t]) as f64;
            }
        }
        let alpha = c.alpha();
        for t in 1..=4usize {
            let ratio = total[t] / total[t - 1];
            assert!(
                (ratio - alpha).abs() < 0.1 * alpha,
                "t {t}: growth ratio {ratio} vs alpha {alpha}"
            );
        }
    }

    #[test]
    fn tree_sampler_respects_guard() {
        let c = cfg(10.0, 2.0, 3, 10, 0); // 8^10 > 1e6
        let mut rng = c.replicate_rng(0);
        assert!(sample_tree(&c, &mut rng).is_err());
    }

    #[test]
    fn tree_and_counts_agree_in_distribution() {
        // two-sample comparison of the (W+_1, W-_1) histograms
        let c = cfg(10.0, 2.0, 3, 1, 313);
        let n = 30_000u64;
        let mut hist_counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        let mut hist_tree: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        for idx in 0..n {
            let mut rng = c.replicate_rng(idx);
            let g = sample_counts(&c, &mut rng);
            *hist_counts.entry((g.w_plus[1], g.w_minus[1])).or_insert(0) += 1;
            let mut rng = c.replicate_rng(idx + n);
            let tree = sample_tree(&c, &mut rng).unwrap();
            let g = tree.generation_counts((c.alpha(), c.beta()));
            *hist_tree.entry((g.w_plus[1], g.w_minus[1])).or_insert(0) += 1;
        }
        let keys: std::collections::BTreeSet<_> =
            hist_counts.keys().chain(hist_tree.keys()).collect();
        let tv: f64 = keys
            .iter()
            .map(|k| {
                let a = *hist_counts.get(k).unwrap_or(&0) as f64 / n as f64;
                let b = *hist_tree.get(k).unwrap_or(&0) as f64 / n as f64;
                (a - b).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.05, "two-sampler TV {tv}");
    }

    #[test]
    fn martingale_means_and_variances() {
        let c = cfg(10.0, 2.0, 3, 6, 99);
        let stats = martingale_stats(&c, 40_000);
        for t in 1..=6 {
            assert!(
                (stats.mean_m[t] - 1.0).abs() <= 3.0 * stats.se_m[t],
                "t {t}: mean M {} se {}",
                stats.mean_m[t],
                stats.se_m[t]
            );
            assert!(
                (stats.mean_delta[t] - 1.0).abs() <= 3.0 * stats.se_delta[t],
                "t {t}: mean Delta {} se {}",
                stats.mean_delta[t],
                stats.se_delta[t]
            );
        }
        // closed forms at t = 1: Var(M_1) = 0.25, Var(Delta_1) = 0.75
        assert!((stats.var_m[1] - 0.25).abs() < 0.025, "{}", stats.var_m[1]);
        assert!(
            (stats.var_delta[1] - 0.75).abs() < 0.075,
            "{}",
            stats.var_delta[1]
        );
    }

    #[test]
    fn martingale_stats_deterministic() {
        let c = cfg(10.0, 2.0, 3, 4, 123);
        let s1 = martingale_stats(&c, 5_000);
        let s2 = martingale_stats(&c, 5_000);
        assert_eq!(s1, s2);
    }

    #[test]
    fn estimate_r_basics() {
        let c = cfg(10.0, 2.0, 3, 8, 5);
        assert!(estimate_r(&GWConfig::new(4.0, 4.0, 3, 1, 8, 5).unwrap(), 0.0, 100, 8).is_err());
        let far = estimate_r(&c, 1e9, 2_000, 8).unwrap();
        assert_eq!(far.r_hat, 0.0);
        let low = estimate_r(&c, -1e9, 2_000, 8).unwrap();
        assert_eq!(low.r_hat, 0.0); // both indicator probabilities are 1
        let mid = estimate_r(&c, 0.0, 20_000, 8).unwrap();
        assert!(
            mid.r_hat > 3.0 * mid.se,
            "r_hat {} se {}",
            mid.r_hat,
            mid.se
        );
        assert!(mid.r_hat <= 1.0);
    }

    #[test]
    fn binom_pois_tv_reference_points() {
        let tv = binom_pois_tv(1000, 1000, 1.0).unwrap();
        assert!(tv < 5.0 / 1000.0, "tv {tv}");
        assert!(tv > 0.0);
        let tv_head = binom_pois_tv(100, 100, 1.0).unwrap();
        let tv_tail = binom_pois_tv(10_000, 10_000, 1.0).unwrap();
        assert!(tv_head > tv && tv > tv_tail, "{tv_head} {tv} {tv_tail}");
        assert_eq!(binom_pois_tv(50, 100, 0.0).unwrap(), 0.0);
        assert!(binom_pois_tv(10, 5, 50.0).is_err());
    }

    #[test]
    fn binom_pois_tv_matches_direct_sum() {
        let (m, n, c) = (20u64, 40u64, 2.0);
        let p = c / n as f64;
        let mut direct = 0.0;
        for k in 0..=200u64 {
            let bin = if k <= m {
                binomial_f64(m, k) * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32)
            } else {
                0.0
            };
            let mut pois = (-c).exp();
            for j in 1..=k {
                pois *= c / j as f64;
            }
            direct += 0.5 * (bin - pois).abs();
        }
        let tv = binom_pois_tv(m, n, c).unwrap();
        assert!((tv - direct).abs() < 1e-10, "{tv} vs {direct}");
    }

    #[test]
    fn offspring_counts_isolated_vertex() {
        let g = Hypergraph::new(4, 3, vec![vec![1, 2, 3]]).unwrap();
        let spins = SpinAssignment::new(vec![1, 1, -1, 1]).unwrap();
        let oc = offspring_counts(&g, &spins, 0, 0);
        assert_eq!(oc.per_vertex, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn offspring_counts_two_edge_path() {
        let g = Hypergraph::new(5, 3, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        let spins = SpinAssignment::new(vec![1, 1, 1, -1, 1]).unwrap();
        let oc = offspring_counts(&g, &spins, 0, 0);
        // root 0: one edge, both children (1, 2) share spin +: r = 2
        assert_eq!(oc.per_vertex, vec![vec![0, 0, 1]]);
        let oc1 = offspring_counts(&g, &spins, 0, 1);
        // level 1 = {1, 2}; vertex 2 has one downward edge with children
        // {3, 4} of spins (-,+): r = 1; vertex 1 has none
        let total_r1: u64 = oc1.per_vertex.iter().map(|c| c[1]).sum();
        assert_eq!(total_r1, 1);
    }

    #[test]
    fn canonical_form_multiset_invariance() {
        let t1 = RootedSpinTree {
            spins: vec![1, 1, -1],
            children: vec![vec![vec![1, 2]], Vec::new(), Vec::new()],
            depth: 1,
        };
        let t2 = RootedSpinTree {
            spins: vec![1, -1, 1],
            children: vec![vec![vec![1, 2]], Vec::new(), Vec::new()],
            depth: 1,
        };
        assert_eq!(canonical_form(&t1).unwrap(), canonical_form(&t2).unwrap());
        let t3 = RootedSpinTree {
            spins: vec![1, 1, 1],
            children: vec![vec![vec![1, 2]], Vec::new(), Vec::new()],
            depth: 1,
        };
        assert_ne!(canonical_form(&t1).unwrap(), canonical_form(&t3).unwrap());
    }

    #[test]
    fn canonical_form_edge_order_invariance() {
        // permuting hyperedge lists and child order never changes the form
        let c = cfg(6.0, 2.0, 3, 3, 42);
        for idx in 0..200 {
            let mut rng = c.replicate_rng(idx);
            let tree = sample_tree(&c, &mut rng).unwrap();
            let base = canonical_form(&tree).unwrap();
            let mut shuffled = tree.clone();
            for edges in shuffled.children.iter_mut() {
                edges.reverse();
                for e in edges.iter_mut() {
                    e.reverse();
                }
            }
            assert_eq!(canonical_form(&shuffled).unwrap(), base, "replicate {idx}");
        }
    }

    #[test]
    fn canonical_form_rejects_cycles() {
        let bad = RootedSpinTree {
            spins: vec![1, -1],
            children: vec![vec![vec![1]], vec![vec![0]]],
            depth: 2,
        };
        assert!(canonical_form(&bad).is_err());
    }

    #[test]
    fn extract_tree_from_hypergraph() {
        let g = Hypergraph::new(5, 3, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        let spins = SpinAssignment::new(vec![1, -1, 1, -1, 1]).unwrap();
        let tree = extract_neighborhood_tree(&g, &spins, 0, 2).unwrap();
        assert_eq!(tree.num_vertices(), 5);
        assert_eq!(tree.spins[0], 1);
        let counts = tree.generation_counts((8.0, 4.0));
        assert_eq!(counts.w_plus[1] + counts.w_minus[1], 2);
        assert_eq!(counts.w_plus[2] + counts.w_minus[2], 2);

        let cyclic = Hypergraph::new(4, 3, vec![vec![0, 1, 2], vec![0, 1, 3]]).unwrap();
        let spins4 = SpinAssignment::new(vec![1, 1, 1, 1]).unwrap();
        assert!(extract_neighborhood_tree(&cyclic, &spins4, 0, 1).is_none());
    }

    fn form_hist_gw(c: &GWConfig, n: u64, idx_base: u64) -> BTreeMap<String, u64> {
        let mut hist: BTreeMap<String, u64> = BTreeMap::new();
        for idx in 0..n {
            let mut rng = c.replicate_rng(idx_base + idx);
            let mut c_idx = *c;
            c_idx.root_spin = if rng.random::<bool>() { 1 } else { -1 };
            let tree = sample_tree(&c_idx, &mut rng).unwrap();
            *hist.entry(canonical_form(&tree).unwrap()).or_insert(0) += 1;
        }
        hist
    }

    fn hist_tv(a: &BTreeMap<String, u64>, b: &BTreeMap<String, u64>, n: f64) -> f64 {
        let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
        keys.iter()
            .map(|k| {
                (*a.get(*k).unwrap_or(&0) as f64 / n - *b.get(*k).unwrap_or(&0) as f64 / n).abs()
            })
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn depth1_forms_close_to_gw_law() {
        // smoke version of the coupling comparison: the HSBM-vs-GW empirical
        // TV should exceed the same-size GW-vs-GW' sampling noise by little
        let n = 2000;
        let p = ModelParams::new(n, 3, 10.0, 2.0, 77).unwrap();
        let (g, spins) = sample_hsbm(&p).unwrap();
        let mut hsbm_hist: BTreeMap<String, u64> = BTreeMap::new();
        for root in 0..n {
            let key = match extract_neighborhood_tree(&g, &spins, root, 1) {
                Some(t) => canonical_form(&t).unwrap(),
                None => "NONTREE".to_string(),
            };
            *hsbm_hist.entry(key).or_insert(0) += 1;
        }
        let c = cfg(10.0, 2.0, 3, 1, 555);
        let gw_hist = form_hist_gw(&c, n as u64, 0);
        let gw_null = form_hist_gw(&c, n as u64, 1_000_000);
        let tv = hist_tv(&hsbm_hist, &gw_hist, n as f64);
        let null = hist_tv(&gw_null, &gw_hist, n as f64);
        assert!(tv - null < 0.05, "depth-1 TV {tv} vs sampling null {null}");
    }
}
