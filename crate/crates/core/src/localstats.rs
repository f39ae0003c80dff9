//! BFS neighborhood statistics: growth sequences S_t and D_t, cycle census,
//! connected s-subset counts, and the two-type growth-matrix predictions.

use crate::hypergraph::{Hypergraph, SpinAssignment};
use crate::model::DerivedRates;
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::HashSet;

/// Per-vertex neighborhood profile up to depth l. Distances are hypergraph
/// walk distances; levels partition the reachable vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodProfile {
    pub vertex: usize,
    /// S_t = |V_t(i)| for t = 0..=l.
    pub s: Vec<u64>,
    /// D_t = sum of spins over V_t(i).
    pub d: Vec<i64>,
    pub u_plus: Vec<u64>,
    pub u_minus: Vec<u64>,
    /// Independent cycles inside V_{<=l}(i) (cyclomatic number of the
    /// explored incidence structure).
    pub cycle_count: u64,
    pub tangled: bool,
    pub two_cycles: bool,
}

/// Level sets of the BFS exploration from one vertex.
pub(crate) struct Levels {
    /// level[v] = distance from the root, or -1 if beyond depth l.
    pub(crate) level: Vec<i32>,
    /// vertices grouped by level, 0..=l.
    pub(crate) by_level: Vec<Vec<u32>>,
    /// cycles with all pivots inside V_{<=l} (tangle semantics): expansion
    /// overlaps plus boundary edges meeting the outer shell twice.
    pub(crate) cycle_count: u64,
    /// cycles visible in the *truncated* sub-hypergraph: expansion overlaps
    /// plus edges lying entirely inside the outer shell. Boundary edges that
    /// stick out of V_{<=l} are no obstruction to tree isomorphism.
    pub(crate) truncation_cycles: u64,
}

pub(crate) fn explore(h: &Hypergraph, root: usize, l: usize) -> Levels {
    let mut level = vec![-1i32; h.n()];
    let mut processed = vec![false; h.num_edges()];
    let mut by_level: Vec<Vec<u32>> = Vec::with_capacity(l + 1);
    level[root] = 0;
    by_level.push(vec![root as u32]);
    let mut cycle_count = 0u64;
    let mut truncation_cycles = 0u64;

    for t in 1..=l as i32 {
        let mut next = Vec::new();
        for &u in &by_level[(t - 1) as usize] {
            for &ei in h.incident(u as usize) {
                if processed[ei as usize] {
                    continue;
                }
                processed[ei as usize] = true;
                let edge = h.edge(ei as usize);
                // every labeled vertex beyond the first closes a cycle
                let labeled = edge.iter().filter(|&&w| level[w as usize] >= 0).count();
                cycle_count += labeled as u64 - 1;
                truncation_cycles += labeled as u64 - 1;
                for &w in edge {
                    if level[w as usize] < 0 {
                        level[w as usize] = t;
                        next.push(w);
                    }
                }
            }
        }
        by_level.push(next);
    }

    // edges lying entirely in the outermost shell still close cycles there
    for &u in &by_level[l] {
        for &ei in h.incident(u as usize) {
            if processed[ei as usize] {
                continue;
            }
            processed[ei as usize] = true;
            let edge = h.edge(ei as usize);
            let in_shell = edge
                .iter()
                .filter(|&&w| level[w as usize] == l as i32)
                .count();
            if in_shell >= 2 {
                cycle_count += in_shell as u64 - 1;
            }
            if in_shell == h.d() {
                truncation_cycles += 1;
            }
        }
    }

    Levels {
        level,
        by_level,
        cycle_count,
        truncation_cycles,
    }
}

/// BFS profile of vertex i to depth l.
pub fn bfs_profile(
    h: &Hypergraph,
    spins: &SpinAssignment,
    i: usize,
    l: usize,
) -> NeighborhoodProfile {
    assert_eq!(spins.len(), h.n());
    let lv = explore(h, i, l);
    let mut s = Vec::with_capacity(l + 1);
    let mut d = Vec::with_capacity(l + 1);
    let mut u_plus = Vec::with_capacity(l + 1);
    let mut u_minus = Vec::with_capacity(l + 1);
    for shell in &lv.by_level {
        let plus = shell
            .iter()
            .filter(|&&v| spins.get(v as usize) == 1)
            .count() as u64;
        let minus = shell.len() as u64 - plus;
        s.push(shell.len() as u64);
        u_plus.push(plus);
        u_minus.push(minus);
        d.push(plus as i64 - minus as i64);
    }
    NeighborhoodProfile {
        vertex: i,
        s,
        d,
        u_plus,
        u_minus,
        cycle_count: lv.cycle_count,
        tangled: lv.cycle_count >= 1,
        two_cycles: lv.cycle_count >= 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TangleCensus {
    /// Number of vertices whose depth-l neighborhood contains a cycle.
    pub tangled_count: u64,
    /// True iff no vertex sees two or more cycles within depth l.
    pub l_tangle_free: bool,
}

pub fn tangle_census(h: &Hypergraph, spins: &SpinAssignment, l: usize) -> TangleCensus {
    let profiles: Vec<(bool, bool)> = (0..h.n())
        .into_par_iter()
        .map(|i| {
            let p = bfs_profile(h, spins, i, l);
            (p.tangled, p.two_cycles)
        })
        .collect();
    TangleCensus {
        tangled_count: profiles.iter().filter(|p| p.0).count() as u64,
        l_tangle_free: !profiles.iter().any(|p| p.1),
    }
}

/// Connected s-subsets of the level-k shell around i: size-s subsets
/// contained in a hyperedge whose other d-s vertices all lie at level k-1,
/// bucketed by the number r of +1 spins (result index r = 0..=s).
pub fn connected_subsets(
    h: &Hypergraph,
    spins: &SpinAssignment,
    i: usize,
    k: usize,
    s: usize,
) -> Result<Vec<u64>> {
    if s < 1 || s > h.d() - 1 {
        return Err(Error::InvalidParams(format!(
            "connected_subsets needs 1 <= s <= d-1, got s = {s}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidParams(
            "connected_subsets needs k >= 1".into(),
        ));
    }
    let lv = explore(h, i, k);
    let mut counts = vec![0u64; s + 1];
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    for &u in &lv.by_level[k - 1] {
        'edges: for &ei in h.incident(u as usize) {
            let edge = h.edge(ei as usize);
            let mut inner = 0usize;
            let mut outer: Vec<u32> = Vec::with_capacity(s);
            for &w in edge {
                let lw = lv.level[w as usize];
                if lw == k as i32 - 1 {
                    inner += 1;
                } else if lw < 0 || lw == k as i32 {
                    outer.push(w);
                } else {
                    continue 'edges; // touches V_{<= k-2}
                }
            }
            if inner == h.d() - s && outer.len() == s && seen.insert(outer.clone()) {
                let r = outer
                    .iter()
                    .filter(|&&w| spins.get(w as usize) == 1)
                    .count();
                counts[r] += 1;
            }
        }
    }
    Ok(counts)
}

/// The two-type growth matrix M = 1/2 [[a+b, a-b], [a-b, a+b]] in the
/// (alpha, beta) parametrization, with its closed-form powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthMatrix {
    pub alpha: f64,
    pub beta: f64,
}

impl GrowthMatrix {
    pub fn new(rates: &DerivedRates) -> Self {
        Self {
            alpha: rates.alpha,
            beta: rates.beta,
        }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.power(1)
    }

    /// M^k = 1/2 [[a^k + b^k, a^k - b^k], [a^k - b^k, a^k + b^k]].
    pub fn power(&self, k: u32) -> [[f64; 2]; 2] {
        let ak = self.alpha.powi(k as i32);
        let bk = self.beta.powi(k as i32);
        [
            [(ak + bk) / 2.0, (ak - bk) / 2.0],
            [(ak - bk) / 2.0, (ak + bk) / 2.0],
        ]
    }

    pub fn apply_power(&self, u: [f64; 2], k: u32) -> [f64; 2] {
        let m = self.power(k);
        [
            m[0][0] * u[0] + m[0][1] * u[1],
            m[1][0] * u[0] + m[1][1] * u[1],
        ]
    }
}

/// M^steps u, the predicted (U+, U-) after `steps` generations.
pub fn growth_prediction(rates: &DerivedRates, u: [f64; 2], steps: u32) -> [f64; 2] {
    GrowthMatrix::new(rates).apply_power(u, steps)
}

/// Residuals of the quasi-deterministic growth claims: S_t vs alpha^{t-l} S_l
/// and D_t vs beta^{t-l} D_l, raw and normalized by alpha^{t/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiResiduals {
    pub s_resid: Vec<f64>,
    pub d_resid: Vec<f64>,
    pub s_resid_norm: Vec<f64>,
    pub d_resid_norm: Vec<f64>,
}

pub fn quasi_residuals(
    profile: &NeighborhoodProfile,
    rates: &DerivedRates,
    l: usize,
) -> QuasiResiduals {
    assert!(profile.s.len() > l, "profile shallower than l");
    let s_l = profile.s[l] as f64;
    let d_l = profile.d[l] as f64;
    let mut out = QuasiResiduals {
        s_resid: Vec::with_capacity(l + 1),
        d_resid: Vec::with_capacity(l + 1),
        s_resid_norm: Vec::with_capacity(l + 1),
        d_resid_norm: Vec::with_capacity(l + 1),
    };
    for t in 0..=l {
        let scale = rates.alpha.powf(t as f64 / 2.0);
        let sr = profile.s[t] as f64 - rates.alpha.powi(t as i32 - l as i32) * s_l;
        let dr = profile.d[t] as f64 - rates.beta.powi(t as i32 - l as i32) * d_l;
        out.s_resid.push(sr);
        out.d_resid.push(dr);
        out.s_resid_norm.push(sr / scale);
        out.d_resid_norm.push(dr / scale);
    }
    out
}

/// The vector (S_l(1), ..., S_l(n)).
pub fn s_vector(h: &Hypergraph, l: usize) -> Vec<f64> {
    (0..h.n())
        .into_par_iter()
        .map(|i| explore(h, i, l).by_level[l].len() as f64)
        .collect()
}

/// The vector (D_l(1), ..., D_l(n)).
pub fn d_vector(h: &Hypergraph, spins: &SpinAssignment, l: usize) -> Vec<f64> {
    (0..h.n())
        .into_par_iter()
        .map(|i| {
            explore(h, i, l).by_level[l]
                .iter()
                .map(|&v| spins.get(v as usize) as i64)
                .sum::<i64>() as f64
        })
        .collect()
}

/// Both growth vectors in one BFS pass per vertex.
pub fn sd_vectors(h: &Hypergraph, spins: &SpinAssignment, l: usize) -> (Vec<f64>, Vec<f64>) {
    let pairs: Vec<(f64, f64)> = (0..h.n())
        .into_par_iter()
        .map(|i| {
            let shell = &explore(h, i, l).by_level[l];
            let d: i64 = shell.iter().map(|&v| spins.get(v as usize) as i64).sum();
            (shell.len() as f64, d as f64)
        })
        .collect();
    pairs.into_iter().unzip()
}

/// The thresholding statistic (1/n) sum_i beta^{-2l} D_l(i)^2, which
/// concentrates on the finite-depth martingale moment E[Delta_l^2].
pub fn threshold_statistic(
    h: &Hypergraph,
    spins: &SpinAssignment,
    rates: &DerivedRates,
    l: usize,
) -> f64 {
    let (_, d) = sd_vectors(h, spins, l);
    let scale = rates.beta.powi(-2 * l as i32);
    d.iter().map(|&x| scale * x * x).sum::<f64>() / h.n() as f64
}
