//! Symmetric sparse matrix storage shared by A, B^(l), and the verification
//! matrices.

use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sparse symmetric matrix. Both mirror entries are stored so row access and
/// matvec stay contiguous; construction takes each unordered pair once.
/// Values are f64 but A/B hold exact small integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSymMatrix {
    n: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseSymMatrix {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rows: (0..n).map(|i| vec![(i as u32, 1.0)]).collect(),
        }
    }

    /// Build from unordered-pair triplets (i, j, v). Duplicates accumulate;
    /// zero results are dropped.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            if i as usize >= n || j as usize >= n {
                return Err(Error::Malformed(format!(
                    "triplet ({i}, {j}) out of range for n = {n}"
                )));
            }
            rows[i as usize].push((j, v));
            if i != j {
                rows[j as usize].push((i, v));
            }
        }
        let mut m = Self { n, rows };
        m.normalize();
        Ok(m)
    }

    fn normalize(&mut self) {
        for row in &mut self.rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut out: Vec<(u32, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => out.push((c, v)),
                }
            }
            out.retain(|&(_, v)| v != 0.0);
            *row = out;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&(j as u32), |&(c, _)| c)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|&(_, v)| v).sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.rows
            .par_iter()
            .map(|row| row.iter().map(|&(c, v)| v * x[c as usize]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                dense[i][c as usize] = v;
            }
        }
        dense
    }

    /// Upper-triangle triplets (i <= j), row-major; the canonical sparse
    /// serialization order.
    pub fn upper_triplets(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                if c as usize >= i {
                    out.push((i as u32, c, v));
                }
            }
        }
        out
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|&(_, v)| v.abs()))
            .fold(0.0, f64::max)
    }
}
